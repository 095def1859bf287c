import math

import numpy as np
import pytest

from stabent.entropy import stabilizer_entropy, stabilizer_purity
from stabent.pauli import PureState, ResourceError, haar_state, t_state, zero_state
from stabent.verify import (
    SUITES,
    binary_entropy,
    check_counterexample,
    check_lemma2,
    check_min_corollary,
    check_property_chain,
    check_strong_purity_corollary,
    check_theorem1,
    check_theorem2,
    counterexample_state,
    enumerate_stabilizer_states,
    fannes_bound,
    lemma2_rhs_binomial,
    lemma2_rhs_signed,
    min_relative_entropy,
    pure_trace_norm,
    run_suite,
    split_state,
)


def test_stabilizer_enumeration():
    assert [len(enumerate_stabilizer_states(n)) for n in (1, 2, 3)] == [6, 60, 1080]
    for n in (1, 2):
        assert max(abs(stabilizer_entropy(s, 2)) for s in enumerate_stabilizer_states(n)) < 1e-10
    with pytest.raises(ResourceError):
        enumerate_stabilizer_states(4)


def test_dmin_of_t():
    d = min_relative_entropy(t_state())
    assert d == pytest.approx(-math.log2(math.cos(math.pi / 8) ** 2), abs=1e-12)
    assert d == pytest.approx(0.2284, abs=1e-4)
    assert stabilizer_entropy(t_state(), 2) <= 4 * d
    assert min_relative_entropy(zero_state(3)) == pytest.approx(0.0, abs=1e-12)


def test_lemma2_forms():
    # the two printed forms coincide algebraically
    for p in (0.0, 0.3, 0.5, 1.0):
        for P1, P2 in ((0.75, 0.75), (0.2, 0.9)):
            for a in (2, 3):
                assert lemma2_rhs_binomial(p, P1, P2, a) == pytest.approx(lemma2_rhs_signed(p, P1, P2, a), abs=1e-14)
    phi1, phi2 = haar_state(2, 1), haar_state(2, 2)
    # degenerate split: psi = |0> phi1
    assert lemma2_rhs_binomial(1.0, stabilizer_purity(phi1, 2), 0.3, 2) == pytest.approx(stabilizer_purity(phi1, 2))
    rep = check_lemma2(splits=[(1.0, phi1, phi2), (0.5, t_state(), t_state())])
    assert rep.passed and rep.trials == 2


def test_split_state_validation():
    with pytest.raises(ValueError):
        split_state(0.5, haar_state(1, 0), haar_state(2, 0))
    with pytest.raises(ValueError):
        split_state(1.5, haar_state(1, 0), haar_state(1, 0))


def test_corollaries_examples():
    phi = haar_state(2, 5)
    # p = 0 leaves psi = |1> phi2
    psi = split_state(0.0, zero_state(2), phi)
    assert stabilizer_entropy(psi, 2) == pytest.approx(stabilizer_entropy(phi, 2), abs=1e-12)
    rep = check_strong_purity_corollary(splits=[(0.0, zero_state(2), phi)])
    assert rep.passed and rep.worst_margin == pytest.approx(0.0, abs=1e-12)
    rep = check_strong_purity_corollary(splits=[(0.5, zero_state(2), phi)], alphas=(2,))
    assert rep.passed and rep.worst_margin > 0
    rep = check_min_corollary(splits=[(0.5, zero_state(2), phi)], alphas=(2,))
    assert rep.passed and rep.worst_margin > 0


def test_small_randomised_suites():
    for fn in (check_lemma2, check_min_corollary, check_strong_purity_corollary):
        rep = fn(trials=60, seed=3)
        assert rep.passed, rep.failures[:2]
        assert rep.worst_margin > -1e-12
    for fn in (check_theorem1, check_theorem2):
        rep = fn(n=3, trials=60, seed=3)
        assert rep.passed, rep.failures[:2]


def test_suites_are_deterministic():
    a = check_theorem2(n=2, trials=20, seed=9).to_json()
    b = check_theorem2(n=2, trials=20, seed=9).to_json()
    assert a == b


def test_theorem_suite_limits():
    with pytest.raises(ResourceError):
        check_theorem1(n=6, trials=1)
    with pytest.raises(ValueError):
        run_suite("theorem1", trials=1, alphas=(1,))
    with pytest.raises(ValueError):
        run_suite("nope")
    assert "counterexample" in SUITES


def test_property_chain_small():
    rep = check_property_chain(trials=40, seed=2)
    assert rep.passed, rep.failures[:2]
    assert rep.details["stabilizer_counts"] == {1: 6, 2: 60, 3: 1080}


def test_fannes_helpers():
    psi = haar_state(2, 0)
    assert pure_trace_norm(psi, psi) == pytest.approx(0.0, abs=1e-7)
    assert fannes_bound(0.0, 4) == 0.0
    assert fannes_bound(0.6, 4) == pytest.approx(0.6 * math.log2(15) + 1)
    assert binary_entropy(0.5) == 1.0
    orth = PureState(np.array([0, 1]))
    assert pure_trace_norm(zero_state(1), orth) == pytest.approx(2.0)


def test_counterexample_structure():
    psi, phi = counterexample_state(6, 0)
    assert abs(psi.amplitudes[0]) ** 2 == pytest.approx(0.5)
    # overlap 1/2 with |0^n> caps M_2 at 4 D_min <= 4 bits
    assert stabilizer_entropy(psi, 2) <= 4.0
    with pytest.raises(ResourceError):
        check_counterexample(n_max=14)


def test_counterexample_found():
    rep = check_counterexample(n_max=13, seed=0)
    assert rep.passed
    n = rep.details["found_n"]
    last = rep.details["scan"][-1]
    assert last["n"] == n and last["avg_after"] > last["M2_psi"]
    # branch bookkeeping: the |0...0> branch contributes nothing
    _, phi = counterexample_state(n, 0)
    assert last["avg_after"] == pytest.approx(0.5 * stabilizer_entropy(phi, 2), abs=1e-12)
