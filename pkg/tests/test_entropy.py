import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stabent.entropy import (
    NumericalDegeneracyError,
    ckz_purity_as_printed,
    closed_form_entropy,
    closed_form_linear,
    closed_form_purity,
    entropy_report,
    family_label,
    linear_stabilizer_entropy,
    parse_family,
    purities,
    stabilizer_entropies,
    stabilizer_entropy,
    stabilizer_nullity,
    stabilizer_purity,
)
from stabent.pauli import (
    PureState,
    ResourceError,
    apply_clifford,
    cks_state,
    ckz_state,
    haar_state,
    naive_char_spectrum,
    random_clifford,
    t_state,
    zero_state,
)

seeds = st.integers(0, 2**31)


def _naive_purity(psi, alpha):
    xi = naive_char_spectrum(psi).xi
    return float(np.sum((xi * psi.dim) ** alpha) / psi.dim)


def test_t_state_values():
    t = t_state()
    assert stabilizer_purity(t, 2) == pytest.approx(0.75, abs=1e-12)
    assert stabilizer_entropy(t, 2) == pytest.approx(math.log2(4 / 3), abs=1e-12)
    # xi(T) = (1/2, 1/4, 1/4, 0)
    assert stabilizer_entropy(t, 1) == pytest.approx(0.5, abs=1e-12)
    assert stabilizer_entropy(t, 0) == pytest.approx(math.log2(1.5), abs=1e-12)
    assert stabilizer_entropy(t, 0.5) == pytest.approx(2 * math.log2(0.5 + 2**-0.5), abs=1e-12)


def test_frozen_purities():
    assert stabilizer_purity(ckz_state(3), 2) == pytest.approx(11 / 32, abs=1e-12)
    assert stabilizer_purity(ckz_state(3), 3) == pytest.approx(23 / 128, abs=1e-12)
    assert stabilizer_purity(ckz_state(4), 2) == pytest.approx(197 / 512, abs=1e-12)
    assert stabilizer_purity(cks_state(2), 2) == pytest.approx(7 / 16, abs=1e-12)
    assert stabilizer_purity(cks_state(3), 2) == pytest.approx(109 / 256, abs=1e-12)


@pytest.mark.parametrize("m", range(1, 8))
@pytest.mark.parametrize("alpha", [2, 3, 4])
def test_closed_forms_match_spectrum(m, alpha):
    for fam, state in ((("CkZ", m), ckz_state(m)), (("CkS", m), cks_state(m))):
        exact = float(closed_form_purity(fam, alpha))
        assert stabilizer_purity(state, alpha) == pytest.approx(exact, abs=1e-12)
        if m <= 5:
            assert _naive_purity(state, alpha) == pytest.approx(exact, abs=1e-12)


def test_closed_form_t():
    assert closed_form_purity("T", 2) == Fraction(3, 4)
    assert closed_form_purity("T", 3) == Fraction(5, 8)
    assert closed_form_entropy("T", 2) == pytest.approx(math.log2(4 / 3), abs=1e-15)
    assert closed_form_linear("ccz", 2) == Fraction(21, 32)
    with pytest.raises(ValueError):
        closed_form_entropy("T", 1)


def test_printed_ckz_coefficient_disagrees():
    assert float(ckz_purity_as_printed(3, 2)) == pytest.approx(0.1822509765625, abs=1e-15)
    assert float(ckz_purity_as_printed(3, 2)) != pytest.approx(11 / 32, abs=1e-3)


def test_family_parsing():
    assert parse_family("C^3Z") == ("CkZ", 4)
    assert parse_family("cs") == ("CkS", 2)
    assert family_label(("CkZ", 5)) == "C^4Z"
    with pytest.raises(ValueError):
        parse_family("W")


@given(n=st.integers(1, 5), seed=seeds)
def test_alpha_ordering(n, seed):
    psi = haar_state(n, seed)
    ent = stabilizer_entropies(psi, [0.0, 0.5, 1.0, 2.0, 3.0, 4.0])
    vals = list(ent.values())
    assert all(a >= b - 1e-10 for a, b in zip(vals, vals[1:]))


@given(n=st.integers(1, 5), seed=seeds)
def test_clifford_invariance(n, seed):
    psi = haar_state(n, seed)
    moved = apply_clifford(psi, random_clifford(n, seed + 1))
    for a in (1, 2, 3):
        assert stabilizer_entropy(moved, a) == pytest.approx(stabilizer_entropy(psi, a), abs=1e-9)


@given(n1=st.integers(1, 3), n2=st.integers(1, 3), seed=seeds)
def test_additivity(n1, n2, seed):
    a, b = haar_state(n1, seed), haar_state(n2, seed + 7)
    for alpha in (0.5, 1, 2, 3):
        joint = stabilizer_entropy(a.tensor(b), alpha)
        assert joint == pytest.approx(stabilizer_entropy(a, alpha) + stabilizer_entropy(b, alpha), abs=1e-8)


@given(n=st.integers(1, 6), seed=seeds)
def test_range_and_linear(n, seed):
    psi = haar_state(n, seed)
    for a in (2, 3):
        p = stabilizer_purity(psi, a)
        assert 0 < p <= 1
        assert linear_stabilizer_entropy(psi, a) == pytest.approx(1 - p, abs=1e-15)
        assert stabilizer_entropy(psi, a) <= math.log2(psi.dim + 1) - 1 + 1e-10


def test_shannon_limit_is_continuous():
    psi = haar_state(3, 11)
    m1 = stabilizer_entropy(psi, 1)
    assert stabilizer_entropy(psi, 1 - 1e-6) == pytest.approx(m1, abs=1e-4)
    assert stabilizer_entropy(psi, 1 + 1e-6) == pytest.approx(m1, abs=1e-4)


def test_stabilizer_states_have_zero_entropy():
    for seed in range(5):
        s = apply_clifford(zero_state(4), random_clifford(4, seed))
        for a in (0, 0.5, 1, 2, 3):
            assert abs(stabilizer_entropy(s, a)) < 1e-10
        assert stabilizer_nullity(s) == 0


def test_nullity():
    assert stabilizer_nullity(t_state()) == 1
    assert stabilizer_nullity(ckz_state(3)) == 3
    assert stabilizer_nullity(t_state().tensor(zero_state(2))) == 1
    assert stabilizer_nullity(haar_state(3, 0)) == 3


def test_nullity_degeneracy_is_reported():
    # <ZI> = <IZ> = 1 - 2 eps^2 pass tol = 3 eps^2 but <ZZ> = 1 - 4 eps^2 fails: 3 "stabilisers"
    eps = 1e-3
    v = np.array([1, eps, eps, 0], dtype=complex)
    psi = PureState.from_vector(v)
    with pytest.raises(NumericalDegeneracyError):
        stabilizer_nullity(psi, tol=3 * eps**2)
    assert stabilizer_nullity(psi, tol=1e-12) == 2


def test_report_and_guards():
    rep = entropy_report(ckz_state(3), 2).to_json()
    assert rep["purity"] == pytest.approx(11 / 32, abs=1e-12)
    assert rep["nullity"] == 3
    with pytest.raises(ValueError):
        stabilizer_entropy(t_state(), -1)
    with pytest.raises(ResourceError):
        purities(haar_state(4, 0), [2], max_qubits=3)
