"""Randomised and targeted certification of the stabilizer-entropy inequalities.

Every suite returns a TrialReport carrying the worst signed margin (positive
means the inequality held with room to spare) and the failing trials.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .entropy import (
    NumericalDegeneracyError,
    linear_stabilizer_entropy,
    stabilizer_entropies,
    stabilizer_entropy,
    stabilizer_nullity,
    stabilizer_purity,
)
from .pauli import (
    PureState,
    ResourceError,
    apply_clifford,
    apply_gate_tensor,
    haar_state,
    random_clifford,
    t_state,
    zero_state,
)
from .protocol import MeasureStep, ProtocolProgram, is_deterministic_pure, random_protocol, run_protocol

INEQ_TOL = 1e-8
LEMMA_TOL = 1e-9
EXACT_TOL = 1e-9
NEAR_EPS = (1e-3, 1e-1)


@dataclass
class TrialReport:
    suite: str
    trials: int = 0
    worst_margin: float = math.inf
    failures: list = field(default_factory=list)
    tolerance: float = INEQ_TOL
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, margin: float, seed, inputs, values, tol=None):
        """Log one inequality instance; ``margin`` is rhs - lhs for lhs <= rhs."""
        tol = self.tolerance if tol is None else tol
        self.worst_margin = min(self.worst_margin, float(margin))
        if margin < -tol:
            self.failures.append({"seed": seed, "inputs": inputs, "values": values})

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "trials": self.trials,
            "worst_margin": None if math.isinf(self.worst_margin) else self.worst_margin,
            "tolerance": self.tolerance,
            "failures": sorted(self.failures, key=lambda f: str(f["seed"])),
            "details": self.details,
        }


# --------------------------------------------------------------------------
# trial inputs


def near_stabilizer_state(n: int, eps: float, seed) -> PureState:
    """Random Clifford image of |0...0> plus an eps-sized Haar kick."""
    rng = np.random.default_rng(seed)
    stab = apply_clifford(zero_state(n), random_clifford(n, int(rng.integers(2**32))))
    kick = haar_state(n, int(rng.integers(2**32))).amplitudes
    return PureState.from_vector(stab.amplitudes + eps * kick)


def trial_state(n: int, seed) -> tuple[PureState, str]:
    """Haar state half of the time, otherwise a near-stabilizer state."""
    rng = np.random.default_rng(seed)
    pick = int(rng.integers(4))
    sub = int(rng.integers(2**32))
    if pick < 2:
        return haar_state(n, sub), "haar"
    eps = NEAR_EPS[pick - 2]
    return near_stabilizer_state(n, eps, sub), f"near:{eps:g}"


# --------------------------------------------------------------------------
# two-branch inequalities


def split_state(p: float, phi1: PureState, phi2: PureState) -> PureState:
    """sqrt(p)|0>phi1 + sqrt(1-p)|1>phi2."""
    if phi1.dim != phi2.dim:
        raise ValueError("branch states must have the same number of qubits")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return PureState.from_vector(np.concatenate([math.sqrt(p) * phi1.amplitudes, math.sqrt(1 - p) * phi2.amplitudes]))


def _tail(p, P1, P2, a):
    return 2 ** (2 * a - 1) * p**a * (1 - p) ** a * math.sqrt(P1 * P2)


def lemma2_rhs_binomial(p: float, P1: float, P2: float, alpha: int) -> float:
    a = int(alpha)
    s = sum(
        math.comb(2 * a, 2 * i) * p ** (2 * i) * (1 - p) ** (2 * (a - i)) * P1 ** (i / a) * P2 ** ((a - i) / a)
        for i in range(a + 1)
    )
    return s + _tail(p, P1, P2, a)


def lemma2_rhs_signed(p: float, P1: float, P2: float, alpha: int) -> float:
    a = int(alpha)
    u, v = p * P1 ** (1 / (2 * a)), (1 - p) * P2 ** (1 / (2 * a))
    return 0.5 * (u + v) ** (2 * a) + 0.5 * (u - v) ** (2 * a) + _tail(p, P1, P2, a)


def _random_split(rng, sizes):
    n = int(rng.choice(sizes))
    u = rng.random()
    p = 0.0 if u < 0.02 else 1.0 if u < 0.04 else 0.5 if u < 0.06 else float(rng.random())
    phi1, k1 = trial_state(n, int(rng.integers(2**32)))
    phi2, k2 = trial_state(n, int(rng.integers(2**32)))
    return p, phi1, phi2, f"n={n} p={p!r} {k1}/{k2}"


def _split_trials(trials, seed, sizes, splits):
    if splits is not None:
        for k, (p, phi1, phi2) in enumerate(splits):
            yield k, p, phi1, phi2, "given"
        return
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        p, phi1, phi2, desc = _random_split(rng, sizes)
        yield t, p, phi1, phi2, desc


def check_lemma2(trials=1000, seed=0, alphas=(2, 3), sizes=(2, 3), splits=None) -> TrialReport:
    rep = TrialReport("lemma2", tolerance=LEMMA_TOL)
    for t, p, phi1, phi2, desc in _split_trials(trials, seed, sizes, splits):
        psi = split_state(p, phi1, phi2)
        for a in alphas:
            lhs = stabilizer_purity(psi, a)
            P1, P2 = stabilizer_purity(phi1, a), stabilizer_purity(phi2, a)
            for form, rhs in (("binomial", lemma2_rhs_binomial(p, P1, P2, a)), ("signed", lemma2_rhs_signed(p, P1, P2, a))):
                rep.record(rhs - lhs, [seed, t], f"{desc} alpha={a} form={form}", {"lhs": lhs, "rhs": rhs})
        rep.trials += 1
    return rep


def check_min_corollary(trials=1000, seed=0, alphas=(2, 3), sizes=(2, 3), splits=None) -> TrialReport:
    """M(psi) >= min(M(phi1), M(phi2))."""
    rep = TrialReport("min_corollary", tolerance=LEMMA_TOL)
    for t, p, phi1, phi2, desc in _split_trials(trials, seed, sizes, splits):
        psi = split_state(p, phi1, phi2)
        for a in alphas:
            m = stabilizer_entropy(psi, a)
            lo = min(stabilizer_entropy(phi1, a), stabilizer_entropy(phi2, a))
            rep.record(m - lo, [seed, t], f"{desc} alpha={a}", {"M_psi": m, "min_branch": lo})
        rep.trials += 1
    return rep


def check_strong_purity_corollary(trials=1000, seed=0, alphas=(2, 3), sizes=(2, 3), splits=None) -> TrialReport:
    """P(psi) <= p P(phi1) + (1 - p) P(phi2)."""
    rep = TrialReport("strong_purity_corollary", tolerance=LEMMA_TOL)
    for t, p, phi1, phi2, desc in _split_trials(trials, seed, sizes, splits):
        psi = split_state(p, phi1, phi2)
        for a in alphas:
            lhs = stabilizer_purity(psi, a)
            rhs = p * stabilizer_purity(phi1, a) + (1 - p) * stabilizer_purity(phi2, a)
            rep.record(rhs - lhs, [seed, t], f"{desc} alpha={a}", {"lhs": lhs, "rhs": rhs})
        rep.trials += 1
    return rep


# --------------------------------------------------------------------------
# protocol monotonicity


def _protocol_trials(n, trials, seed, max_depth):
    if n > 5:
        raise ResourceError("protocol suites are limited to n <= 5")
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        psi, kind = trial_state(n, int(rng.integers(2**32)))
        depth = int(rng.integers(1, max_depth + 1))
        pseed = int(rng.integers(2**32))
        out = run_protocol(psi, random_protocol(n, depth, pseed))
        yield t, psi, out, f"n={n} {kind} depth={depth} protocol_seed={pseed}"


def check_theorem1(n=3, trials=500, seed=0, alphas=(2, 3), max_depth=8) -> TrialReport:
    """Deterministic outputs cannot gain entropy; branching outputs keep a branch at or below the input."""
    rep = TrialReport("theorem1", tolerance=INEQ_TOL)
    deterministic = 0
    for t, psi, out, desc in _protocol_trials(n, trials, seed, max_depth):
        for a in alphas:
            m_in = stabilizer_entropy(psi, a)
            outs = [stabilizer_entropy(s, a) for s in out.states]
            if is_deterministic_pure(out):
                rep.record(m_in - outs[0], [seed, t], f"{desc} alpha={a} deterministic", {"M_in": m_in, "M_out": outs[0]})
            else:
                rep.record(m_in - min(outs), [seed, t], f"{desc} alpha={a} branching", {"M_in": m_in, "min_out": min(outs)})
        deterministic += is_deterministic_pure(out)
        rep.trials += 1
    rep.details["deterministic_trials"] = deterministic
    return rep


def check_theorem2(n=3, trials=500, seed=0, alphas=(2, 3), max_depth=8) -> TrialReport:
    """Average linear entropy over the branches never exceeds the input's."""
    rep = TrialReport("theorem2", tolerance=INEQ_TOL)
    for t, psi, out, desc in _protocol_trials(n, trials, seed, max_depth):
        for a in alphas:
            m_in = linear_stabilizer_entropy(psi, a)
            avg = float(sum(w * linear_stabilizer_entropy(s, a) for w, s in out.entries))
            rep.record(m_in - avg, [seed, t], f"{desc} alpha={a}", {"Mlin_in": m_in, "avg_out": avg})
        rep.trials += 1
    return rep


# --------------------------------------------------------------------------
# strong-monotonicity counterexample


def counterexample_state(n: int, seed) -> tuple[PureState, PureState]:
    """(psi, phi) with psi = (|0^n> + |1>|phi>)/sqrt(2), phi Haar on n - 1 qubits."""
    phi = haar_state(n - 1, [seed, n])
    v = np.zeros(1 << n, dtype=complex)
    v[0] = 1
    v[1 << (n - 1):] += phi.amplitudes
    return PureState.from_vector(v), phi


def check_counterexample(n_max=12, seed=0, n_min=3) -> TrialReport:
    """Find the smallest n where measuring the first qubit raises the average M_2."""
    if n_max > 13:
        raise ResourceError("counterexample search is limited to n <= 13")
    rep = TrialReport("counterexample", tolerance=0.0)
    measure = ProtocolProgram((MeasureStep(0),))
    scan = []
    found = None
    for n in range(n_min, n_max + 1):
        psi, _ = counterexample_state(n, seed)
        out = run_protocol(psi, measure)
        m_psi = stabilizer_entropy(psi, 2)
        avg = float(sum(w * stabilizer_entropy(s, 2) for w, s in out.entries))
        scan.append({"n": n, "M2_psi": m_psi, "avg_after": avg})
        rep.trials += 1
        if avg > m_psi:
            found = n
            break
    rep.details = {"seed": seed, "found_n": found, "scan": scan}
    if found is None:
        rep.failures.append({"seed": seed, "inputs": f"n<={n_max}", "values": {"last": scan[-1] if scan else None}})
        rep.worst_margin = min(s["M2_psi"] - s["avg_after"] for s in scan) if scan else math.inf
    else:
        rep.worst_margin = scan[-1]["avg_after"] - scan[-1]["M2_psi"]
    return rep


# --------------------------------------------------------------------------
# stabilizer states and D_min

STAB_COUNTS = {1: 6, 2: 60, 3: 1080}
_STAB_CACHE: dict = {}


def _canonical(v: np.ndarray):
    k = int(np.argmax(np.abs(v) > 1e-9))
    w = v * (abs(v[k]) / v[k])
    return tuple(np.round(np.concatenate([w.real, w.imag]), 8) + 0.0)


def enumerate_stabilizer_states(n: int) -> list:
    """All pure stabilizer states on n <= 3 qubits, one per global-phase class."""
    if n not in STAB_COUNTS:
        raise ResourceError(f"stabilizer enumeration is limited to 1 <= n <= 3, got {n}")
    if n in _STAB_CACHE:
        return list(_STAB_CACHE[n])
    gates = [("H", q) for q in range(n)] + [("S", q) for q in range(n)]
    gates += [("CNOT", c, t) for c in range(n) for t in range(n) if c != t]
    start = zero_state(n).amplitudes
    seen = {_canonical(start): start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for g in gates:
            w = apply_gate_tensor(v.reshape((2,) * n), g).reshape(-1)
            key = _canonical(w)
            if key not in seen:
                seen[key] = w
                queue.append(w)
    states = [PureState(v) for v in seen.values()]
    if len(states) != STAB_COUNTS[n]:
        raise ArithmeticError(f"enumerated {len(states)} stabilizer states, expected {STAB_COUNTS[n]}")
    _STAB_CACHE[n] = states
    return list(states)


def min_relative_entropy(psi: PureState) -> float:
    """D_min = -log2 max_sigma |<sigma|psi>|^2 over pure stabilizer states (n <= 3)."""
    stabs = np.stack([s.amplitudes for s in enumerate_stabilizer_states(psi.num_qubits)])
    best = float(np.max(np.abs(stabs.conj() @ psi.amplitudes) ** 2))
    return -math.log2(min(best, 1.0))


def binary_entropy(x: float) -> float:
    if x <= 0 or x >= 1:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def fannes_bound(trace_norm: float, d: int) -> float:
    """Right-hand side of the Fannes-type bound on |M_1(psi) - M_1(phi)|."""
    extra = binary_entropy(trace_norm) if trace_norm <= 0.5 else 1.0
    return trace_norm * math.log2(d * d - 1) + extra


def pure_trace_norm(psi: PureState, phi: PureState) -> float:
    """|| psi - phi ||_1 for pure states, 2 sqrt(1 - |<psi|phi>|^2)."""
    return 2.0 * math.sqrt(max(0.0, 1.0 - psi.fidelity(phi)))


# --------------------------------------------------------------------------
# property chain

ORDER_ALPHAS = (0.5, 1.0, 2.0, 3.0, 4.0)


def _structured_state(n: int, seed) -> tuple[PureState, str]:
    """Clifford image of |T>^k |0>^{n-k}, nullity k."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(0, n + 1))
    v = np.ones(1)
    for q in range(n):
        v = np.kron(v, t_state().amplitudes if q < k else zero_state(1).amplitudes)
    psi = apply_clifford(PureState(v), random_clifford(n, int(rng.integers(2**32))))
    return psi, f"T^{k}"


def check_property_chain(trials=200, seed=0, n_max=4, dmin_n_max=3) -> TrialReport:
    rep = TrialReport("property_chain", tolerance=INEQ_TOL)
    counts = {n: len(enumerate_stabilizer_states(n)) for n in range(1, dmin_n_max + 1)}
    rep.details["stabilizer_counts"] = counts
    for n, c in counts.items():
        if c != STAB_COUNTS[n]:
            rep.failures.append({"seed": seed, "inputs": f"enumeration n={n}", "values": {"count": c}})
    for n in range(1, dmin_n_max + 1):
        worst = max(abs(stabilizer_entropy(s, 2)) for s in enumerate_stabilizer_states(n))
        rep.record(-worst, [seed, "faithful", n], f"stabilizer states n={n}", {"max_M2": worst}, tol=1e-10)
    skipped = 0
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        n = int(rng.integers(1, n_max + 1))
        if rng.random() < 0.3:
            psi, kind = _structured_state(n, int(rng.integers(2**32)))
        else:
            psi, kind = trial_state(n, int(rng.integers(2**32)))
        tag = [seed, t]
        desc = f"n={n} {kind}"
        ent = stabilizer_entropies(psi, ORDER_ALPHAS)

        # additivity with another random state and with a stabilizer state
        m2, _ = trial_state(int(rng.integers(1, 3)), int(rng.integers(2**32)))
        stab = apply_clifford(zero_state(2), random_clifford(2, int(rng.integers(2**32))))
        for other, label in ((m2, "random"), (stab, "stabilizer")):
            joint = stabilizer_entropies(psi.tensor(other), (1.0, 2.0, 3.0))
            part = stabilizer_entropies(other, (1.0, 2.0, 3.0))
            for a in (1.0, 2.0, 3.0):
                gap = abs(joint[a] - ent[a] - part[a])
                rep.record(-gap, tag, f"{desc} additivity/{label} alpha={a}", {"gap": gap})

        # ordering in alpha
        for lo, hi in zip(ORDER_ALPHAS, ORDER_ALPHAS[1:]):
            rep.record(ent[lo] - ent[hi], tag, f"{desc} order {lo}>={hi}", {"lo": ent[lo], "hi": ent[hi]}, tol=EXACT_TOL)

        # Clifford invariance
        moved = apply_clifford(psi, random_clifford(n, int(rng.integers(2**32))))
        for a in (2.0, 3.0):
            gap = abs(stabilizer_entropy(moved, a) - ent[a])
            rep.record(-gap, tag, f"{desc} clifford alpha={a}", {"gap": gap}, tol=EXACT_TOL)

        # upper bound and nullity
        cap = math.log2(psi.dim + 1) - 1
        try:
            nu = stabilizer_nullity(psi)
        except NumericalDegeneracyError:
            nu = None
            skipped += 1
        for a in (2.0, 3.0, 4.0):
            rep.record(cap - ent[a], tag, f"{desc} cap alpha={a}", {"M": ent[a], "cap": cap}, tol=EXACT_TOL)
            if nu is not None:
                rep.record(nu - ent[a], tag, f"{desc} nullity alpha={a}", {"M": ent[a], "nu": nu}, tol=EXACT_TOL)

        # min-relative entropy
        if n <= dmin_n_max:
            dmin = min_relative_entropy(psi)
            for a in (2.0, 3.0):
                rhs = 2 * a / (a - 1) * dmin
                rep.record(rhs - ent[a], tag, f"{desc} dmin alpha={a}", {"M": ent[a], "rhs": rhs}, tol=EXACT_TOL)

        # Fannes at alpha = 1 on a pair at random distance
        scale = float(10 ** rng.uniform(-4, 0.5))
        kick = haar_state(n, int(rng.integers(2**32))).amplitudes
        phi = PureState.from_vector(psi.amplitudes + scale * kick)
        tn = pure_trace_norm(psi, phi)
        lhs = abs(ent[1.0] - stabilizer_entropy(phi, 1.0))
        rhs = fannes_bound(tn, psi.dim)
        rep.record(rhs - lhs, tag, f"{desc} fannes", {"lhs": lhs, "rhs": rhs, "trace_norm": tn}, tol=EXACT_TOL)
        rep.trials += 1
    rep.details["nullity_skipped"] = skipped
    return rep


# --------------------------------------------------------------------------
# driver

SUITES = (
    "lemma2",
    "min_corollary",
    "strong_purity_corollary",
    "theorem1",
    "theorem2",
    "counterexample",
    "property_chain",
)


def run_suite(name: str, trials: int | None = None, seed: int = 0, alphas=(2, 3)) -> TrialReport:
    alphas = tuple(int(a) for a in alphas)
    if any(a < 2 for a in alphas):
        raise ValueError("monotonicity suites are only meaningful for integer alpha >= 2")
    if name == "lemma2":
        return check_lemma2(trials or 1000, seed, alphas)
    if name == "min_corollary":
        return check_min_corollary(trials or 1000, seed, alphas)
    if name == "strong_purity_corollary":
        return check_strong_purity_corollary(trials or 1000, seed, alphas)
    if name == "theorem1":
        return check_theorem1(3, trials or 500, seed, alphas)
    if name == "theorem2":
        return check_theorem2(3, trials or 500, seed, alphas)
    if name == "counterexample":
        return check_counterexample(12, seed)
    if name == "property_chain":
        return check_property_chain(trials or 200, seed)
    raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")


def run_suites(names, trials=None, seed=0, alphas=(2, 3)) -> list:
    if names in ("all", ["all"], ("all",)):
        names = SUITES
    if isinstance(names, str):
        names = [names]
    return [run_suite(nm, trials, seed, alphas) for nm in names]


__all__ = [
    "TrialReport",
    "check_lemma2",
    "check_min_corollary",
    "check_strong_purity_corollary",
    "check_theorem1",
    "check_theorem2",
    "check_counterexample",
    "check_property_chain",
    "enumerate_stabilizer_states",
    "min_relative_entropy",
    "run_suite",
    "run_suites",
]
