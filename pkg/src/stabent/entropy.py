"""Stabilizer purities, stabilizer Renyi entropies and stabilizer nullity.

All entropies are in bits. For a pure state on n qubits with characteristic
distribution xi_P = tr^2(P psi) / 2^n:

    P_alpha = 2^{-n} sum_P tr^{2 alpha}(P psi)
    M_alpha = log2(P_alpha) / (1 - alpha)      (alpha != 1)
    M_1     = H(xi) - n                         (Shannon limit)
    M_alpha^lin = 1 - P_alpha
"""
from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .pauli import MAX_QUBITS, PureState, check_size


class NumericalDegeneracyError(ArithmeticError):
    pass


def _alpha(alpha) -> float:
    a = float(alpha)
    if not math.isfinite(a) or a < 0:
        raise ValueError(f"Renyi index must be finite and >= 0, got {alpha!r}")
    return a


def purities(state: PureState, alphas, max_qubits: int = MAX_QUBITS, backend=None) -> np.ndarray:
    """Stabilizer purities for several indices from a single spectrum pass.

    The entry for alpha = 1 is returned as the Shannon entropy of xi (bits)
    rather than a purity; callers wanting M_1 should use stabilizer_entropy.
    """
    check_size(state.num_qubits, max_qubits)
    alphas = [_alpha(a) for a in alphas]
    sums = kernels.spectrum_moments(state.amplitudes, alphas, backend=backend)
    d = state.dim
    return np.array([s if a == 1.0 else s / d for a, s in zip(alphas, sums)])


def stabilizer_purity(state: PureState, alpha, **kw) -> float:
    a = _alpha(alpha)
    if a == 1.0:
        # P_1 = 2^{-n} sum_P tr^2 = 1 for every pure state
        return 1.0
    return float(purities(state, [a], **kw)[0])


def entropy_from_purity(purity: float, alpha: float) -> float:
    if alpha == 1.0:
        raise ValueError("alpha = 1 has no purity form; use the Shannon branch")
    return math.log2(purity) / (1.0 - alpha) + 0.0


def stabilizer_entropy(state: PureState, alpha, **kw) -> float:
    a = _alpha(alpha)
    val = float(purities(state, [a], **kw)[0])
    if a == 1.0:
        return val - state.num_qubits
    return entropy_from_purity(val, a)


def stabilizer_entropies(state: PureState, alphas, **kw) -> dict[float, float]:
    alphas = [_alpha(a) for a in alphas]
    vals = purities(state, alphas, **kw)
    n = state.num_qubits
    return {a: (v - n if a == 1.0 else entropy_from_purity(v, a)) for a, v in zip(alphas, vals)}


def linear_stabilizer_entropy(state: PureState, alpha, **kw) -> float:
    return 1.0 - stabilizer_purity(state, alpha, **kw)


def stabilizer_nullity(state: PureState, tol: float = 1e-8, max_qubits: int = MAX_QUBITS, backend=None) -> int:
    """n minus log2 of the number of Paulis with |<P>| >= 1 - tol."""
    n = state.num_qubits
    check_size(n, max_qubits)
    sq = kernels.squared_expectations(state.amplitudes, backend=backend)
    count = int(np.count_nonzero(sq >= (1.0 - tol) ** 2))
    k = count.bit_length() - 1
    if count < 1 or (1 << k) != count:
        raise NumericalDegeneracyError(
            f"{count} Paulis stabilise the state within tol={tol}; a stabiliser "
            "group has power-of-two size, retry with a tighter tol"
        )
    return n - k


@dataclass
class EntropyReport:
    alpha: float
    purity: float
    entropy_bits: float
    linear: float
    nullity: int

    def to_json(self) -> dict:
        return asdict(self)


def entropy_report(state: PureState, alpha, **kw) -> EntropyReport:
    a = _alpha(alpha)
    ent = stabilizer_entropy(state, a, **kw)
    pur = stabilizer_purity(state, a, **kw)
    return EntropyReport(
        alpha=a,
        purity=pur,
        entropy_bits=ent,
        linear=1.0 - pur,
        nullity=stabilizer_nullity(state),
    )


# --------------------------------------------------------------------------
# closed forms for the named magic-state families


def parse_family(family) -> tuple[str, int]:
    """Normalise 'T', 'cs', 'ccz', 'C^3Z', 'ckz:m', 'cks:m' or ('CkZ', m) to (kind, m)."""
    if isinstance(family, tuple):
        kind, m = family[0].lower(), int(family[1]) if len(family) > 1 else 1
    else:
        text = str(family).lower().replace("{", "").replace("}", "")
        head, _, tail = text.partition(":")
        kind, m = head, int(tail) if tail else 0
        caret = re.fullmatch(r"c\^(\d+)([zs])", head)
        if caret:
            kind, m = "ck" + caret.group(2), int(caret.group(1)) + 1
        elif kind in ("cs", "ccz", "cz"):
            kind, m = {"cs": ("cks", 2), "ccz": ("ckz", 3), "cz": ("ckz", 2)}[kind]
    if kind == "t":
        return "T", 1
    if kind not in ("ckz", "cks") or m < 1:
        raise ValueError(f"unknown state family {family!r}")
    return ("CkZ" if kind == "ckz" else "CkS"), m


def family_label(family) -> str:
    kind, m = parse_family(family)
    if kind == "T":
        return "T"
    short = {("CkZ", 3): "CCZ", ("CkS", 2): "CS", ("CkZ", 2): "CZ"}.get((kind, m))
    if short:
        return short
    return f"C^{m - 1}{kind[-1]}"


def closed_form_purity(family, alpha: int) -> Fraction:
    """Exact stabilizer purity of |T>, |C^{m-1}Z> or |C^{m-1}S>.

    CkZ uses P = (1/d)[1 + (d-1)(1-4/d)^{2a} + ((d-1)(d-2)/2)(4/d)^{2a}],
    which matches brute-force spectra (see ``ckz_purity_as_printed`` for the
    inconsistent variant kept for reference).
    """
    if int(alpha) != alpha or alpha < 1:
        raise ValueError("closed forms are defined for integer alpha >= 1")
    a = int(alpha)
    kind, m = parse_family(family)
    if kind == "T":
        return Fraction(2**a + 2, 2 ** (a + 1))
    d = Fraction(2**m)
    if kind == "CkZ":
        return (1 + (d - 1) * (1 - 4 / d) ** (2 * a) + (d - 1) * (d - 2) / 2 * (4 / d) ** (2 * a)) / d
    return (1 + (d - 1) * (1 - 2 / d) ** (2 * a) + Fraction(2) ** (2 * a) / d ** (2 * a) * (d - 1) ** 2) / d


def ckz_purity_as_printed(m: int, alpha: int) -> Fraction:
    """C^{m-1}Z purity with third coefficient 2^{alpha-1}/d^{2 alpha} (d^2 - 3d + 2).

    Disagrees with brute force, e.g. 0.18225... instead of 11/32 at m = 3,
    alpha = 2; only kept so the discrepancy stays reproducible.
    """
    a = int(alpha)
    d = Fraction(2**m)
    return (1 + (1 - 4 / d) ** (2 * a) * (d - 1) + Fraction(2) ** (a - 1) / d ** (2 * a) * (d * d - 3 * d + 2)) / d


def closed_form_entropy(family, alpha: int) -> float:
    if alpha == 1:
        raise ValueError("closed-form entropies need integer alpha >= 2")
    p = closed_form_purity(family, alpha)
    return (math.log2(p.numerator) - math.log2(p.denominator)) / (1 - int(alpha))


def closed_form_linear(family, alpha: int) -> Fraction:
    return 1 - closed_form_purity(family, alpha)
