"""Conversion-rate and conversion-probability bounds between magic states.

For an additive monotone M, copies of ``target`` obtainable per copy of
``source`` are at most M(source) / M(target). Strong monotonicity of the
linear entropy bounds the success probability of a single-shot conversion by
M^lin(source) / M^lin(target).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .entropy import (
    closed_form_purity,
    family_label,
    linear_stabilizer_entropy,
    parse_family,
    stabilizer_entropy,
)
from .pauli import PureState

ZERO_TOL = 1e-12
TABLE_SIZES = range(3, 9)
TABLE_TARGETS = ("T", "CS", "CCZ")
HEADLINE = (("ckz:4", "ccz"), ("ckz:5", "ccz"), ("cks:3", "ccz"), ("cks:4", "ccz"))


@dataclass
class BoundReport:
    source: str
    target: str
    alpha: int
    rate_bound: float
    prob_bound: float
    exact_rationals: dict = field(default_factory=dict)
    rounded_up: float | None = None
    formula_value: float | None = None
    backward_bound: float | None = None

    def to_json(self) -> dict:
        out = {
            "source": self.source,
            "target": self.target,
            "alpha": self.alpha,
            "rate_bound": self.rate_bound,
            "prob_bound": self.prob_bound,
            "exact_rationals": self.exact_rationals,
        }
        for key in ("rounded_up", "formula_value", "backward_bound"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        return out


def _check_alpha(alpha) -> int:
    if int(alpha) != alpha or alpha < 2:
        raise ValueError(f"bounds need an integer alpha >= 2, got {alpha!r}")
    return int(alpha)


def _purity(state, alpha):
    """Exact Fraction for named families, float for explicit states."""
    if isinstance(state, PureState):
        return 1.0 - linear_stabilizer_entropy(state, alpha)
    return closed_form_purity(state, alpha)


def _entropy(state, alpha) -> float:
    if isinstance(state, PureState):
        return stabilizer_entropy(state, alpha)
    p = closed_form_purity(state, alpha)
    return (math.log2(p.numerator) - math.log2(p.denominator)) / (1 - alpha)


def _name(state) -> str:
    return "explicit" if isinstance(state, PureState) else family_label(state)


def rate_bound(source, target, alpha: int = 2) -> float:
    a = _check_alpha(alpha)
    if not isinstance(source, PureState) and not isinstance(target, PureState):
        if parse_family(source) == parse_family(target):
            return 1.0
    num, den = _entropy(source, a), _entropy(target, a)
    if den <= ZERO_TOL:
        raise ValueError(f"target {_name(target)} is a stabilizer state; conversion to it is unconstrained")
    if num <= ZERO_TOL:
        raise ValueError(f"source {_name(source)} is a stabilizer state")
    return num / den


def prob_bound(source, target, alpha: int = 2) -> float:
    a = _check_alpha(alpha)
    src, tgt = 1 - _purity(source, a), 1 - _purity(target, a)
    if tgt <= ZERO_TOL:
        raise ValueError(f"target {_name(target)} is a stabilizer state")
    return float(min(1, src / tgt))


def _ratio_str(x) -> str:
    return f"{x.numerator}/{x.denominator}" if isinstance(x, Fraction) else repr(float(x))


def round_up(x: float, digits: int = 1) -> float:
    scale = 10**digits
    return math.ceil(x * scale) / scale


def bound_report(source, target, alpha: int = 2) -> BoundReport:
    a = _check_alpha(alpha)
    return BoundReport(
        source=_name(source),
        target=_name(target),
        alpha=a,
        rate_bound=rate_bound(source, target, a),
        prob_bound=prob_bound(source, target, a),
        exact_rationals={
            "P_source": _ratio_str(_purity(source, a)),
            "P_target": _ratio_str(_purity(target, a)),
        },
    )


# --------------------------------------------------------------------------
# the general-n formulas as printed, kept separate from the closed forms so
# the two routes can be compared


def ckz_rate_numerator(n: int) -> float:
    """-log2 of 16^{-n}(16^n - 2^{3n+4} + 7*4^{n+2} - 7*2^{n+5} + 128)."""
    poly = 16**n - 2 ** (3 * n + 4) + 7 * 4 ** (n + 2) - 7 * 2 ** (n + 5) + 128
    return -math.log2(Fraction(poly, 16**n))


def cks_rate_numerator(n: int) -> float:
    """-log2 of 2^{-4n}(16^n - 8^{n+1} + 2^{2n+5} - 5*2^{n+3} + 16)."""
    poly = 16**n - 8 ** (n + 1) + 2 ** (2 * n + 5) - 5 * 2 ** (n + 3) + 16
    return -math.log2(Fraction(poly, 2 ** (4 * n)))


TARGET_LOG = {"T": Fraction(4, 3), "CS": Fraction(16, 7), "CCZ": Fraction(32, 11)}


def symbolic_rate(kind: str, target: str, n: int) -> float:
    """Printed alpha = 2 rate formula for C^{n-1}Z or C^{n-1}S -> target."""
    numer = {"CkZ": ckz_rate_numerator, "CkS": cks_rate_numerator}[kind](n)
    return numer / math.log2(TARGET_LOG[target])


def appendix_table(alpha: int = 2, sizes=TABLE_SIZES) -> list:
    """Six families of rate bounds over ``sizes`` followed by the four headline rows."""
    a = _check_alpha(alpha)
    rows = []
    for kind in ("CkZ", "CkS"):
        for target in TABLE_TARGETS:
            for n in sizes:
                rep = bound_report((kind, n), target, a)
                if a == 2:
                    rep.formula_value = symbolic_rate(kind, target, n)
                if kind == "CkZ" and target == "CCZ":
                    rep.backward_bound = n / 3
                rows.append(rep)
    for source, target in HEADLINE:
        rep = bound_report(source, target, a)
        rep.rounded_up = round_up(rep.rate_bound)
        if parse_family(source)[0] == "CkZ":
            rep.backward_bound = parse_family(source)[1] / 3
        rows.append(rep)
    return rows


def format_table(rows) -> str:
    head = f"{'source':>7} {'target':>6} {'rate':>14} {'prob':>14} {'round-up':>8}  purities"
    lines = [head]
    for r in rows:
        up = "" if r.rounded_up is None else f"{r.rounded_up:.1f}"
        pur = f"{r.exact_rationals['P_source']} | {r.exact_rationals['P_target']}"
        lines.append(f"{r.source:>7} {r.target:>6} {r.rate_bound:14.10f} {r.prob_bound:14.10f} {up:>8}  {pur}")
    return "\n".join(lines)
