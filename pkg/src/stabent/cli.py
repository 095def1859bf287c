"""Command-line front end: ``stabent <subcommand> ...``.

Exit codes: 0 success, 1 a verification suite failed, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

from . import _jit
from .bounds import appendix_table, bound_report, format_table
from .entropy import entropy_report, stabilizer_entropies
from .pauli import (
    MAX_QUBITS,
    DensityState,
    PauliLabel,
    PureState,
    ResourceError,
    char_spectrum,
    make_named_state,
)
from .protocol import (
    StateCollection,
    collection_from_json,
    collection_to_json,
    output_width,
    program_from_json,
    run_protocol,
)
from .roof import RoofOptions, collection_min_entropy, extended_entropy, extended_linear, extended_purity
from .verify import SUITES, run_suites


class UsageError(Exception):
    pass


def _alphas(text: str) -> list:
    try:
        vals = [float(a) for a in text.split(",") if a.strip()]
    except ValueError:
        raise UsageError(f"--alpha expects a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise UsageError("--alpha is empty")
    return [int(v) if v.is_integer() else v for v in vals]


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON ({exc})") from None
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None


def _load_input(args) -> StateCollection:
    if bool(args.state) == bool(args.state_file):
        raise UsageError("give exactly one of --state or --state-file")
    if args.state:
        return StateCollection.of(make_named_state(args.state))
    return collection_from_json(_read_json(args.state_file))


def _load_pure(args) -> PureState:
    coll = _load_input(args)
    if len(coll) != 1 or not isinstance(coll.states[0], PureState):
        raise UsageError("this command needs a single pure state")
    return coll.states[0]


def _emit(obj, args):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# --------------------------------------------------------------------------
# subcommands


def cmd_entropy(args) -> int:
    psi = _load_pure(args)
    lines = []
    for a in _alphas(args.alpha):
        rep = entropy_report(psi, a, max_qubits=args.max_qubits, backend=args.backend).to_json()
        rep["n"] = psi.num_qubits
        lines.append(json.dumps(rep, sort_keys=True))
    text = "\n".join(lines)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_spectrum(args) -> int:
    psi = _load_pure(args)
    t0 = time.perf_counter()
    spec = char_spectrum(psi, max_qubits=args.max_qubits, backend=args.backend)
    elapsed = time.perf_counter() - t0
    out = {
        "n": psi.num_qubits,
        "backend": args.backend or _jit.default_backend(),
        "support": int((spec.xi > args.threshold).sum()),
        "total": float(spec.xi.sum()),
    }
    if args.timing:
        out["seconds"] = elapsed
    if args.entries:
        n = psi.num_qubits
        flat = spec.xi.reshape(-1)
        out["entries"] = [
            [str(PauliLabel.from_index(n, int(i))), float(flat[i])] for i in range(flat.size) if flat[i] > args.threshold
        ]
    _emit(out, args)
    return 0


def _branch_monotones(state, alphas, restarts):
    if isinstance(state, PureState):
        return {str(a): v for a, v in stabilizer_entropies(state, alphas).items()}
    opts = RoofOptions(restarts=restarts)
    return {str(a): extended_entropy(state, a, opts).value for a in alphas if a >= 2}


def cmd_protocol(args) -> int:
    coll = _load_input(args)
    raw = _read_json(args.program) if args.program else []
    program = program_from_json(raw.get("steps", raw) if isinstance(raw, dict) else raw)
    for _, s in coll.entries:
        output_width(program, s.num_qubits)
    out_coll = run_protocol(coll, program, seed=args.seed, sample=args.sample, density=args.density)
    out = collection_to_json(out_coll)
    if args.report == "monotones":
        alphas = [float(a) for a in _alphas(args.alpha)]
        out["input_monotones"] = [_branch_monotones(s, alphas, args.restarts) for s in coll.states]
        for entry, (_, s) in zip(out["collection"], out_coll.entries):
            entry["monotones"] = _branch_monotones(s, alphas, args.restarts)
    _emit(out, args)
    return 0


_ROOF = {
    "purity": extended_purity,
    "entropy": extended_entropy,
    "linear": extended_linear,
    "min": collection_min_entropy,
}


def cmd_roof(args) -> int:
    coll = _load_input(args)
    opts = RoofOptions(restarts=args.restarts, m_max=args.m_max, max_iter=args.max_iter, seed=args.seed)
    for _, s in coll.entries:
        if isinstance(s, DensityState) and s.num_qubits > 8:
            raise ResourceError("convex-roof optimisation is limited to n <= 8")
    results = []
    for a in _alphas(args.alpha):
        if a < 2 or int(a) != a:
            raise UsageError("convex-roof quantities need integer alpha >= 2")
        results.append(_ROOF[args.quantity](coll, a, opts).to_json())
    _emit(results if len(results) > 1 else results[0], args)
    return 0


def cmd_bounds(args) -> int:
    alpha = int(args.alpha)
    if args.source or args.target:
        if not (args.source and args.target):
            raise UsageError("--source and --target go together")
        rows = [bound_report(args.source, args.target, alpha)]
    else:
        rows = appendix_table(alpha)
    if args.format == "text":
        text = format_table(rows)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text + "\n")
        else:
            print(text)
    else:
        _emit([r.to_json() for r in rows], args)
    return 0


def cmd_verify(args) -> int:
    names = "all" if args.suite == "all" else [s.strip() for s in args.suite.split(",") if s.strip()]
    for nm in [] if names == "all" else names:
        if nm not in SUITES:
            raise UsageError(f"unknown suite {nm!r}; choose from {', '.join(SUITES)} or all")
    reports = run_suites(names, trials=args.trials, seed=args.seed, alphas=_alphas(args.alpha))
    out = {"passed": all(r.passed for r in reports), "suites": [r.to_json() for r in reports]}
    _emit(out, args)
    return 0 if out["passed"] else 1


def cmd_state_gen(args) -> int:
    _emit(make_named_state(args.name).to_json(), args)
    return 0


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help="worker threads for parallel kernels")
    common.add_argument("--out", help="write JSON here instead of stdout")

    state = argparse.ArgumentParser(add_help=False)
    state.add_argument("--state", help="named state: T, cs, ccz, ckz:m, cks:m, zeros:n, plus, haar:n:seed")
    state.add_argument("--state-file", help="JSON state or collection file")

    kernel = argparse.ArgumentParser(add_help=False)
    kernel.add_argument("--backend", choices=("numba", "numpy"), default=None)
    kernel.add_argument("--max-qubits", type=int, default=MAX_QUBITS)

    p = argparse.ArgumentParser(prog="stabent", description="Stabilizer entropies and their monotonicity checks.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("entropy", parents=[common, state, kernel], help="stabilizer entropies of a pure state")
    s.add_argument("--alpha", default="2")
    s.set_defaults(func=cmd_entropy)

    s = sub.add_parser("spectrum", parents=[common, state, kernel], help="characteristic distribution")
    s.add_argument("--entries", action="store_true", help="list every entry above --threshold")
    s.add_argument("--threshold", type=float, default=1e-14)
    s.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identical output)")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("protocol", parents=[common, state], help="run a stabilizer protocol script")
    s.add_argument("--program", help="JSON protocol file (omit for the empty protocol)")
    s.add_argument("--report", choices=("branches", "monotones"), default="branches")
    s.add_argument("--alpha", default="2")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--sample", action="store_true", help="follow one sampled branch")
    s.add_argument("--density", action="store_true", help="keep traced-out states as density matrices")
    s.add_argument("--restarts", type=int, default=8, help="optimizer restarts for mixed branches")
    s.set_defaults(func=cmd_protocol)

    s = sub.add_parser("roof", parents=[common, state], help="convex-roof extended quantities")
    s.add_argument("--alpha", default="2")
    s.add_argument("--quantity", choices=sorted(_ROOF), default="entropy")
    s.add_argument("--restarts", type=int, default=32)
    s.add_argument("--m-max", type=int, default=None)
    s.add_argument("--max-iter", type=int, default=500)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_roof)

    s = sub.add_parser("bounds", parents=[common], help="conversion-rate bounds")
    s.add_argument("--alpha", type=int, default=2)
    s.add_argument("--source")
    s.add_argument("--target")
    s.add_argument("--format", choices=("json", "text"), default="json")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("verify", parents=[common], help="run certification suites")
    s.add_argument("--suite", default="all", help=f"comma list from {', '.join(SUITES)} or all")
    s.add_argument("--trials", type=int, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--alpha", default="2,3")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("state", help="state utilities")
    ssub = s.add_subparsers(dest="state_command", required=True)
    g = ssub.add_parser("gen", parents=[common], help="write a named state as JSON")
    g.add_argument("name")
    g.set_defaults(func=cmd_state_gen)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads:
        _jit.set_num_threads(args.threads)
    try:
        return args.func(args)
    except (UsageError, ValueError, KeyError, TypeError) as exc:
        print(f"stabent {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
