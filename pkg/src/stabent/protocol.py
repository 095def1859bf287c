"""Interpreter for stabilizer protocols with exhaustive branching.

A program is a list of elementary steps: Clifford circuits, computational
basis measurements (optionally conditioning sub-programs on the outcome),
partial traces, |0> ancilla appends and classical random splits. Running a
program on a state returns every outcome branch with its probability.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .pauli import (
    CliffordCircuit,
    DensityState,
    PureState,
    apply_clifford,
    apply_clifford_density,
    normalize_gate,
    state_from_json,
)

log = logging.getLogger(__name__)

DROP_THRESHOLD = 1e-12
MERGE_TOL = 1e-12

State = Union[PureState, DensityState]


class ProtocolError(ValueError):
    pass


# --------------------------------------------------------------------------
# program representation


@dataclass(frozen=True)
class ProtocolProgram:
    steps: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True)
class CliffordStep:
    circuit: CliffordCircuit


@dataclass(frozen=True)
class MeasureStep:
    qubit: int
    keep_post_measurement: bool = False
    then_branch: ProtocolProgram = field(default_factory=ProtocolProgram)
    else_branch: ProtocolProgram = field(default_factory=ProtocolProgram)


@dataclass(frozen=True)
class TraceOutStep:
    qubit: int


@dataclass(frozen=True)
class AppendZeroStep:
    count: int = 1


@dataclass(frozen=True)
class RandomSplitStep:
    p: float
    branch_a: ProtocolProgram = field(default_factory=ProtocolProgram)
    branch_b: ProtocolProgram = field(default_factory=ProtocolProgram)


def _program(obj) -> ProtocolProgram:
    return obj if isinstance(obj, ProtocolProgram) else ProtocolProgram(tuple(obj))


def output_width(program, num_qubits: int, _path: str = "") -> int:
    """Qubit count after running ``program``; raises ProtocolError if ill-typed."""
    n = num_qubits
    for i, step in enumerate(_program(program).steps):
        where = f"{_path}step {i}"
        try:
            n = _step_width(step, n, where)
        except ProtocolError:
            raise
        except (ValueError, IndexError, TypeError) as exc:
            raise ProtocolError(f"{where}: {exc}") from exc
    return n


def _step_width(step, n: int, where: str) -> int:
    if isinstance(step, CliffordStep):
        step.circuit.validate(n)
        return n
    if isinstance(step, AppendZeroStep):
        if step.count < 0:
            raise ProtocolError(f"{where}: negative append count")
        return n + step.count
    if isinstance(step, (TraceOutStep, MeasureStep)):
        if not 0 <= step.qubit < n:
            raise ProtocolError(f"{where}: qubit {step.qubit} out of range for {n} qubits")
        if isinstance(step, TraceOutStep):
            if n == 1:
                raise ProtocolError(f"{where}: cannot trace out the last qubit")
            return n - 1
        m = n if step.keep_post_measurement else n - 1
        if m == 0:
            raise ProtocolError(f"{where}: discarding the last qubit")
        a = output_width(step.then_branch, m, f"{where} > then > ")
        b = output_width(step.else_branch, m, f"{where} > else > ")
        if a != b:
            raise ProtocolError(f"{where}: branches end on {a} and {b} qubits")
        return a
    if isinstance(step, RandomSplitStep):
        if not 0.0 < step.p < 1.0:
            raise ProtocolError(f"{where}: split probability {step.p} not in (0, 1)")
        a = output_width(step.branch_a, n, f"{where} > a > ")
        b = output_width(step.branch_b, n, f"{where} > b > ")
        if a != b:
            raise ProtocolError(f"{where}: branches end on {a} and {b} qubits")
        return a
    raise ProtocolError(f"{where}: unknown step {step!r}")


# --------------------------------------------------------------------------
# JSON script format


def step_from_json(obj: dict):
    op = obj.get("op")
    if op == "clifford":
        return CliffordStep(CliffordCircuit(tuple(normalize_gate(g) for g in obj.get("gates", []))))
    if op == "measure":
        return MeasureStep(
            int(obj["qubit"]),
            bool(obj.get("keep", False)),
            program_from_json(obj.get("then", [])),
            program_from_json(obj.get("else", [])),
        )
    if op == "trace_out":
        return TraceOutStep(int(obj["qubit"]))
    if op == "append_zero":
        return AppendZeroStep(int(obj.get("count", 1)))
    if op == "random_split":
        return RandomSplitStep(
            float(obj["p"]), program_from_json(obj.get("a", [])), program_from_json(obj.get("b", []))
        )
    raise ProtocolError(f"unknown op {op!r}")


def program_from_json(items) -> ProtocolProgram:
    if not isinstance(items, list):
        raise ProtocolError("a protocol script must be a JSON array of steps")
    steps = []
    for i, obj in enumerate(items):
        try:
            steps.append(step_from_json(obj))
        except ProtocolError as exc:
            raise ProtocolError(f"step {i}: {exc}") from exc
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ProtocolError(f"step {i}: malformed step {obj!r} ({exc})") from exc
    return ProtocolProgram(tuple(steps))


def program_to_json(program) -> list:
    out = []
    for step in _program(program).steps:
        if isinstance(step, CliffordStep):
            out.append({"op": "clifford", "gates": step.circuit.to_json()})
        elif isinstance(step, MeasureStep):
            out.append(
                {
                    "op": "measure",
                    "qubit": step.qubit,
                    "keep": step.keep_post_measurement,
                    "then": program_to_json(step.then_branch),
                    "else": program_to_json(step.else_branch),
                }
            )
        elif isinstance(step, TraceOutStep):
            out.append({"op": "trace_out", "qubit": step.qubit})
        elif isinstance(step, AppendZeroStep):
            out.append({"op": "append_zero", "count": step.count})
        elif isinstance(step, RandomSplitStep):
            out.append(
                {
                    "op": "random_split",
                    "p": step.p,
                    "a": program_to_json(step.branch_a),
                    "b": program_to_json(step.branch_b),
                }
            )
    return out


# --------------------------------------------------------------------------
# collections


@dataclass
class StateCollection:
    entries: list
    renormalized: bool = False
    dropped_weight: float = 0.0

    def __post_init__(self):
        self.entries = [(float(w), s) for w, s in self.entries]
        total = sum(w for w, _ in self.entries)
        if not self.entries or abs(total - 1.0) > 1e-9:
            raise ValueError(f"collection weights sum to {total!r}")
        if any(w <= 0 for w, _ in self.entries):
            raise ValueError("collection weights must be positive")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.entries])

    @property
    def states(self) -> list:
        return [s for _, s in self.entries]

    def all_pure(self) -> bool:
        return all(isinstance(s, PureState) for _, s in self.entries)

    @classmethod
    def of(cls, state) -> "StateCollection":
        if isinstance(state, StateCollection):
            return state
        return cls([(1.0, state)])


def collection_to_json(coll: StateCollection) -> dict:
    return {
        "collection": [{"weight": w, "state": s.to_json()} for w, s in coll.entries],
        "renormalized": coll.renormalized,
        "dropped_weight": coll.dropped_weight,
    }


def collection_from_json(obj) -> StateCollection:
    """Accepts a collection payload or a bare pure/density state payload."""
    if "collection" not in obj:
        return StateCollection.of(state_from_json(obj))
    return StateCollection([(e["weight"], state_from_json(e["state"])) for e in obj["collection"]])


def is_deterministic_pure(result: StateCollection, tol: float = 1e-9) -> bool:
    if len(result.entries) != 1:
        return False
    w, s = result.entries[0]
    if abs(w - 1.0) > tol:
        return False
    if isinstance(s, PureState):
        return True
    return s.max_eigenvalue() >= 1.0 - tol


# --------------------------------------------------------------------------
# elementary operations on a single state


def _split_pure(psi: PureState, q: int, keep: bool):
    n = psi.num_qubits
    t = psi.amplitudes.reshape(1 << q, 2, 1 << (n - q - 1))
    out = []
    for i in (0, 1):
        block = t[:, i, :]
        p = float(np.vdot(block, block).real)
        if keep:
            v = np.zeros_like(t)
            v[:, i, :] = block
        else:
            v = block
        out.append((p, v.reshape(-1)))
    return out


def _split_density(rho: DensityState, q: int, keep: bool):
    n = rho.num_qubits
    a, b = 1 << q, 1 << (n - q - 1)
    t = rho.matrix.reshape(a, 2, b, a, 2, b)
    out = []
    for i in (0, 1):
        block = t[:, i, :, :, i, :]
        if keep:
            v = np.zeros_like(t)
            v[:, i, :, :, i, :] = block
            m = v.reshape(rho.dim, rho.dim)
        else:
            m = block.reshape(a * b, a * b)
        out.append((float(np.trace(m).real), m))
    return out


def _normalized(obj, p: float, density: bool) -> State:
    if density:
        return DensityState(obj / p)
    return PureState.from_vector(obj)


def _measure(state: State, q: int, keep: bool):
    if isinstance(state, PureState):
        return [(p, _normalized(v, p, False) if p > 0 else None) for p, v in _split_pure(state, q, keep)]
    return [(p, _normalized(m, p, True) if p > 0 else None) for p, m in _split_density(state, q, keep)]


def _partial_trace(rho: DensityState, q: int) -> DensityState:
    n = rho.num_qubits
    a, b = 1 << q, 1 << (n - q - 1)
    t = rho.matrix.reshape(a, 2, b, a, 2, b)
    m = np.einsum("ikjlkm->ijlm", t).reshape(a * b, a * b)
    return DensityState(m)


def _append_zero(state: State, count: int) -> State:
    if count == 0:
        return state
    e0 = np.zeros(1 << count)
    e0[0] = 1
    if isinstance(state, PureState):
        return PureState.from_vector(np.kron(state.amplitudes, e0))
    return DensityState(np.kron(state.matrix, np.outer(e0, e0)))


# --------------------------------------------------------------------------
# interpreter


class _Runner:
    def __init__(self, density: bool, rng):
        self.density = density
        self.rng = rng

    def run(self, program: ProtocolProgram, branches: list) -> list:
        for step in _program(program).steps:
            nxt = []
            for w, s in branches:
                nxt.extend(self.step(step, w, s))
            branches = nxt
        return branches

    def _choose(self, options):
        """In sampling mode keep one option drawn by probability."""
        if self.rng is None:
            return options
        probs = np.array([p for p, *_ in options], dtype=float)
        k = int(self.rng.choice(len(options), p=probs / probs.sum()))
        return [(1.0,) + tuple(options[k][1:])]

    def step(self, step, w: float, s: State) -> list:
        if isinstance(step, CliffordStep):
            if isinstance(s, PureState):
                return [(w, apply_clifford(s, step.circuit))]
            return [(w, apply_clifford_density(s, step.circuit))]
        if isinstance(step, AppendZeroStep):
            return [(w, _append_zero(s, step.count))]
        if isinstance(step, TraceOutStep):
            if isinstance(s, DensityState):
                return [(w, _partial_trace(s, step.qubit))]
            if self.density:
                return [(w, _partial_trace(s.density(), step.qubit))]
            # forgetful measurement keeps a pure decomposition of the reduced state
            outs = self._choose([(p, st) for p, st in _measure(s, step.qubit, False)])
            return [(w * p, st) for p, st in outs if st is not None]
        if isinstance(step, MeasureStep):
            outs = [
                (p, st, prog)
                for (p, st), prog in zip(
                    _measure(s, step.qubit, step.keep_post_measurement),
                    (step.then_branch, step.else_branch),
                )
            ]
            outs = self._choose(outs)
            res = []
            for p, st, prog in outs:
                if st is not None and w * p > 0:
                    res.extend(self.run(prog, [(w * p, st)]))
            return res
        if isinstance(step, RandomSplitStep):
            outs = self._choose([(step.p, step.branch_a), (1.0 - step.p, step.branch_b)])
            res = []
            for p, prog in outs:
                res.extend(self.run(prog, [(w * p, s)]))
            return res
        raise ProtocolError(f"unknown step {step!r}")


def _same_state(a: State, b: State) -> bool:
    if type(a) is not type(b) or a.dim != b.dim:
        return False
    if isinstance(a, PureState):
        return a.fidelity(b) >= 1.0 - MERGE_TOL
    return float(np.max(np.abs(a.matrix - b.matrix))) <= MERGE_TOL


def merge_equal(entries: list) -> list:
    """Merge branches holding the same state (pure states up to global phase)."""
    out: list = []
    for w, s in entries:
        for k, (w0, s0) in enumerate(out):
            if _same_state(s0, s):
                out[k] = (w0 + w, s0)
                break
        else:
            out.append((w, s))
    return out


def run_protocol(
    state,
    program,
    seed=None,
    *,
    sample: bool = False,
    density: bool = False,
    merge: bool = True,
    drop_threshold: float = DROP_THRESHOLD,
) -> StateCollection:
    """Run ``program`` on a state (or collection) and return all outcome branches.

    By default every measurement and random split is expanded exhaustively.
    ``sample=True`` follows a single path drawn with ``seed`` instead.
    ``density=True`` realises partial traces on pure branches as genuine
    reduced density matrices rather than a forgetful measurement.
    """
    program = _program(program)
    start = StateCollection.of(state)
    for _, s in start.entries:
        output_width(program, s.num_qubits)
    rng = np.random.default_rng(seed) if sample else None
    runner = _Runner(density, rng)
    branches = runner.run(program, list(start.entries))

    total = sum(w for w, _ in branches)
    if abs(total - 1.0) > 1e-9:
        log.warning("branch weights sum to %r before renormalisation", total)
    kept = [(w, s) for w, s in branches if w >= drop_threshold]
    if not kept:
        raise ProtocolError("every branch fell below the drop threshold")
    dropped = total - sum(w for w, _ in kept)
    renorm = len(kept) != len(branches)
    if renorm:
        log.info("dropped %d branch(es) of total weight %.3e", len(branches) - len(kept), dropped)
    ksum = sum(w for w, _ in kept)
    kept = [(w / ksum, s) for w, s in kept]
    if merge:
        kept = merge_equal(kept)
    return StateCollection(kept, renormalized=renorm, dropped_weight=dropped)


# --------------------------------------------------------------------------
# random programs


_PAULIS = ("X", "Y", "Z")


def _random_word(rng, n: int, length: int) -> CliffordCircuit:
    gates = []
    for _ in range(length):
        k = int(rng.integers(4 if n > 1 else 3))
        if k == 3:
            c, t = rng.choice(n, size=2, replace=False)
            gates.append(("CNOT", int(c), int(t)))
        elif k == 2:
            gates.append((_PAULIS[int(rng.integers(3))], int(rng.integers(n))))
        else:
            gates.append((("H", "S")[k], int(rng.integers(n))))
    return CliffordCircuit(tuple(gates))


def _random_branch(rng, n: int) -> ProtocolProgram:
    return ProtocolProgram(
        tuple(CliffordStep(_random_word(rng, n, int(rng.integers(1, 2 * n + 2)))) for _ in range(int(rng.integers(0, 3))))
    )


def random_protocol(n: int, depth: int, seed, max_qubits: int | None = None) -> ProtocolProgram:
    """Seeded random program mixing all elementary step kinds.

    ``depth`` top-level steps; conditional sub-programs are short Clifford
    words so every path keeps between 1 and ``max_qubits`` (default n + 2)
    qubits.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    cap = n + 2 if max_qubits is None else max_qubits
    rng = np.random.default_rng(seed)
    steps = []
    width = n
    for _ in range(depth):
        allowed = ["clifford", "random_split"]
        if width > 1:
            allowed += ["trace_out", "measure"]
        else:
            allowed += ["measure_keep"]
        if width < cap:
            allowed.append("append_zero")
        kind = allowed[int(rng.integers(len(allowed)))]
        if kind == "clifford":
            steps.append(CliffordStep(_random_word(rng, width, int(rng.integers(1, 4 * width + 2)))))
        elif kind == "append_zero":
            cnt = int(rng.integers(1, cap - width + 1))
            steps.append(AppendZeroStep(cnt))
            width += cnt
        elif kind == "trace_out":
            steps.append(TraceOutStep(int(rng.integers(width))))
            width -= 1
        elif kind in ("measure", "measure_keep"):
            keep = kind == "measure_keep" or bool(rng.integers(2))
            m = width if keep else width - 1
            steps.append(
                MeasureStep(int(rng.integers(width)), keep, _random_branch(rng, m), _random_branch(rng, m))
            )
            width = m
        else:
            p = float(rng.uniform(0.05, 0.95))
            steps.append(RandomSplitStep(p, _random_branch(rng, width), _random_branch(rng, width)))
    return ProtocolProgram(tuple(steps))


def injection_program() -> ProtocolProgram:
    """T-gate injection on two qubits: qubit 0 holds |T>, qubit 1 the data.

    CNOT(data -> magic), measure the magic qubit and discard it; outcome 1
    applies the Phase correction, leaving T|data> on the remaining qubit.
    """
    return ProtocolProgram(
        (
            CliffordStep(CliffordCircuit((("CNOT", 1, 0),))),
            MeasureStep(0, False, ProtocolProgram(), ProtocolProgram((CliffordStep(CliffordCircuit((("S", 0),))),))),
        )
    )
