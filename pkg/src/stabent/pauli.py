"""Dense states, Pauli labels, Clifford gates and the Pauli spectrum.

Basis ordering is lexicographic in b = b_1...b_n with qubit 0 the most
significant bit, so qubit q corresponds to tensor axis q after reshaping an
amplitude vector to shape (2,) * n.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import kernels

MAX_QUBITS = 13
NORM_TOL = 1e-10
EIG_CUTOFF = 1e-10


class ResourceError(ValueError):
    """Requested computation exceeds the configured size limits."""


def _num_qubits_for(length: int) -> int:
    n = int(length).bit_length() - 1
    if length < 2 or (1 << n) != length:
        raise ValueError(f"vector length {length} is not a power of two >= 2")
    return n


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        _num_qubits_for(amps.size)
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalised (|psi|^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vec) -> "PureState":
        """Build a state from an arbitrary nonzero vector, normalising it."""
        vec = np.asarray(vec, dtype=np.complex128).reshape(-1)
        nrm = np.linalg.norm(vec)
        if nrm == 0:
            raise ValueError("zero vector")
        return cls(vec / nrm)

    @property
    def num_qubits(self) -> int:
        return _num_qubits_for(self.amplitudes.size)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def tensor(self, other: "PureState") -> "PureState":
        return PureState.from_vector(np.kron(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "PureState") -> float:
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)

    def density(self) -> "DensityState":
        a = self.amplitudes
        return DensityState(np.outer(a, a.conj()))

    def to_json(self) -> dict:
        return {
            "n": self.num_qubits,
            "amplitudes": [[float(c.real), float(c.imag)] for c in self.amplitudes],
        }

    @classmethod
    def from_json(cls, obj) -> "PureState":
        if isinstance(obj, str):
            obj = json.loads(obj)
        n = int(obj["n"])
        amps = np.array([complex(re, im) for re, im in obj["amplitudes"]], dtype=np.complex128)
        if amps.size != 1 << n:
            raise ValueError(f"expected {1 << n} amplitudes for n={n}, got {amps.size}")
        return cls(amps)


@dataclass(frozen=True, eq=False)
class DensityState:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        _num_qubits_for(m.shape[0])
        if np.max(np.abs(m - m.conj().T)) > NORM_TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > NORM_TOL:
            raise ValueError(f"density matrix has trace {tr!r}")
        m = 0.5 * (m + m.conj().T)
        object.__setattr__(self, "matrix", m)
        if self.eigenvalues_all[0] < -NORM_TOL:
            raise ValueError("density matrix is not positive semidefinite")

    @property
    def num_qubits(self) -> int:
        return _num_qubits_for(self.matrix.shape[0])

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def eigenvalues_all(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    @cached_property
    def eigen_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """(eigenvalues, eigenvectors as columns) above the rank cutoff, descending."""
        w, v = np.linalg.eigh(self.matrix)
        keep = w > EIG_CUTOFF
        w, v = w[keep][::-1], v[:, keep][:, ::-1]
        return w, v

    @property
    def rank(self) -> int:
        return int(self.eigen_pairs[0].size)

    def max_eigenvalue(self) -> float:
        return float(self.eigenvalues_all[-1])

    def to_json(self) -> dict:
        return {
            "n": self.num_qubits,
            "matrix": [[[float(c.real), float(c.imag)] for c in row] for row in self.matrix],
        }

    @classmethod
    def from_json(cls, obj) -> "DensityState":
        if isinstance(obj, str):
            obj = json.loads(obj)
        n = int(obj["n"])
        m = np.array([[complex(re, im) for re, im in row] for row in obj["matrix"]], dtype=np.complex128)
        if m.shape != (1 << n, 1 << n):
            raise ValueError(f"expected a {1 << n}x{1 << n} matrix for n={n}, got {m.shape}")
        return cls(m)


def state_from_json(obj):
    """PureState for ``amplitudes`` payloads, DensityState for ``matrix`` payloads."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if "amplitudes" in obj:
        return PureState.from_json(obj)
    if "matrix" in obj:
        return DensityState.from_json(obj)
    raise ValueError("state JSON needs an 'amplitudes' or 'matrix' field")


# --------------------------------------------------------------------------
# Pauli labels


_LETTERS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {v: k for k, v in _LETTERS.items()}


@dataclass(frozen=True)
class PauliLabel:
    """Hermitian Pauli i^{x.z} X^x Z^z; bit (n-1-q) of x, z belongs to qubit q."""

    num_qubits: int
    x_bits: int
    z_bits: int

    def __post_init__(self):
        lim = 1 << self.num_qubits
        if not (0 <= self.x_bits < lim and 0 <= self.z_bits < lim):
            raise ValueError("Pauli bits out of range")

    @classmethod
    def from_string(cls, s: str) -> "PauliLabel":
        x = z = 0
        for ch in s.upper():
            xb, zb = _BITS[ch]
            x = (x << 1) | xb
            z = (z << 1) | zb
        return cls(len(s), x, z)

    @classmethod
    def from_index(cls, num_qubits: int, index: int) -> "PauliLabel":
        d = 1 << num_qubits
        return cls(num_qubits, index // d, index % d)

    @property
    def index(self) -> int:
        return self.x_bits * (1 << self.num_qubits) + self.z_bits

    def __str__(self):
        n = self.num_qubits
        return "".join(
            _LETTERS[((self.x_bits >> (n - 1 - q)) & 1, (self.z_bits >> (n - 1 - q)) & 1)]
            for q in range(n)
        )


_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(p: PauliLabel | str) -> np.ndarray:
    """Dense matrix by Kronecker products. Only for small n (oracle use)."""
    s = str(p) if isinstance(p, PauliLabel) else p.upper()
    out = np.ones((1, 1), dtype=complex)
    for ch in s:
        out = np.kron(out, _PAULI_1Q[ch])
    return out


def pauli_expectation(state: PureState, p: PauliLabel) -> float:
    if p.num_qubits != state.num_qubits:
        raise ValueError(
            f"Pauli acts on {p.num_qubits} qubits but state has {state.num_qubits}"
        )
    psi = state.amplitudes
    j = np.arange(psi.size)
    signs = 1 - 2 * (kernels.popcount(j & p.z_bits) % 2)
    raw = np.vdot(psi[j ^ p.x_bits], signs * psi)
    val = raw * (1j) ** (int(kernels.popcount(p.x_bits & p.z_bits)) % 4)
    if abs(val.imag) > 1e-10:
        raise ArithmeticError(f"non-real Pauli expectation (imag {val.imag!r})")
    return float(val.real)


# --------------------------------------------------------------------------
# characteristic spectrum


@dataclass(frozen=True, eq=False)
class CharSpectrum:
    """Characteristic distribution xi[P] = tr^2(P psi) / 2^n, flat index x * 2^n + z."""

    num_qubits: int
    xi: np.ndarray

    def __getitem__(self, p: PauliLabel | str) -> float:
        if isinstance(p, str):
            p = PauliLabel.from_string(p)
        return float(self.xi[p.index])

    def nonzero(self, tol: float = 1e-14) -> dict[str, float]:
        idx = np.flatnonzero(self.xi > tol)
        return {str(PauliLabel.from_index(self.num_qubits, int(i))): float(self.xi[i]) for i in idx}


def check_size(n: int, max_qubits: int = MAX_QUBITS):
    if n > max_qubits:
        raise ResourceError(
            f"{n} qubits exceeds the limit of {max_qubits}: the Pauli spectrum "
            f"has 4^{n} = {4**n} entries"
        )


def char_spectrum(state: PureState, max_qubits: int = MAX_QUBITS, backend=None) -> CharSpectrum:
    n = state.num_qubits
    check_size(n, max_qubits)
    sq = kernels.squared_expectations(state.amplitudes, backend=backend)
    return CharSpectrum(n, (sq / state.dim).reshape(-1))


def naive_char_spectrum(state: PureState) -> CharSpectrum:
    """O(8^n) reference: builds every Pauli matrix explicitly."""
    n = state.num_qubits
    if n > 6:
        raise ResourceError("naive spectrum is limited to n <= 6")
    psi = state.amplitudes
    d = psi.size
    xi = np.empty(d * d)
    for i in range(d * d):
        mat = pauli_matrix(PauliLabel.from_index(n, i))
        xi[i] = np.vdot(psi, mat @ psi).real ** 2 / d
    return CharSpectrum(n, xi)


# --------------------------------------------------------------------------
# Clifford circuits

GATE_ARITY = {"H": 1, "S": 1, "X": 1, "Y": 1, "Z": 1, "CNOT": 2}
_ALIASES = {"HADAMARD": "H", "PHASE": "S", "CX": "CNOT", "PAULIX": "X", "PAULIY": "Y", "PAULIZ": "Z"}

_GATE_1Q = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "X": _PAULI_1Q["X"],
    "Y": _PAULI_1Q["Y"],
    "Z": _PAULI_1Q["Z"],
}


def normalize_gate(gate: Sequence) -> tuple:
    if not gate:
        raise ValueError("empty gate")
    name = str(gate[0]).upper()
    name = _ALIASES.get(name, name)
    if name not in GATE_ARITY:
        raise ValueError(f"unknown gate {gate[0]!r}")
    qubits = tuple(int(q) for q in gate[1:])
    if len(qubits) != GATE_ARITY[name]:
        raise ValueError(f"gate {name} takes {GATE_ARITY[name]} qubit(s), got {len(qubits)}")
    if name == "CNOT" and qubits[0] == qubits[1]:
        raise ValueError("CNOT control and target coincide")
    return (name,) + qubits


@dataclass(frozen=True)
class CliffordCircuit:
    gates: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(normalize_gate(g) for g in self.gates))

    @property
    def width(self) -> int:
        """Smallest qubit count the circuit can act on."""
        return max((max(g[1:]) + 1 for g in self.gates), default=0)

    def validate(self, num_qubits: int):
        for i, g in enumerate(self.gates):
            for q in g[1:]:
                if not 0 <= q < num_qubits:
                    raise IndexError(f"gate {i} {g} addresses qubit {q} of {num_qubits}")

    def to_json(self) -> list:
        return [list(g) for g in self.gates]


def apply_gate_tensor(t: np.ndarray, gate: tuple, offset: int = 0, conj: bool = False) -> np.ndarray:
    """Apply one gate to the tensor axes ``offset + q`` of ``t`` (returns a new array)."""
    name = gate[0]
    if name == "CNOT":
        c, tg = offset + gate[1], offset + gate[2]
        out = t.copy()
        sel = [slice(None)] * t.ndim
        sel[c] = 1
        sub = t[tuple(sel)]
        # target axis index shifts down by one if it sits after the removed control axis
        ta = tg - 1 if tg > c else tg
        out[tuple(sel)] = np.flip(sub, axis=ta)
        return out
    u = _GATE_1Q[name]
    if conj:
        u = u.conj()
    ax = offset + gate[1]
    return np.moveaxis(np.tensordot(u, t, axes=([1], [ax])), 0, ax)


def apply_clifford(state: PureState, circuit: CliffordCircuit) -> PureState:
    n = state.num_qubits
    circuit.validate(n)
    t = state.amplitudes.reshape((2,) * n)
    for g in circuit.gates:
        t = apply_gate_tensor(t, g)
    return PureState.from_vector(t.reshape(-1))


def apply_clifford_density(rho: DensityState, circuit: CliffordCircuit) -> DensityState:
    n = rho.num_qubits
    circuit.validate(n)
    t = rho.matrix.reshape((2,) * (2 * n))
    for g in circuit.gates:
        t = apply_gate_tensor(t, g)
        t = apply_gate_tensor(t, g, offset=n, conj=True)
    d = 1 << n
    return DensityState(t.reshape(d, d))


def random_clifford(n: int, seed: int, length: int | None = None) -> CliffordCircuit:
    """Seeded gate word of length 20 n, uniform over {H, S, CNOT} and qubits."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    kinds = ("H", "S", "CNOT") if n > 1 else ("H", "S")
    gates = []
    for _ in range(20 * n if length is None else length):
        k = kinds[rng.integers(len(kinds))]
        if k == "CNOT":
            c, t = rng.choice(n, size=2, replace=False)
            gates.append(("CNOT", int(c), int(t)))
        else:
            gates.append((k, int(rng.integers(n))))
    return CliffordCircuit(tuple(gates))


# --------------------------------------------------------------------------
# named states


def t_state() -> PureState:
    return PureState(np.array([1, np.exp(1j * np.pi / 4)]) / np.sqrt(2))


def _and_of_bits(m: int) -> np.ndarray:
    return (np.arange(1 << m) == (1 << m) - 1).astype(int)


def ckz_state(m: int) -> PureState:
    """|C^{m-1}Z> with amplitudes 2^{-m/2} (-1)^{b_1...b_m}."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return PureState((-1.0) ** _and_of_bits(m) / np.sqrt(1 << m))


def cks_state(m: int) -> PureState:
    """|C^{m-1}S> with amplitudes 2^{-m/2} i^{b_1...b_m}."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return PureState((1j) ** _and_of_bits(m) / np.sqrt(1 << m))


def zero_state(n: int) -> PureState:
    v = np.zeros(1 << n, dtype=complex)
    v[0] = 1
    return PureState(v)


def haar_state(n: int, seed) -> PureState:
    rng = np.random.Generator(np.random.PCG64(seed))
    d = 1 << n
    return PureState.from_vector(rng.standard_normal(d) + 1j * rng.standard_normal(d))


def make_named_state(name: str, *params) -> PureState:
    """Named constructors: T, CkZ(m), CkS(m), zeros(n), haar(n, seed).

    A single string ``"ckz:4"`` style shorthand is also understood, as are
    ``cs`` (= CkS(2)), ``ccz`` (= CkZ(3)) and ``plus``.
    """
    if not params and ":" in name:
        head, *rest = name.split(":")
        return make_named_state(head, *(int(r) for r in rest))
    key = name.lower()
    if key == "t":
        return t_state()
    if key == "plus":
        return PureState(np.ones(2) / np.sqrt(2))
    if key == "cs":
        return cks_state(2)
    if key == "ccz":
        return ckz_state(3)
    if key == "ckz":
        return ckz_state(*params)
    if key == "cks":
        return cks_state(*params)
    if key in ("zeros", "zero"):
        return zero_state(*params)
    if key == "haar":
        return haar_state(*params)
    raise ValueError(f"unknown named state {name!r}")
