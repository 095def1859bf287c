"""Pauli-spectrum kernels.

Every Pauli operator on n qubits is labelled by two n-bit integers (x, z)
and the squared expectation ``<psi| X^x Z^z |psi>^2`` is obtained sector by
sector: for fixed x, ``v_j = conj(psi[j ^ x]) * psi[j]`` and a Walsh-Hadamard
transform of v over j yields the expectations for all 2^n values of z.
Cost is O(4^n n) time and O(2^n) scratch per sector.

Two interchangeable backends exist: numba (parallel over sectors) and plain
numpy (blocks of sectors vectorised). Both reduce with the same fixed
pairwise tree, so results do not depend on thread count.
"""
import numpy as np

from ._jit import HAVE_NUMBA, default_backend, njit, prange

# squared expectations at or below this are treated as zero for alpha = 0
SUPPORT_CUT = 1e-20
# characteristic-distribution entries below this drop out of the Shannon sum
SHANNON_CUT = 1e-300

_NP_BLOCK_ELEMS = 1 << 21


def _check_backend(backend):
    if backend is None:
        return default_backend()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is unavailable")
    return backend


def popcount(a):
    a = np.asarray(a, dtype=np.uint64)
    out = np.zeros(a.shape, dtype=np.int64)
    while np.any(a):
        out += (a & np.uint64(1)).astype(np.int64)
        a = a >> np.uint64(1)
    return out


def tree_sum(a):
    """Pairwise sum over the last axis (length must be a power of two)."""
    a = np.asarray(a)
    while a.shape[-1] > 1:
        h = a.shape[-1] // 2
        a = a[..., :h] + a[..., h:]
    return a[..., 0]


def fwht(a, axis=-1):
    """Unnormalised Walsh-Hadamard transform along ``axis`` (returns a copy)."""
    a = np.moveaxis(np.array(a, copy=True), axis, -1)
    n = a.shape[-1]
    lead = a.shape[:-1]
    h = 1
    while h < n:
        v = a.reshape(lead + (n // (2 * h), 2, h))
        lo = v[..., 0, :] + v[..., 1, :]
        hi = v[..., 0, :] - v[..., 1, :]
        v[..., 0, :] = lo
        v[..., 1, :] = hi
        h *= 2
    return np.moveaxis(a, -1, axis)


# --------------------------------------------------------------------------
# numba backend


@njit(cache=True)
def _fwht_nb(a):
    n = a.shape[0]
    h = 1
    while h < n:
        for i in range(0, n, 2 * h):
            for j in range(i, i + h):
                u = a[j]
                w = a[j + h]
                a[j] = u + w
                a[j + h] = u - w
        h *= 2


@njit(cache=True)
def _tree_sum_nb(buf):
    h = buf.shape[0] // 2
    while h >= 1:
        for i in range(h):
            buf[i] += buf[i + h]
        h //= 2
    return buf[0]


@njit(cache=True)
def _sector_nb(psi, x, buf, out):
    d = psi.shape[0]
    for j in range(d):
        buf[j] = np.conj(psi[j ^ x]) * psi[j]
    _fwht_nb(buf)
    for z in range(d):
        re = buf[z].real
        im = buf[z].imag
        out[z] = re * re + im * im


@njit(parallel=True, cache=True)
def _spectrum_nb(psi):
    d = psi.shape[0]
    res = np.empty((d, d), dtype=np.float64)
    for x in prange(d):
        buf = np.empty(d, dtype=np.complex128)
        _sector_nb(psi, x, buf, res[x])
    return res


@njit(parallel=True, cache=True)
def _moments_nb(psi, alphas, support_cut, shannon_cut):
    d = psi.shape[0]
    k = alphas.shape[0]
    part = np.empty((k, d), dtype=np.float64)
    for x in prange(d):
        buf = np.empty(d, dtype=np.complex128)
        sq = np.empty(d, dtype=np.float64)
        tmp = np.empty(d, dtype=np.float64)
        _sector_nb(psi, x, buf, sq)
        for a in range(k):
            alpha = alphas[a]
            if alpha == 1.0:
                for z in range(d):
                    xi = sq[z] / d
                    tmp[z] = -xi * np.log2(xi) if xi > shannon_cut else 0.0
            elif alpha == 0.0:
                for z in range(d):
                    tmp[z] = 1.0 if sq[z] > support_cut else 0.0
            elif alpha == 2.0:
                for z in range(d):
                    tmp[z] = sq[z] * sq[z]
            else:
                for z in range(d):
                    tmp[z] = sq[z] ** alpha
            part[a, x] = _tree_sum_nb(tmp)
    return part


# --------------------------------------------------------------------------
# numpy backend


def _sector_block_np(psi, xs):
    d = psi.shape[0]
    j = np.arange(d)
    v = np.conj(psi[j[None, :] ^ xs[:, None]]) * psi[None, :]
    w = fwht(v, axis=-1)
    return w.real * w.real + w.imag * w.imag


def _blocks(d):
    step = max(1, _NP_BLOCK_ELEMS // d)
    for start in range(0, d, step):
        yield np.arange(start, min(d, start + step))


def _spectrum_np(psi):
    d = psi.shape[0]
    res = np.empty((d, d), dtype=np.float64)
    for xs in _blocks(d):
        res[xs] = _sector_block_np(psi, xs)
    return res


def _moment_terms_np(sq, alpha, d):
    if alpha == 1.0:
        xi = sq / d
        out = np.zeros_like(xi)
        mask = xi > SHANNON_CUT
        out[mask] = -xi[mask] * np.log2(xi[mask])
        return out
    if alpha == 0.0:
        return (sq > SUPPORT_CUT).astype(np.float64)
    if alpha == 2.0:
        return sq * sq
    return sq**alpha


def _moments_np(psi, alphas):
    d = psi.shape[0]
    part = np.empty((len(alphas), d), dtype=np.float64)
    for xs in _blocks(d):
        sq = _sector_block_np(psi, xs)
        for a, alpha in enumerate(alphas):
            part[a, xs] = tree_sum(_moment_terms_np(sq, alpha, d))
    return part


# --------------------------------------------------------------------------
# public entry points


def squared_expectations(psi, backend=None):
    """All 4^n squared Pauli expectations as a (2^n, 2^n) array indexed [x, z]."""
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    if _check_backend(backend) == "numba":
        return _spectrum_nb(psi)
    return _spectrum_np(psi)


def spectrum_moments(psi, alphas, backend=None):
    """Reduced sums over all Paulis of f_alpha(tr^2(P psi)), one per alpha.

    f_alpha(s) = s**alpha, except alpha = 1 which returns the Shannon entropy
    (bits) of the characteristic distribution s / 2^n and alpha = 0 which
    counts the support. Nothing of size 4^n is materialised.
    """
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    alphas = np.asarray([float(a) for a in alphas], dtype=np.float64)
    if _check_backend(backend) == "numba":
        part = _moments_nb(psi, alphas, SUPPORT_CUT, SHANNON_CUT)
    else:
        part = _moments_np(psi, alphas)
    return tree_sum(part)


def hermitian_phase(d):
    """i^{popcount(x & z)} for the Hermitian representative of X^x Z^z."""
    idx = np.arange(d)
    pc = popcount(idx[:, None] & idx[None, :]) % 4
    return (1j) ** pc


def signed_expectations(states):
    """Real expectations <v|P|v> for a batch of (unnormalised) vectors.

    ``states`` has shape (B, d); returns (B, d, d) indexed [b, x, z] using the
    Hermitian Pauli convention. Intended for small d (optimiser inner loops).
    """
    states = np.atleast_2d(np.asarray(states, dtype=np.complex128))
    d = states.shape[-1]
    j = np.arange(d)
    v = np.conj(states[:, j[None, :] ^ j[:, None]]) * states[:, None, :]
    w = fwht(v, axis=-1) * hermitian_phase(d)[None]
    return w.real


def weighted_pauli_apply(coef, states):
    """Compute sum_P coef[b, P] * P @ states[b] for a batch.

    ``coef`` is (B, d, d) real indexed [b, x, z]; ``states`` is (B, d).
    Adjoint companion of :func:`signed_expectations`, used for gradients.
    """
    states = np.atleast_2d(np.asarray(states, dtype=np.complex128))
    d = states.shape[-1]
    # diagonal weights per x-sector: w_x(j) = sum_z c[x,z] i^{x.z} (-1)^{z.j}
    w = fwht(coef * hermitian_phase(d)[None], axis=-1)
    t = w * states[:, None, :]
    k = np.arange(d)
    src = k[None, :] ^ k[:, None]  # [x, k] -> k ^ x
    return t[:, np.arange(d)[:, None], src].sum(axis=1)
