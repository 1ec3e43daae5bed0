"""Dense complex Hermitian linear algebra.

The eigensolver is a cyclic Jacobi method in round-robin (parallel) ordering:
each round rotates ``d // 2`` disjoint index pairs at once, so a sweep costs
``d - 1`` vectorised row/column updates. All matrix functions (powers,
logarithms, projectors) are evaluated on the spectrum, with eigenvalues below
the rank threshold treated as exact zeros.

Matrices whose exact-zero pattern splits into independent blocks are
diagonalised block by block. The rank threshold is then relative to the block
an eigenvalue belongs to, because the rotations of one block never touch
another and its rounding error scales with its own norm. This makes every
spectral function additive over direct sums.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .config import get_tolerances
from .errors import DimensionMismatch, InvalidState, NoConvergence, NotHermitian, NotPSD


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # ascending, real
    eigenvectors: np.ndarray  # columns are orthonormal eigenvectors
    rank: int
    scales: np.ndarray | None = None  # per eigenvalue: largest |lambda| of its block


def as_matrix(a) -> np.ndarray:
    m = np.array(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidState("matrix has non-finite entries")
    return m


def _square(a) -> np.ndarray:
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def hermitian_defect(a) -> float:
    """max |a_ij - conj(a_ji)|."""
    m = _square(a)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def hermitian_part(a) -> np.ndarray:
    m = _square(a)
    return 0.5 * (m + m.conj().T)


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # Tournament schedule; index n (when n is odd) is a bye.
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


_SCHEDULES: dict[int, list[tuple[np.ndarray, np.ndarray]]] = {}


def _schedule(n: int):
    if n not in _SCHEDULES:
        _SCHEDULES[n] = _round_robin(n)
    return _SCHEDULES[n]


def _jacobi(h: np.ndarray, tol: float, max_sweeps: int) -> tuple[np.ndarray, np.ndarray]:
    n = h.shape[0]
    a = h.copy()
    v = np.eye(n, dtype=complex)
    scale = np.linalg.norm(a)
    if n == 1 or scale == 0.0:
        return a.diagonal().real.copy(), v
    offmask = ~np.eye(n, dtype=bool)
    threshold = tol * scale
    schedule = _schedule(n)
    eye = np.eye(n, dtype=complex)
    for _ in range(max_sweeps):
        if np.sqrt(np.sum(np.abs(a[offmask]) ** 2)) <= threshold:
            return a.diagonal().real.copy(), v
        for p, q in schedule:
            apq = a[p, q]
            mod = np.abs(apq)
            if not mod.any():
                continue
            active = mod > 0.0
            safe = np.where(active, mod, 1.0)
            phase = np.where(active, apq / safe, 1.0)
            theta = (a[q, q].real - a[p, p].real) / (2.0 * safe)
            big = np.abs(theta) > 1e150
            theta = np.where(big, 1e150 * np.sign(theta), theta)
            t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # block rotation: G[p,p]=c, G[p,q]=s, G[q,p]=-s*conj(e), G[q,q]=c*conj(e)
            g = eye.copy()
            pc = phase.conj()
            g[p, p] = c
            g[p, q] = s
            g[q, p] = -s * pc
            g[q, q] = c * pc
            a = g.conj().T @ a @ g
            a[p, q] = 0.0
            a[q, p] = 0.0
            v = v @ g
    if np.sqrt(np.sum(np.abs(a[offmask]) ** 2)) <= threshold:
        return a.diagonal().real.copy(), v
    raise NoConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def _blockwise_jacobi(m: np.ndarray, tol: float, max_sweeps: int):
    """Run Jacobi separately on each block of the exact-zero sparsity pattern.

    Returns eigenvalues, eigenvectors and, per eigenvalue, the largest
    absolute eigenvalue of its block.
    """
    n = m.shape[0]
    ncomp, labels = connected_components(csr_matrix(m != 0), directed=False)
    if ncomp == 1:
        w, v = _jacobi(m, tol, max_sweeps)
        return w, v, np.full(n, np.max(np.abs(w)) if n else 0.0)
    w = np.empty(n)
    scales = np.empty(n)
    v = np.zeros((n, n), dtype=complex)
    for c in range(ncomp):
        idx = np.flatnonzero(labels == c)
        if idx.size == 1:
            w[idx[0]] = m[idx[0], idx[0]].real
            v[idx[0], idx[0]] = 1.0
        else:
            wb, vb = _jacobi(m[np.ix_(idx, idx)], tol, max_sweeps)
            w[idx] = wb
            v[np.ix_(idx, idx)] = vb
        scales[idx] = np.max(np.abs(w[idx]))
    return w, v, scales


def eigh(h, *, check: bool = True) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    The input is symmetrised as ``(H + H^dag) / 2`` after the Hermiticity check.
    Eigenvalues are returned in ascending order; ``rank`` counts eigenvalues
    above ``rank_tol`` times the largest ``|lambda|`` of their block.
    """
    tol = get_tolerances()
    m = _square(h)
    if check and hermitian_defect(m) > tol.herm:
        raise NotHermitian(f"Hermiticity defect {hermitian_defect(m):.3e} exceeds {tol.herm:.1e}")
    m = 0.5 * (m + m.conj().T)
    w, v, scales = _blockwise_jacobi(m, tol.jacobi_offdiag, tol.jacobi_max_sweeps)
    order = np.argsort(w, kind="stable")
    w, v, scales = w[order], v[:, order], scales[order]
    rank = int(np.count_nonzero((w > tol.rank * scales) & (w > 0)))
    return EigenDecomposition(w, v, rank, scales)


def _decomposition(a) -> EigenDecomposition:
    if isinstance(a, DensityMatrix):
        return a.eig
    return eigh(a)


def _psd_spectrum(e: EigenDecomposition) -> tuple[np.ndarray, np.ndarray]:
    """Spectrum with the rank threshold applied; returns (values, support mask)."""
    tol = get_tolerances()
    w = e.eigenvalues
    top = float(w[-1]) if w.size else 0.0
    if w.size and w[0] < -tol.psd * max(1.0, top):
        raise NotPSD(f"smallest eigenvalue {w[0]:.3e} is significantly negative")
    scales = e.scales if e.scales is not None else np.full(w.shape, top)
    support = (w > tol.rank * scales) & (w > 0)
    return np.where(support, w, 0.0), support


def spectral_function(a, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """V f(lambda) V^dag for PSD ``a``, with f applied on the support only."""
    e = _decomposition(a)
    w, support = _psd_spectrum(e)
    fw = np.zeros_like(w)
    fw[support] = f(w[support])
    v = e.eigenvectors
    return (v * fw) @ v.conj().T


def matrix_power(a, alpha: float) -> np.ndarray:
    """PSD matrix power taken on the support.

    Eigenvalues below the rank threshold map to zero for every exponent,
    including negative ones (the generalised-inverse convention), and the
    exponent 0 yields the support projector.
    """
    alpha = float(alpha)
    if not np.isfinite(alpha):
        raise ValueError("exponent must be finite")
    return spectral_function(a, lambda w: w**alpha)


def matrix_log(a) -> np.ndarray:
    """Natural logarithm on the support (zero on the kernel)."""
    return spectral_function(a, np.log)


def support_projector(a) -> np.ndarray:
    return spectral_function(a, np.ones_like)


def range_contained(a, b) -> bool:
    """True iff ran(a) is contained in ran(b), both PSD."""
    ma = a.matrix if isinstance(a, DensityMatrix) else _square(a)
    mb_dim = b.dim if isinstance(b, DensityMatrix) else _square(b).shape[0]
    if ma.shape[0] != mb_dim:
        raise DimensionMismatch(f"dimensions {ma.shape[0]} and {mb_dim} differ")
    comp = np.eye(mb_dim) - support_projector(b)
    leak = comp @ ma @ comp
    return float(np.max(np.abs(leak))) <= get_tolerances().range


class DensityMatrix:
    """Validated, immutable density matrix.

    Construction symmetrises the input and checks Hermiticity, unit trace and
    positivity; the eigendecomposition computed for the positivity check is
    kept on ``eig`` and reused by every spectral function.
    """

    __slots__ = ("matrix", "eig")

    def __init__(self, data):
        if isinstance(data, DensityMatrix):
            object.__setattr__(self, "matrix", data.matrix)
            object.__setattr__(self, "eig", data.eig)
            return
        tol = get_tolerances()
        m = _square(data)
        if m.shape[0] == 0:
            raise DimensionMismatch("empty matrix")
        defect = hermitian_defect(m)
        if defect > tol.herm:
            raise NotHermitian(f"Hermiticity defect {defect:.3e} exceeds {tol.herm:.1e}")
        m = 0.5 * (m + m.conj().T)
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > tol.trace:
            raise InvalidState(f"trace {tr!r} differs from 1")
        e = eigh(m, check=False)
        if e.eigenvalues[0] < -tol.psd:
            raise NotPSD(f"smallest eigenvalue {e.eigenvalues[0]:.3e} below -{tol.psd:.1e}")
        m.setflags(write=False)
        e.eigenvalues.setflags(write=False)
        e.eigenvectors.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "eig", e)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eig.eigenvalues

    def __array__(self, dtype=None, copy=None):
        return np.array(self.matrix, dtype=dtype)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim}, rank={self.eig.rank})"


def as_density(rho) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)


def purity(rho) -> float:
    """Tr(rho^2) computed from the spectrum."""
    w = as_density(rho).eigenvalues
    return float(np.sum(w * w))


def von_neumann_entropy(rho) -> float:
    """-Tr(rho ln rho), natural logarithm."""
    w, support = _psd_spectrum(as_density(rho).eig)
    p = w[support]
    return float(-np.sum(p * np.log(p)))
