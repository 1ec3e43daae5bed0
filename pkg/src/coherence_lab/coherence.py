"""Coherence quantifiers relative to a fixed orthonormal reference basis.

``coherence_alpha`` is the minimum of the Tsallis divergence D_alpha(rho || delta)
over states delta diagonal in the reference basis. The minimum has a closed
form in terms of the diagonal of rho^alpha; ``brute_force_coherence`` recomputes
it by direct search over the simplex and serves as an independent check.

Non-identity bases are handled by rotating rho into the basis frame
(``U^dag rho U``) and reusing the identity-basis code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import minimize

from .config import get_tolerances
from .divergence import AlphaParam, alpha_log, as_probability_vector
from .errors import AlphaOutOfRange, DimensionMismatch, DimensionTooLarge, InvalidState
from .linalg import DensityMatrix, _psd_spectrum, as_density, as_matrix, purity, von_neumann_entropy


@dataclass(frozen=True, eq=False)
class ReferenceBasis:
    """Orthonormal basis given by the columns of ``unitary``."""

    unitary: np.ndarray
    is_identity: bool = False

    def __post_init__(self):
        u = as_matrix(self.unitary)
        if u.shape[0] != u.shape[1]:
            raise DimensionMismatch(f"basis matrix must be square, got {u.shape}")
        if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > 1e-10:
            raise InvalidState("basis vectors are not orthonormal")
        u.setflags(write=False)
        object.__setattr__(self, "unitary", u)
        if not self.is_identity:
            object.__setattr__(self, "is_identity", bool(np.array_equal(u, np.eye(u.shape[0]))))

    @classmethod
    def identity(cls, dim: int) -> "ReferenceBasis":
        return cls(np.eye(dim, dtype=complex), True)

    @classmethod
    def direct_sum(cls, bases) -> "ReferenceBasis":
        blocks = [b.unitary for b in bases]
        n = sum(b.shape[0] for b in blocks)
        u = np.zeros((n, n), dtype=complex)
        k = 0
        for b in blocks:
            m = b.shape[0]
            u[k : k + m, k : k + m] = b
            k += m
        return cls(u, all(b.is_identity for b in bases))

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]


def _basis(basis, dim: int) -> ReferenceBasis:
    if basis is None:
        return ReferenceBasis.identity(dim)
    if not isinstance(basis, ReferenceBasis):
        basis = ReferenceBasis(basis)
    if basis.dim != dim:
        raise DimensionMismatch(f"basis dimension {basis.dim} does not match state dimension {dim}")
    return basis


@dataclass(frozen=True, eq=False)
class IncoherentState:
    basis: ReferenceBasis
    weights: np.ndarray

    def __post_init__(self):
        w = as_probability_vector(self.weights)
        if w.size != self.basis.dim:
            raise DimensionMismatch(f"{w.size} weights for a {self.basis.dim}-dimensional basis")
        object.__setattr__(self, "weights", w)

    @property
    def matrix(self) -> np.ndarray:
        u = self.basis.unitary
        return (u * self.weights) @ u.conj().T

    def density(self) -> DensityMatrix:
        return DensityMatrix(self.matrix)


@dataclass(frozen=True, eq=False)
class CoherenceResult:
    value: float
    alpha: AlphaParam
    minimizer: IncoherentState
    normalization: float  # N = sum_j <e_j|rho^alpha|e_j>^(1/alpha)

    def __float__(self):
        return self.value


def frame_matrix(rho, basis=None) -> np.ndarray:
    """Matrix elements <e_i|rho|e_j> in the reference basis."""
    rho = as_density(rho)
    b = _basis(basis, rho.dim)
    if b.is_identity:
        return np.asarray(rho.matrix)
    return b.unitary.conj().T @ rho.matrix @ b.unitary


def _power_diagonal(rho: DensityMatrix, b: ReferenceBasis, alpha: float) -> np.ndarray:
    """<e_j|rho^alpha|e_j> from the spectrum of rho, clipped at 0."""
    w, support = _psd_spectrum(rho.eig)
    vecs = rho.eig.eigenvectors[:, support]
    if not b.is_identity:
        vecs = b.unitary.conj().T @ vecs
    diag = (np.abs(vecs) ** 2) @ (w[support] ** alpha)
    return np.maximum(diag, 0.0)


def _shannon(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def coherence_l1(rho, basis=None) -> float:
    """Sum of moduli of the off-diagonal elements."""
    m = frame_matrix(rho, basis)
    return float(np.sum(np.abs(m)) - np.sum(np.abs(np.diag(m))))


def coherence_l2(rho, basis=None) -> float:
    """Sum of squared moduli of the off-diagonal elements."""
    m = frame_matrix(rho, basis)
    sq = np.abs(m) ** 2
    return float(np.sum(sq) - np.sum(np.diag(sq)))


def coherence_alpha(rho, alpha, basis=None) -> CoherenceResult:
    """Tsallis alpha-coherence and the closest incoherent state.

    For alpha != 1 the value is ((sum_j <e_j|rho^alpha|e_j>^(1/alpha))^alpha - 1)
    / (alpha - 1). At alpha = 1 it is the entropy of the dephased state minus
    the von Neumann entropy of rho. Diagonal entries of rho^alpha that vanish
    contribute nothing and get zero weight in the minimizer.
    """
    a = AlphaParam.of(alpha)
    rho = as_density(rho)
    b = _basis(basis, rho.dim)
    if a.is_limit_one:
        diag = np.maximum(np.real(np.diag(frame_matrix(rho, b))), 0.0)
        weights = diag / diag.sum()
        value = _shannon(weights) - von_neumann_entropy(rho)
        return CoherenceResult(max(value, 0.0), a, IncoherentState(b, weights), float(diag.sum()))
    roots = _power_diagonal(rho, b, a.alpha) ** (1.0 / a.alpha)
    norm = float(roots.sum())
    weights = roots / norm
    # N^alpha - 1 loses digits when N is close to 1
    value = math.expm1(a.alpha * math.log(norm)) / (a.alpha - 1.0)
    return CoherenceResult(max(value, 0.0), a, IncoherentState(b, weights), norm)


def closest_incoherent(rho, alpha, basis=None) -> IncoherentState:
    """Diagonal state with weights proportional to <e_j|rho^alpha|e_j>^(1/alpha)."""
    return coherence_alpha(rho, alpha, basis).minimizer


def coherence_2_quadratic(rho, basis=None) -> float:
    """alpha = 2 coherence as (sum_j sqrt(sum_i |rho_ij|^2))^2 - 1."""
    m = frame_matrix(rho, basis)
    s = float(np.sum(np.sqrt(np.sum(np.abs(m) ** 2, axis=0))))
    return max(s * s - 1.0, 0.0)


def purity_upper_bound(rho, alpha) -> float:
    """Upper bound on the alpha-coherence in terms of purity alone.

    For alpha <= 2 this is -ln_alpha(1 / (d Tr rho^2)). For alpha > 2 the
    largest eigenvalue is replaced by the purity estimate
    (1 + sqrt(d-1) sqrt(d Tr rho^2 - 1)) / d, so the bound stays a function of
    d and Tr rho^2 only; :func:`purity_upper_bound_lambda_max` uses the true
    largest eigenvalue instead.
    """
    a = AlphaParam.of(alpha)
    rho = as_density(rho)
    d = rho.dim
    y = max(d * purity(rho), 1.0)
    if a.alpha <= 2.0 or a.is_limit_one:
        return -alpha_log(1.0 / y, a)
    lam_est = 1.0 + math.sqrt(d - 1) * math.sqrt(y - 1.0)
    return (y * lam_est ** (a.alpha - 2.0) - 1.0) / (a.alpha - 1.0)


def purity_upper_bound_lambda_max(rho, alpha) -> float:
    """(d^(alpha-1) lambda_max^(alpha-2) Tr rho^2 - 1) / (alpha - 1), for alpha > 2."""
    a = AlphaParam.of(alpha)
    if a.alpha <= 2.0:
        raise AlphaOutOfRange("the largest-eigenvalue bound applies to alpha > 2")
    rho = as_density(rho)
    d = rho.dim
    lam = float(rho.eigenvalues[-1])
    return (d ** (a.alpha - 1.0) * lam ** (a.alpha - 2.0) * purity(rho) - 1.0) / (a.alpha - 1.0)


def mixedness(rho) -> float:
    """d (1 - Tr rho^2) / (d - 1); 0 for pure states, 1 for I/d."""
    rho = as_density(rho)
    d = rho.dim
    if d < 2:
        raise DimensionMismatch("mixedness is undefined for d = 1")
    return d * (1.0 - purity(rho)) / (d - 1)


@dataclass(frozen=True)
class TradeoffReport:
    alpha: float
    dim: int
    coherence: float
    mixedness: float
    normalized_sum: float  # C / (d - 1) + M
    purity_bound: float  # d Tr rho^2 - 1
    holds_sum: bool
    holds_purity_bound: bool

    @property
    def slack(self) -> float:
        return 1.0 - self.normalized_sum


def tradeoff_report(rho, alpha, basis=None, *, tol: float = 1e-9) -> TradeoffReport:
    """Coherence/mixedness trade-off: C/(d-1) + M <= 1 and C <= d Tr rho^2 - 1."""
    a = AlphaParam.of(alpha)
    if a.alpha > 2.0 and not a.is_limit_one:
        raise AlphaOutOfRange(f"trade-off relation needs alpha <= 2, got {a.alpha}")
    rho = as_density(rho)
    d = rho.dim
    c = coherence_alpha(rho, a, basis).value
    m = mixedness(rho)
    s = c / (d - 1) + m
    bound = d * purity(rho) - 1.0
    return TradeoffReport(a.alpha, d, c, m, s, bound, s <= 1.0 + tol, c <= bound + tol)


# -- brute-force oracle --------------------------------------------------------

MAX_ORACLE_DIM = 6


@dataclass(frozen=True)
class OracleBudget:
    """Search settings for :func:`brute_force_coherence`.

    ``resolution`` is the number of grid steps per simplex coordinate; ``None``
    picks 200 for d <= 3, 50 for d = 4, 20 for d = 5 and 12 for d = 6.
    ``refine_iters`` bounds each Nelder-Mead run; refinement restarts from the
    best point until a run stops improving or ``max_restarts`` is reached.
    """

    resolution: int | None = None
    refine_iters: int = 200
    max_restarts: int = 20
    tol: float = 1e-6

    def grid_steps(self, dim: int) -> int:
        if self.resolution is not None:
            return self.resolution
        return {1: 1, 2: 200, 3: 200, 4: 50, 5: 20}.get(dim, 12)


def simplex_grid(dim: int, steps: int) -> np.ndarray:
    """All points k / steps with non-negative integer k summing to ``steps``.

    Rows are in lexicographic order of k.
    """
    if dim == 1:
        return np.ones((1, 1))
    bars = np.array(list(combinations(range(steps + dim - 1), dim - 1)), dtype=int)
    edges = np.hstack([np.full((len(bars), 1), -1), bars, np.full((len(bars), 1), steps + dim - 1)])
    counts = np.diff(edges, axis=1) - 1
    return counts / steps


class _DiagonalObjective:
    """D_alpha(rho || diag(delta)) for batches of diagonal delta.

    Uses numpy's own eigensolver, so the oracle shares no linear algebra with
    the closed form it is checking.
    """

    def __init__(self, m: np.ndarray, alpha: AlphaParam):
        w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
        top = max(float(w[-1]), 0.0)
        keep = w > get_tolerances().rank * top
        w, v = w[keep], v[:, keep]
        self.alpha = alpha
        self.rho_diag = np.real(np.diag(m))
        if alpha.is_limit_one:
            self.coeffs = self.rho_diag.copy()
            self.const = float(np.sum(w * np.log(w)))
        else:
            self.coeffs = (np.abs(v) ** 2) @ (w**alpha.alpha)
            self.const = 0.0
        self.needed = self.rho_diag > 1e-12

    def __call__(self, delta: np.ndarray) -> np.ndarray:
        delta = np.atleast_2d(delta)
        a = self.alpha
        pos = delta > 0
        out = np.empty(delta.shape[0])
        safe = np.where(pos, delta, 1.0)
        if a.is_limit_one or a.alpha > 1.0:
            violated = np.any(~pos & self.needed, axis=1)
        else:
            violated = np.zeros(delta.shape[0], dtype=bool)
        if a.is_limit_one:
            terms = np.where(pos, self.coeffs * np.log(safe), 0.0)
            out[:] = self.const - terms.sum(axis=1)
        else:
            terms = np.where(pos, self.coeffs * safe ** (1.0 - a.alpha), 0.0)
            out[:] = (terms.sum(axis=1) - 1.0) / (a.alpha - 1.0)
        out[violated] = np.inf
        return out


def brute_force_coherence(rho, alpha, basis=None, budget: OracleBudget | None = None) -> float:
    """Numerically minimise D_alpha(rho || delta) over incoherent delta.

    A full simplex grid is evaluated first; the lexicographically first grid
    minimiser seeds a Nelder-Mead refinement in the parametrisation
    delta = x^2 / |x|^2.
    """
    a = AlphaParam.of(alpha)
    rho = as_density(rho)
    d = rho.dim
    if d > MAX_ORACLE_DIM:
        raise DimensionTooLarge(f"oracle supports d <= {MAX_ORACLE_DIM}, got {d}")
    budget = budget or OracleBudget()
    objective = _DiagonalObjective(frame_matrix(rho, basis), a)

    grid = simplex_grid(d, budget.grid_steps(d))
    values = objective(grid)
    best_index = int(np.argmin(values))  # first occurrence = lexicographic tie-break
    best = float(values[best_index])
    if d == 1:
        return max(best, 0.0)

    def f(x):
        sq = x * x
        total = sq.sum()
        if total == 0.0:
            return np.inf
        return float(objective(sq / total)[0])

    x = np.sqrt(grid[best_index])
    for _ in range(budget.max_restarts):
        res = minimize(
            f,
            x,
            method="Nelder-Mead",
            options={"maxiter": budget.refine_iters, "xatol": 1e-12, "fatol": 1e-16},
        )
        improved = best - float(res.fun)
        if res.fun < best:
            best, x = float(res.fun), res.x
        if improved <= 1e-15:
            break
    return max(best, 0.0)
