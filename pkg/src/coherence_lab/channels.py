"""Kraus channels, incoherent operations and monotonicity checks.

A :class:`KrausSet` may have a different output space for every operator
(a selective measurement). :func:`lift_block_column` embeds such a set into
the direct sum of the output spaces so that it can be applied as one channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coherence import (
    ReferenceBasis,
    _basis,
    coherence_alpha,
    coherence_l2,
    closest_incoherent,
    frame_matrix,
)
from .config import get_tolerances
from .divergence import (
    AlphaParam,
    DivergenceValue,
    quantum_divergence_unnormalized,
    quantum_tsallis,
    tsallis_classical,
)
from .errors import (
    AlphaOutOfRange,
    BadRank,
    DimensionMismatch,
    HeterogeneousOutputs,
    InfeasibleShape,
    NotComplete,
    NotIncoherentKraus,
)
from .linalg import DensityMatrix, as_density, as_matrix, hermitian_part


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)



def sandwich(k: np.ndarray, m: np.ndarray) -> np.ndarray:
    """K m K^dag, made exactly Hermitian so later normalisation does not amplify rounding."""
    return hermitian_part(k @ m @ k.conj().T)

@dataclass(frozen=True, eq=False)
class KrausSet:
    """Kraus operators sharing an input space, each with its own output basis."""

    operators: tuple
    output_bases: tuple

    def __init__(self, operators, output_bases=None, *, check: bool = True):
        ops = tuple(as_matrix(k) for k in operators)
        if not ops:
            raise DimensionMismatch("a Kraus set needs at least one operator")
        d_in = ops[0].shape[1]
        if any(k.shape[1] != d_in for k in ops):
            raise DimensionMismatch("Kraus operators must share the input dimension")
        for k in ops:
            k.setflags(write=False)
        if output_bases is None:
            bases = tuple(ReferenceBasis.identity(k.shape[0]) for k in ops)
        else:
            bases = tuple(_basis(b, k.shape[0]) for b, k in zip(output_bases, ops, strict=True))
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "output_bases", bases)
        if check:
            residual = self.completeness_residual()
            if residual > get_tolerances().completeness:
                raise NotComplete(f"sum K^dag K deviates from identity by {residual:.3e}")

    @property
    def input_dim(self) -> int:
        return self.operators[0].shape[1]

    @property
    def output_dims(self) -> list[int]:
        return [k.shape[0] for k in self.operators]

    def __len__(self):
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)

    def completeness_residual(self) -> float:
        total = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(total - np.eye(self.input_dim))))


def is_incoherent_kraus(K, basis_in=None, basis_out=None) -> bool:
    """True iff every column of K, in the given bases, has at most one non-negligible entry.

    Such an operator sends each basis state to a multiple of a basis state and
    therefore maps diagonal states to diagonal states.
    """
    k = as_matrix(K)
    bi = _basis(basis_in, k.shape[1])
    bo = _basis(basis_out, k.shape[0])
    kk = bo.unitary.conj().T @ k @ bi.unitary
    nonzero = np.abs(kk) > get_tolerances().kraus_entry
    return bool(np.all(nonzero.sum(axis=0) <= 1))


def maps_basis_states_incoherently(K, basis_in=None, basis_out=None, *, tol: float = 1e-10) -> bool:
    """Cross-check of :func:`is_incoherent_kraus`: K|e_j><e_j|K^dag is diagonal for every j."""
    k = as_matrix(K)
    bi = _basis(basis_in, k.shape[1])
    bo = _basis(basis_out, k.shape[0])
    kk = bo.unitary.conj().T @ k @ bi.unitary
    for j in range(kk.shape[1]):
        col = kk[:, j]
        out = np.outer(col, col.conj())
        off = out - np.diag(np.diag(out))
        if np.max(np.abs(off), initial=0.0) > tol * max(1.0, float(np.vdot(col, col).real)):
            return False
    return True


def _require_incoherent(kraus: KrausSet, basis_in) -> None:
    for n, (k, bo) in enumerate(zip(kraus.operators, kraus.output_bases)):
        if not is_incoherent_kraus(k, basis_in, bo):
            raise NotIncoherentKraus(f"Kraus operator {n} is not incoherent")


def _require_alpha_le_2(a: AlphaParam) -> None:
    if a.alpha > 2.0 and not a.is_limit_one:
        raise AlphaOutOfRange(f"monotonicity holds for alpha in (0, 2], got {a.alpha}")


def apply_channel(kraus: KrausSet, rho) -> DensityMatrix:
    """sum_n K_n rho K_n^dag for a set with a common output dimension."""
    if len(set(kraus.output_dims)) != 1:
        raise HeterogeneousOutputs("output dimensions differ; lift the set first")
    m = as_density(rho).matrix
    if m.shape[0] != kraus.input_dim:
        raise DimensionMismatch(f"state dimension {m.shape[0]} != Kraus input {kraus.input_dim}")
    return DensityMatrix(sum(sandwich(k, m) for k in kraus.operators))


def lift_block_column(kraus: KrausSet) -> KrausSet:
    """Embed every K_n as the n-th block of a column into the direct-sum output space."""
    dims = kraus.output_dims
    total = sum(dims)
    lifted = []
    offset = 0
    for k, m in zip(kraus.operators, dims):
        big = np.zeros((total, kraus.input_dim), dtype=complex)
        big[offset : offset + m] = k
        lifted.append(big)
        offset += m
    basis = ReferenceBasis.direct_sum(kraus.output_bases)
    return KrausSet(lifted, [basis] * len(lifted))


@dataclass(frozen=True, eq=False)
class SelectiveOutcome:
    index: int
    probability: float
    state: DensityMatrix | None  # None when the probability is below the floor
    unnormalized: np.ndarray


def selective_measure(kraus: KrausSet, rho) -> list[SelectiveOutcome]:
    """Outcome probabilities p_n = Tr(K_n rho K_n^dag) and post-measurement states."""
    m = as_density(rho).matrix
    if m.shape[0] != kraus.input_dim:
        raise DimensionMismatch(f"state dimension {m.shape[0]} != Kraus input {kraus.input_dim}")
    floor = get_tolerances().prob_floor
    outcomes = []
    for n, k in enumerate(kraus.operators):
        out = sandwich(k, m)
        p = float(np.trace(out).real)
        state = DensityMatrix(out / p) if p > floor else None
        outcomes.append(SelectiveOutcome(n, max(p, 0.0), state, out))
    return outcomes


def _outcome_probabilities(kraus: KrausSet, m: np.ndarray) -> np.ndarray:
    return np.array([max(float(np.trace(sandwich(k, m)).real), 0.0) for k in kraus.operators])


def _weight(p: float, q: float, a: AlphaParam) -> float:
    """p^alpha q^(1-alpha), exactly p at alpha = 1; +inf for q = 0 < p with alpha > 1."""
    if a.is_limit_one:
        return p
    if q <= 0.0:
        return math.inf if (a.alpha > 1.0 and p > 0.0) else 0.0
    return p**a.alpha * q ** (1.0 - a.alpha)


@dataclass(frozen=True, eq=False)
class MonotonicityReport:
    alpha: float
    c_input: float
    weighted_sum: float  # sum_n p_n^alpha q_n^(1-alpha) C(rho_n)
    standard_sum: float  # sum_n p_n C(rho_n)
    p: np.ndarray
    q: np.ndarray
    outcome_coherence: np.ndarray  # nan where the outcome has zero probability
    holds_weighted: bool
    holds_standard: bool
    chain: tuple[float, ...] | None = None
    holds_chain: bool | None = None
    infinite_weight: bool = False  # q_n = 0 < p_n with alpha > 1

    @property
    def weighted_gap(self) -> float:
        return self.c_input - self.weighted_sum

    @property
    def standard_gap(self) -> float:
        return self.c_input - self.standard_sum

    @property
    def chain_margins(self) -> tuple[float, ...] | None:
        """Margins of each step of the proof chain; all >= -tol when it holds."""
        if self.chain is None:
            return None
        c = self.chain
        return (c[0] - c[1], c[1] - c[2], c[2] - c[1], c[2] - c[3], c[3] - c[2], c[3] - c[4], c[4] - c[5])


def _finite(v: DivergenceValue) -> float:
    return float(v)


def strong_monotonicity_report(
    kraus: KrausSet, rho, alpha, basis_in=None, *, chain: bool = True, tol: float = 1e-9
) -> MonotonicityReport:
    """Compare input coherence with both outcome-averaged forms under a selective measurement.

    ``weighted_sum`` uses the weights p_n^alpha q_n^(1-alpha) with q_n taken on
    the closest incoherent state of rho; this form must never exceed the input
    coherence for alpha in (0, 2]. ``standard_sum`` uses plain p_n weights and
    may exceed it. With ``chain`` the intermediate divergences of the
    monotonicity argument are returned as
    (D(rho||delta), D(lifted), sum over lifted blocks, sum over blocks,
    weighted outcome divergences, weighted_sum).
    """
    a = AlphaParam.of(alpha)
    _require_alpha_le_2(a)
    rho = as_density(rho)
    b_in = _basis(basis_in, rho.dim)
    _require_incoherent(kraus, b_in)
    floor = get_tolerances().prob_floor

    c_in = coherence_alpha(rho, a, b_in)
    delta = c_in.minimizer.matrix
    outcomes = selective_measure(kraus, rho)
    p = np.array([o.probability for o in outcomes])
    q = _outcome_probabilities(kraus, delta)

    weighted = standard = 0.0
    infinite_weight = False
    coh = np.full(len(outcomes), np.nan)
    for o, bo in zip(outcomes, kraus.output_bases):
        if o.state is None:
            continue
        c = coherence_alpha(o.state, a, bo).value
        coh[o.index] = c
        w = _weight(o.probability, q[o.index], a)
        if math.isinf(w):
            infinite_weight = True
            continue
        weighted += w * c
        standard += o.probability * c

    steps = None
    holds_chain = None
    if chain:
        steps = _proof_chain(kraus, rho, delta, p, q, a, weighted, floor)
        c = steps
        holds_chain = bool(
            c[1] <= c[0] + tol
            and abs(c[2] - c[1]) <= tol
            and abs(c[3] - c[2]) <= tol
            and c[4] <= c[3] + tol
            and c[5] <= c[4] + tol
        )
    holds_weighted = infinite_weight or weighted <= c_in.value + tol
    return MonotonicityReport(
        a.alpha,
        c_in.value,
        weighted,
        standard,
        p,
        q,
        coh,
        bool(holds_weighted),
        bool(standard <= c_in.value + tol),
        steps,
        holds_chain,
        infinite_weight,
    )


def _proof_chain(kraus, rho, delta, p, q, a, weighted, floor) -> tuple[float, ...]:
    lifted = lift_block_column(kraus)
    c0 = _finite(quantum_tsallis(rho, delta, a))
    c1 = _finite(quantum_tsallis(_sum_outputs(lifted, rho.matrix), _sum_outputs(lifted, delta), a))
    c2 = 0.0
    for k in lifted.operators:
        c2 += _finite(
            quantum_divergence_unnormalized(sandwich(k, rho.matrix), sandwich(k, delta), a)
        )
    c3 = 0.0
    c4 = 0.0
    for n, k in enumerate(kraus.operators):
        out_rho = sandwich(k, rho.matrix)
        out_delta = sandwich(k, delta)
        c3 += _finite(quantum_divergence_unnormalized(out_rho, out_delta, a))
        if p[n] > floor and q[n] > floor:
            d = quantum_tsallis(out_rho / p[n], out_delta / q[n], a)
            c4 += _weight(p[n], q[n], a) * _finite(d)
    return (c0, c1, c2, c3, c4, weighted)


def _sum_outputs(kraus: KrausSet, m: np.ndarray) -> DensityMatrix:
    return DensityMatrix(sum(sandwich(k, m) for k in kraus.operators))


@dataclass(frozen=True, eq=False)
class GeneralizedL2Report:
    alpha: float
    c_input: float  # C_l2(rho)
    weighted_sum: float  # sum_n p_n^alpha r_n^(1-alpha) C_l2(rho_n)
    standard_sum: float
    p: np.ndarray
    r: np.ndarray
    holds_weighted: bool
    holds_standard: bool


def l2_generalized_monotonicity_report(
    kraus: KrausSet, rho, alpha, basis_in=None, *, tol: float = 1e-9
) -> GeneralizedL2Report:
    """Weighted selective-measurement test for the squared l2 coherence.

    The reference probabilities r_n come from the dephased input, i.e. rho with
    its off-diagonal elements removed.
    """
    a = AlphaParam.of(alpha)
    rho = as_density(rho)
    b_in = _basis(basis_in, rho.dim)
    _require_incoherent(kraus, b_in)
    u = b_in.unitary
    dephased = (u * np.real(np.diag(frame_matrix(rho, b_in)))) @ u.conj().T
    outcomes = selective_measure(kraus, rho)
    p = np.array([o.probability for o in outcomes])
    r = _outcome_probabilities(kraus, dephased)
    weighted = standard = 0.0
    for o, bo in zip(outcomes, kraus.output_bases):
        if o.state is None:
            continue
        c = coherence_l2(o.state, bo)
        w = _weight(o.probability, r[o.index], a)
        weighted += w * c
        standard += o.probability * c
    c_in = coherence_l2(rho, b_in)
    return GeneralizedL2Report(
        a.alpha, c_in, weighted, standard, p, r, bool(weighted <= c_in + tol), bool(standard <= c_in + tol)
    )


def selective_average(kraus: KrausSet, rho, measure, basis_in=None) -> tuple[float, float]:
    """(sum_n p_n measure(rho_n, basis_n), measure(rho, basis_in)) for any coherence measure."""
    rho = as_density(rho)
    b_in = _basis(basis_in, rho.dim)
    total = 0.0
    for o, bo in zip(selective_measure(kraus, rho), kraus.output_bases):
        if o.state is not None:
            total += o.probability * measure(o.state, bo)
    return total, measure(rho, b_in)


@dataclass(frozen=True)
class ConvexityReport:
    lhs: float  # C(sum_n p_n rho_n)
    rhs: float  # sum_n p_n C(rho_n)
    holds: bool

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def mixing_convexity_report(states, weights, alpha, basis=None, *, tol: float = 1e-9) -> ConvexityReport:
    """Coherence of a mixture versus the average coherence of its components."""
    a = AlphaParam.of(alpha)
    _require_alpha_le_2(a)
    states = [as_density(s) for s in states]
    w = np.asarray(weights, dtype=float)
    if len(states) != w.size or len({s.dim for s in states}) != 1:
        raise DimensionMismatch("states and weights must match and share one dimension")
    mix = DensityMatrix(sum(wi * s.matrix for wi, s in zip(w, states)))
    lhs = coherence_alpha(mix, a, basis).value
    rhs = float(sum(wi * coherence_alpha(s, a, basis).value for wi, s in zip(w, states)))
    return ConvexityReport(lhs, rhs, lhs <= rhs + tol)


@dataclass(frozen=True, eq=False)
class GapReport:
    lhs: float  # sum_n D_alpha(K rho K^dag || K sigma K^dag), unnormalized
    rhs: float  # sum_n p^alpha q^(1-alpha) D_alpha(rho_n || sigma_n)
    classical: float  # D_alpha(p || q)
    p: np.ndarray
    q: np.ndarray

    @property
    def gap(self) -> float:
        if math.isinf(self.lhs):
            return math.inf
        return self.lhs - self.rhs


def outcome_split_sides(kraus: KrausSet, rho, sigma, alpha) -> GapReport:
    """Both sides of the outcome-wise divergence inequality and the classical D_alpha(p||q).

    When the two sides are finite their difference equals D_alpha(p||q).
    An infinite left side (a support violation in some outcome) yields an
    infinite gap.
    """
    a = AlphaParam.of(alpha)
    rho, sigma = as_density(rho), as_density(sigma)
    if rho.dim != sigma.dim or rho.dim != kraus.input_dim:
        raise DimensionMismatch("states and Kraus input dimension must agree")
    floor = get_tolerances().prob_floor
    lhs = DivergenceValue(0.0)
    rhs = 0.0
    p = _outcome_probabilities(kraus, rho.matrix)
    q = _outcome_probabilities(kraus, sigma.matrix)
    for n, k in enumerate(kraus.operators):
        out_rho = sandwich(k, rho.matrix)
        out_sigma = sandwich(k, sigma.matrix)
        lhs = lhs + quantum_divergence_unnormalized(out_rho, out_sigma, a)
        if p[n] > floor and q[n] > floor:
            d = quantum_tsallis(out_rho / p[n], out_sigma / q[n], a)
            if d.finite:
                rhs += _weight(p[n], q[n], a) * d.value
    classical = float(tsallis_classical(p / p.sum(), q / q.sum(), a))
    return GapReport(float(lhs), rhs, classical, p, q)


def outcome_split_gap(kraus: KrausSet, rho, sigma, alpha) -> float:
    return outcome_split_sides(kraus, rho, sigma, alpha).gap


# -- random generators -----------------------------------------------------------


def random_density(dim: int, rank: int | None = None, seed=None) -> DensityMatrix:
    """G G^dag / Tr(G G^dag) with G a dim x rank complex Ginibre matrix."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise BadRank(f"rank must lie in [1, {dim}], got {rank}")
    rng = _rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    rng = _rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    qm, r = np.linalg.qr(z)
    d = np.diag(r)
    return qm * (d / np.abs(d))


def random_incoherent_kraus(d_in: int, outcome_dims, seed=None) -> KrausSet:
    """Random incoherent Kraus set with the given output dimensions.

    Within each operator the non-zero entries of different columns sit in
    different rows, so sum K_n^dag K_n is diagonal and a per-column rescaling
    makes it exactly the identity.
    """
    dims = [int(m) for m in outcome_dims]
    if d_in < 1 or not dims or min(dims) < 1 or sum(dims) < d_in:
        raise InfeasibleShape(f"cannot cover {d_in} input columns with output dims {dims}")
    rng = _rng(seed)
    capacity = list(dims)
    active = [set() for _ in dims]
    for j in rng.permutation(d_in):
        free = [n for n, c in enumerate(capacity) if c > 0]
        n = free[rng.integers(len(free))]
        active[n].add(int(j))
        capacity[n] -= 1
    for n in range(len(dims)):
        for j in rng.permutation(d_in):
            if capacity[n] > 0 and int(j) not in active[n] and rng.random() < 0.5:
                active[n].add(int(j))
                capacity[n] -= 1
    ops = []
    for n, m in enumerate(dims):
        k = np.zeros((m, d_in), dtype=complex)
        cols = sorted(active[n])
        rows = rng.permutation(m)[: len(cols)]
        for i, j in zip(rows, cols):
            k[i, j] = rng.standard_normal() + 1j * rng.standard_normal()
        ops.append(k)
    norms = np.sqrt(sum(np.sum(np.abs(k) ** 2, axis=0) for k in ops))
    return KrausSet([k / norms for k in ops])


def random_channel(d_in: int, d_out: int, n_ops: int, seed=None) -> KrausSet:
    """Generic TPCP map: blocks of a random isometry C^d_in -> C^(n_ops d_out)."""
    if n_ops * d_out < d_in:
        raise InfeasibleShape("n_ops * d_out must be at least d_in")
    rng = _rng(seed)
    z = rng.standard_normal((n_ops * d_out, d_in)) + 1j * rng.standard_normal((n_ops * d_out, d_in))
    v, _ = np.linalg.qr(z)
    return KrausSet([v[n * d_out : (n + 1) * d_out] for n in range(n_ops)])
