"""Tsallis relative alpha-entropies, classical and quantum.

Values are returned as :class:`DivergenceValue`, an extended real that is
either finite or ``+inf`` with a reason code. The ``alpha == 1`` case is
dispatched to the standard relative entropy instead of evaluating the 0/0
form; see :class:`AlphaParam` for the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import get_tolerances
from .errors import (
    DimensionMismatch,
    InternalConsistencyError,
    InvalidState,
    LengthMismatch,
    NonPositiveArgument,
    SupportViolation,
)
from .linalg import DensityMatrix, EigenDecomposition, _psd_spectrum, _square, as_density, eigh

ALPHA_ONE_THRESHOLD = 1e-9

SUPPORT_VIOLATION = "SupportViolation"


@dataclass(frozen=True)
class AlphaParam:
    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not math.isfinite(a) or a <= 0.0:
            raise ValueError(f"alpha must be finite and > 0, got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    @property
    def is_limit_one(self) -> bool:
        return abs(self.alpha - 1.0) < ALPHA_ONE_THRESHOLD

    @classmethod
    def of(cls, alpha) -> "AlphaParam":
        return alpha if isinstance(alpha, AlphaParam) else cls(alpha)

    def __float__(self):
        return self.alpha


@dataclass(frozen=True)
class DivergenceValue:
    """Finite real or ``+inf``; infinite values carry ``reason``."""

    value: float
    reason: str | None = None

    @classmethod
    def infinite(cls, reason: str = SUPPORT_VIOLATION) -> "DivergenceValue":
        return cls(math.inf, reason)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def __float__(self):
        return self.value

    def __add__(self, other):
        if isinstance(other, DivergenceValue):
            if not self.finite:
                return self
            if not other.finite:
                return other
            return DivergenceValue(self.value + other.value)
        return DivergenceValue(self.value + float(other), self.reason)

    __radd__ = __add__

    def to_json(self) -> dict:
        return {"finite": self.finite, "value": self.value if self.finite else None}


def as_probability_vector(p, *, tol: float = 1e-9) -> np.ndarray:
    v = np.asarray(p, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise LengthMismatch(f"expected a non-empty vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)) or np.any(v < 0.0):
        raise InvalidState("probabilities must be finite and non-negative")
    if abs(v.sum() - 1.0) > tol:
        raise InvalidState(f"probabilities sum to {v.sum()!r}, not 1")
    return v


def alpha_log(xi: float, alpha) -> float:
    """ln_alpha(xi) = (xi^(1-alpha) - 1) / (1 - alpha); ln at alpha = 1."""
    a = AlphaParam.of(alpha)
    if not xi > 0:
        raise NonPositiveArgument(f"alpha-logarithm needs xi > 0, got {xi!r}")
    if a.is_limit_one:
        return math.log(xi)
    return math.expm1((1.0 - a.alpha) * math.log(xi)) / (1.0 - a.alpha)


def _finalize(value: float, trace_term: float, a: AlphaParam) -> DivergenceValue:
    """Clamp round-off negatives of a quantity that is provably >= 0."""
    if value >= 0.0:
        return DivergenceValue(value)
    # the closed form divides a trace by (alpha - 1), so scale the window accordingly
    window = get_tolerances().negative_clamp * max(1.0, abs(trace_term))
    if not a.is_limit_one:
        window /= min(1.0, abs(a.alpha - 1.0))
    if value >= -window:
        return DivergenceValue(0.0)
    raise InternalConsistencyError(f"divergence evaluated to {value!r} < 0")


def tsallis_classical(p, q, alpha) -> DivergenceValue:
    """Classical Tsallis relative alpha-entropy D_alpha(p || q)."""
    a = AlphaParam.of(alpha)
    p = as_probability_vector(p)
    q = as_probability_vector(q)
    if p.shape != q.shape:
        raise LengthMismatch(f"lengths {p.size} and {q.size} differ")
    if a.is_limit_one:
        if np.any((p > 0) & (q == 0)):
            return DivergenceValue.infinite()
        m = p > 0
        value = float(np.sum(p[m] * np.log(p[m] / q[m])))
        return _finalize(value, 1.0, a)
    if a.alpha > 1.0 and np.any((p > 0) & (q == 0)):
        return DivergenceValue.infinite()
    m = (p > 0) & (q > 0)
    s = float(np.sum(p[m] ** a.alpha * q[m] ** (1.0 - a.alpha)))
    return _finalize((s - 1.0) / (a.alpha - 1.0), s, a)


def _eig_of(x) -> tuple[np.ndarray, EigenDecomposition]:
    if isinstance(x, DensityMatrix):
        return x.matrix, x.eig
    m = _square(x)
    return m, eigh(m)


def _support_leak(ma: np.ndarray, eb: EigenDecomposition) -> float:
    _, support = _psd_spectrum(eb)
    kernel = eb.eigenvectors[:, ~support]
    if kernel.shape[1] == 0:
        return 0.0
    # (I - P_B) A (I - P_B) expressed through the kernel basis
    return float(np.max(np.abs(kernel @ (kernel.conj().T @ ma @ kernel) @ kernel.conj().T)))


def _trace_power_pair(ea: EigenDecomposition, eb: EigenDecomposition, alpha: float) -> float:
    """Tr(A^alpha B^(1-alpha)) with both powers taken on the supports."""
    wa, sa = _psd_spectrum(ea)
    wb, sb = _psd_spectrum(eb)
    va = ea.eigenvectors[:, sa]
    vb = eb.eigenvectors[:, sb]
    overlap = np.abs(va.conj().T @ vb) ** 2  # |<a_i|b_k>|^2
    return float(wa[sa] ** alpha @ overlap @ wb[sb] ** (1.0 - alpha))


def _relative_entropy_terms(ea: EigenDecomposition, eb: EigenDecomposition) -> tuple[float, float]:
    """(Tr A ln A, Tr A ln B) on the supports."""
    wa, sa = _psd_spectrum(ea)
    wb, sb = _psd_spectrum(eb)
    va = ea.eigenvectors[:, sa]
    vb = eb.eigenvectors[:, sb]
    overlap = np.abs(va.conj().T @ vb) ** 2
    a_log_a = float(np.sum(wa[sa] * np.log(wa[sa])))
    a_log_b = float(wa[sa] @ overlap @ np.log(wb[sb]))
    return a_log_a, a_log_b


def _raw_divergence(ma, ea, eb, a: AlphaParam, trace_a: float) -> tuple[float, float]:
    """Unclamped divergence and the magnitude of its leading trace term."""
    if a.is_limit_one:
        a_log_a, a_log_b = _relative_entropy_terms(ea, eb)
        return a_log_a - a_log_b, max(abs(a_log_a), abs(a_log_b))
    t = _trace_power_pair(ea, eb, a.alpha)
    return (t - trace_a) / (a.alpha - 1.0), t


def _needs_support(a: AlphaParam) -> bool:
    return a.is_limit_one or a.alpha > 1.0


def quantum_tsallis(rho, sigma, alpha) -> DivergenceValue:
    """Quantum Tsallis divergence D_alpha(rho || sigma) of two density matrices.

    For alpha >= 1 the value is ``+inf`` unless ran(rho) is inside ran(sigma);
    for alpha in (0, 1) it is always finite, with the trace taken on the
    support of sigma.
    """
    a = AlphaParam.of(alpha)
    rho, sigma = as_density(rho), as_density(sigma)
    if rho.dim != sigma.dim:
        raise DimensionMismatch(f"dimensions {rho.dim} and {sigma.dim} differ")
    if _needs_support(a) and _support_leak(rho.matrix, sigma.eig) > get_tolerances().range:
        return DivergenceValue.infinite()
    value, scale = _raw_divergence(rho.matrix, rho.eig, sigma.eig, a, 1.0)
    return _finalize(value, scale, a)


def quantum_divergence_unnormalized(A, B, alpha, *, strict: bool = False) -> DivergenceValue:
    """[Tr(A^alpha B^(1-alpha)) - Tr A] / (alpha - 1) for PSD ``A``, ``B``.

    Unlike :func:`quantum_tsallis` the result may be negative, since the traces
    of ``A`` and ``B`` need not agree. A support violation for alpha >= 1 gives
    ``+inf``, or raises :class:`SupportViolation` when ``strict`` is set.
    """
    a = AlphaParam.of(alpha)
    ma, ea = _eig_of(A)
    mb, eb = _eig_of(B)
    if ma.shape != mb.shape:
        raise DimensionMismatch(f"shapes {ma.shape} and {mb.shape} differ")
    if _needs_support(a) and _support_leak(ma, eb) > get_tolerances().range:
        if strict:
            raise SupportViolation("ran(A) is not contained in ran(B)")
        return DivergenceValue.infinite()
    value, _ = _raw_divergence(ma, ea, eb, a, float(np.trace(ma).real))
    return DivergenceValue(value)
