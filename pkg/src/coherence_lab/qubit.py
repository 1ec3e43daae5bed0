"""Single-qubit closed forms and the data behind the maximal-coherence and
trade-off curves.

A qubit state is parametrised by its upper diagonal entry ``u`` and its lower
off-diagonal entry ``w``; every quantity depends on ``w`` only through |w|.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import get_tolerances
from .divergence import AlphaParam
from .linalg import DensityMatrix

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class QubitState:
    u: float
    w: complex = 0.0

    def __post_init__(self):
        u = float(self.u)
        w = complex(self.w)
        if not 0.0 <= u <= 1.0:
            raise ValueError(f"u must lie in [0, 1], got {u}")
        if abs(w) > math.sqrt(u * (1.0 - u)) + 1e-12:
            raise ValueError(f"|w| = {abs(w)} exceeds sqrt(u(1-u)) = {math.sqrt(u * (1 - u))}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "w", w)

    @classmethod
    def pure(cls, u: float, phase: float = 0.0) -> "QubitState":
        return cls(u, math.sqrt(u * (1.0 - u)) * complex(math.cos(phase), math.sin(phase)))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.u, self.w.conjugate()], [self.w, 1.0 - self.u]], dtype=complex)

    def density(self) -> DensityMatrix:
        return DensityMatrix(self.matrix)


def binary_entropy(x):
    """h(x) = -x ln x - (1-x) ln(1-x), with 0 ln 0 = 0; accepts arrays."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for v in (x, 1.0 - x):
        m = v > 0
        out[m] -= v[m] * np.log(v[m])
    return out if out.ndim else float(out)


def _radius(u, wabs):
    return np.sqrt((np.asarray(u, dtype=float) - 0.5) ** 2 + np.asarray(wabs, dtype=float) ** 2)


def qubit_eigenvalues(s: QubitState) -> tuple[float, float]:
    r = float(_radius(s.u, abs(s.w)))
    return 0.5 + r, 0.5 - r


def qubit_c1(s: QubitState) -> float:
    """Entropy of the diagonal minus entropy of the state, h(u) - h(lambda_+)."""
    lam, _ = qubit_eigenvalues(s)
    return max(binary_entropy(s.u) - binary_entropy(min(lam, 1.0)), 0.0)


def qubit_c2(s: QubitState) -> float:
    """(sqrt(u^2 + |w|^2) + sqrt((1-u)^2 + |w|^2))^2 - 1."""
    w2 = abs(s.w) ** 2
    root = math.sqrt(s.u**2 + w2) + math.sqrt((1.0 - s.u) ** 2 + w2)
    return max(root * root - 1.0, 0.0)


def qubit_coherence_alpha(u, wabs, alpha):
    """alpha-coherence of the qubit (u, |w|) from its 2x2 spectral decomposition.

    Vectorised over ``u`` and ``wabs``.
    """
    a = AlphaParam.of(alpha)
    u = np.asarray(u, dtype=float)
    wabs = np.asarray(wabs, dtype=float)
    if a.is_limit_one:
        lam = np.minimum(0.5 + _radius(u, wabs), 1.0)
        return np.maximum(binary_entropy(u) - binary_entropy(lam), 0.0)
    r = _radius(u, wabs)
    lam_p = 0.5 + r
    lam_m = 0.5 - r
    # rank threshold as in the generic code path
    lam_m = np.where(lam_m > get_tolerances().rank * lam_p, lam_m, 0.0)
    safe_r = np.where(r > 0, r, 1.0)
    c2 = np.where(r > 0, 0.5 * (1.0 + (u - 0.5) / safe_r), 0.5)  # |<e_1|v_+>|^2
    pp = lam_p**a.alpha
    pm = np.where(lam_m > 0, lam_m, 1.0) ** a.alpha * (lam_m > 0)
    d1 = np.maximum(pp * c2 + pm * (1.0 - c2), 0.0)
    d2 = np.maximum(pp * (1.0 - c2) + pm * c2, 0.0)
    n = d1 ** (1.0 / a.alpha) + d2 ** (1.0 / a.alpha)
    return np.maximum(np.expm1(a.alpha * np.log(n)) / (a.alpha - 1.0), 0.0)


def qubit_maximizer(u: float, alpha, scan_points: int = 2001, tol: float = 1e-10) -> tuple[float, float]:
    """(|w|*, max C_alpha) over |w| in [0, sqrt(u(1-u))] at fixed ``u``.

    A uniform scan locates the best cell; golden-section search refines it.
    """
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"u must lie in [0, 1], got {u}")
    wmax = math.sqrt(u * (1.0 - u))
    if wmax == 0.0:
        return 0.0, 0.0
    ws = np.linspace(0.0, wmax, scan_points)
    vals = qubit_coherence_alpha(u, ws, alpha)
    k = int(np.argmax(vals))
    best_w, best = float(ws[k]), float(vals[k])
    lo, hi = float(ws[max(k - 1, 0)]), float(ws[min(k + 1, scan_points - 1)])

    def f(w):
        return float(qubit_coherence_alpha(u, w, alpha))

    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
    for w, v in ((x1, f1), (x2, f2)):
        if v > best:
            best_w, best = w, v
    return best_w, best


def qubit_max_coherence(u: float, alpha, scan_points: int = 2001) -> float:
    return qubit_maximizer(u, alpha, scan_points)[1]


def qubit_mixedness(s: QubitState) -> float:
    """2 (1 - Tr rho^2) from the parameters."""
    purity = s.u**2 + (1.0 - s.u) ** 2 + 2.0 * abs(s.w) ** 2
    return 2.0 * (1.0 - purity)


@dataclass(frozen=True)
class QubitTradeoff:
    lower: float  # 4u(1-u)
    upper: float  # 2 sqrt(u(1-u))
    c2_plus_mixedness: float
    l1_squared_plus_mixedness: float
    holds_lower: bool
    holds_upper: bool
    identity_error: float  # |C_l1^2 + M - 4u(1-u)|


def qubit_tradeoff_report(s: QubitState, *, tol: float = 1e-12) -> QubitTradeoff:
    """Two-sided bound on C_2 + M and the exact identity C_l1^2 + M = 4u(1-u)."""
    m = qubit_mixedness(s)
    lower = 4.0 * s.u * (1.0 - s.u)
    upper = 2.0 * math.sqrt(s.u * (1.0 - s.u))
    total = qubit_c2(s) + m
    l1 = 2.0 * abs(s.w)
    ident = l1 * l1 + m
    return QubitTradeoff(
        lower, upper, total, ident, total >= lower - tol, total <= upper + tol, abs(ident - lower)
    )


# -- figure data -----------------------------------------------------------------


@dataclass(frozen=True)
class Table:
    header: tuple[str, ...]
    rows: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.header.index(name)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([f"{x:.12g}" for x in row])
        return buf.getvalue()


def _alpha_label(alpha: float) -> str:
    return f"alpha_{alpha:g}"


def figure_data(
    alphas=(1.0, 2.0, 3.0, 4.0), points: int = 501, u_max: float = 0.5, scan_points: int = 2001
) -> tuple[Table, Table]:
    """Maximal alpha-coherence versus u, and the bounds 4u(1-u), 2 sqrt(u(1-u)).

    ``u`` runs over ``points`` equally spaced values in [0, u_max]; pass
    ``u_max=1`` to get both halves of the symmetric curves.
    """
    us = np.linspace(0.0, u_max, points)
    fig1 = np.empty((points, len(alphas) + 1))
    fig1[:, 0] = us
    for j, a in enumerate(alphas):
        fig1[:, j + 1] = [qubit_max_coherence(float(u), a, scan_points) for u in us]
    fig2 = np.column_stack([us, 4.0 * us * (1.0 - us), 2.0 * np.sqrt(us * (1.0 - us))])
    header1 = ("u",) + tuple(_alpha_label(a) for a in alphas)
    return Table(header1, fig1), Table(("u", "lower", "upper"), fig2)


def write_figures(outdir, **kwargs) -> tuple[Path, Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    fig1, fig2 = figure_data(**kwargs)
    p1, p2 = outdir / "fig1.csv", outdir / "fig2.csv"
    p1.write_text(fig1.to_csv())
    p2.write_text(fig2.to_csv())
    return p1, p2
