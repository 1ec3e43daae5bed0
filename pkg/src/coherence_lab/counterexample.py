"""Two-outcome incoherent measurement on a qutrit that separates the two
quadratic coherence measures.

The input state has a single coherence between levels 1 and 3. The Kraus pair
depends on a complex ``b`` (and ``a`` with |a|^2 + |b|^2 = 1). At alpha = 2 the
plain p_n-weighted average of C_2 exceeds C_2 of the input once |b| is large
enough, whereas the p_n^2 / q_n-weighted average never does. For the squared
l2 measure both averages exceed the input value at |b| = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import KrausSet, l2_generalized_monotonicity_report, strong_monotonicity_report
from .linalg import DensityMatrix

SQRT2 = math.sqrt(2.0)

#: C_2 of the example state, (2 sqrt 2 - 1) / 4
C2_STATE = (2.0 * SQRT2 - 1.0) / 4.0
#: the weighted average at |b| = 1, (2 + sqrt 2) / 8
WEIGHTED_AT_B1 = (2.0 + SQRT2) / 8.0


def example_state() -> DensityMatrix:
    return DensityMatrix(np.array([[1, 0, 1], [0, 2, 0], [1, 0, 1]], dtype=complex) / 4.0)


def example_kraus(b: complex, a: complex | None = None) -> KrausSet:
    """K_1 = |1><2| + a|3><3|, K_2 = |1><1| + b|2><3| (1-based levels)."""
    b = complex(b)
    if a is None:
        a = complex(math.sqrt(max(0.0, 1.0 - abs(b) ** 2)))
    k1 = np.array([[0, 1, 0], [0, 0, 0], [0, 0, a]], dtype=complex)
    k2 = np.array([[1, 0, 0], [0, 0, b], [0, 0, 0]], dtype=complex)
    return KrausSet([k1, k2])


@dataclass(frozen=True)
class ExampleRow:
    b: float
    p: tuple[float, float]
    q: tuple[float, float]
    c2_outcome2: float
    weighted_sum: float
    standard_sum: float
    c2_state: float
    holds_weighted: bool
    holds_standard: bool
    l2_state: float | None = None
    l2_weighted_sum: float | None = None
    l2_holds_weighted: bool | None = None

    def as_dict(self) -> dict:
        d = {
            "b": self.b,
            "p1": self.p[0],
            "p2": self.p[1],
            "q1": self.q[0],
            "q2": self.q[1],
            "c2_outcome2": self.c2_outcome2,
            "weighted_sum": self.weighted_sum,
            "standard_sum": self.standard_sum,
            "c2_state": self.c2_state,
            "holds_weighted": self.holds_weighted,
            "holds_standard": self.holds_standard,
        }
        if self.l2_state is not None:
            d.update(
                l2_state=self.l2_state,
                l2_weighted_sum=self.l2_weighted_sum,
                l2_holds_weighted=self.l2_holds_weighted,
            )
        return d


def evaluate(b: float, *, alpha: float = 2.0, with_l2: bool = False) -> ExampleRow:
    """All quantities of the example at coupling modulus ``b``."""
    rho = example_state()
    kraus = example_kraus(b)
    rep = strong_monotonicity_report(kraus, rho, alpha, chain=False)
    c2_2 = 0.0
    outcome2 = rep.outcome_coherence[1]
    if not math.isnan(outcome2):
        c2_2 = float(outcome2)
    row = dict(
        b=float(b),
        p=(float(rep.p[0]), float(rep.p[1])),
        q=(float(rep.q[0]), float(rep.q[1])),
        c2_outcome2=c2_2,
        weighted_sum=rep.weighted_sum,
        standard_sum=rep.standard_sum,
        c2_state=rep.c_input,
        holds_weighted=rep.holds_weighted,
        holds_standard=rep.holds_standard,
    )
    if with_l2:
        l2 = l2_generalized_monotonicity_report(kraus, rho, alpha)
        row.update(l2_state=l2.c_input, l2_weighted_sum=l2.weighted_sum, l2_holds_weighted=l2.holds_weighted)
    return ExampleRow(**row)


def analytic_row(b: float) -> dict:
    """Closed-form values at alpha = 2, used to cross-check :func:`evaluate`."""
    a2 = 1.0 - b * b
    return {
        "p1": (2.0 + a2) / 4.0,
        "p2": (1.0 + b * b) / 4.0,
        "q1": (SQRT2 + a2) / (2.0 + SQRT2),
        "q2": (1.0 + b * b) / (2.0 + SQRT2),
        "c2_outcome2": 2.0 * b / (1.0 + b * b),
        "weighted_sum": (2.0 + SQRT2) * b / 8.0,
        "standard_sum": b / 2.0,
        "c2_state": C2_STATE,
    }


def sweep(points: int = 11, *, with_l2: bool = False) -> list[ExampleRow]:
    return [evaluate(b, with_l2=with_l2) for b in np.linspace(0.0, 1.0, points)]


__all__ = [
    "C2_STATE",
    "WEIGHTED_AT_B1",
    "analytic_row",
    "evaluate",
    "example_kraus",
    "example_state",
    "sweep",
]
