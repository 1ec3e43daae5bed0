"""Numerical tolerances.

Defaults live in :data:`DEFAULT_TOLERANCES`. They can be overridden for a
block of code with :func:`use_tolerances`; the override is stored in a
context variable, so concurrent threads do not see each other's settings.
"""

from __future__ import annotations

import contextlib
import contextvars
import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-10
    trace: float = 1e-9
    psd: float = 1e-9
    rank: float = 1e-10  # relative to the largest eigenvalue
    recon: float = 1e-9
    range: float = 1e-8
    prob_floor: float = 1e-12
    kraus_entry: float = 1e-10
    completeness: float = 1e-9
    negative_clamp: float = 1e-12
    jacobi_offdiag: float = 1e-12  # relative to the Frobenius norm
    jacobi_max_sweeps: int = 100


DEFAULT_TOLERANCES = Tolerances()

_current: contextvars.ContextVar[Tolerances] = contextvars.ContextVar(
    "coherence_lab_tolerances", default=DEFAULT_TOLERANCES
)


def get_tolerances() -> Tolerances:
    return _current.get()


@contextlib.contextmanager
def use_tolerances(**overrides):
    """Temporarily replace selected tolerances, e.g. ``use_tolerances(range=1e-6)``."""
    token = _current.set(dataclasses.replace(_current.get(), **overrides))
    try:
        yield _current.get()
    finally:
        _current.reset(token)
