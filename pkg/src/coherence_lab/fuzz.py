"""Seeded randomized campaigns over the monotonicity and convexity properties.

Every trial draws its own generator from ``(master_seed, trial_index)``, so a
reported violation can be replayed with :func:`run_trial` alone. Trials are
independent; results are folded in index order, which makes reports
byte-identical for identical configurations regardless of ``workers``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .channels import (
    KrausSet,
    l2_generalized_monotonicity_report,
    lift_block_column,
    random_channel,
    random_density,
    random_incoherent_kraus,
    random_unitary,
    sandwich,
    selective_average,
    strong_monotonicity_report,
    outcome_split_sides,
)
from .coherence import ReferenceBasis, coherence_alpha, coherence_l1, coherence_l2
from .counterexample import example_kraus, example_state
from .divergence import AlphaParam, quantum_tsallis
from .linalg import DensityMatrix

MEASURES = ("c_alpha", "c_l1", "c_l2")

# property -> measures under which a violation fails the campaign
ASSERTED = {
    "tpcp_monotonicity": MEASURES,
    "joint_convexity": MEASURES,
    "gap_identity": MEASURES,
    "gap_nonnegative": MEASURES,
    "mixing_convexity": MEASURES,
    "channel_monotonicity": ("c_alpha", "c_l1"),
    "weighted_monotonicity": ("c_alpha",),
    "proof_chain": ("c_alpha",),
    "standard_monotonicity": ("c_l2",),
    "generalized_l2_monotonicity": ("c_l2",),
}

MEASURE_PROPERTIES = {
    "c_alpha": (
        "tpcp_monotonicity",
        "joint_convexity",
        "gap_identity",
        "gap_nonnegative",
        "mixing_convexity",
        "channel_monotonicity",
        "weighted_monotonicity",
        "proof_chain",
        "standard_monotonicity",
    ),
    "c_l1": (
        "tpcp_monotonicity",
        "joint_convexity",
        "gap_identity",
        "gap_nonnegative",
        "mixing_convexity",
        "channel_monotonicity",
        "standard_monotonicity",
    ),
    "c_l2": (
        "tpcp_monotonicity",
        "joint_convexity",
        "gap_identity",
        "gap_nonnegative",
        "mixing_convexity",
        "channel_monotonicity",
        "standard_monotonicity",
        "generalized_l2_monotonicity",
    ),
}

# properties that only hold for alpha in (0, 2]
_ALPHA_LE_2 = {
    "tpcp_monotonicity",
    "joint_convexity",
    "mixing_convexity",
    "channel_monotonicity",
    "weighted_monotonicity",
    "proof_chain",
}


@dataclass(frozen=True)
class CampaignConfig:
    master_seed: int = 0
    trials: int = 1000
    dims: tuple[int, ...] = (2, 3, 4)
    ranks: tuple[int, ...] | None = None  # None: uniform over 1..d
    alphas: tuple[float, ...] = (0.3, 0.5, 1.0, 1.5, 2.0)
    measure: str = "c_alpha"
    max_outcomes: int = 3
    include_anchor: bool = True
    properties: tuple[str, ...] | None = None  # None: all for the measure
    tol: float = 1e-9
    max_reported: int = 20

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise ValueError(f"measure must be one of {MEASURES}, got {self.measure!r}")
        if self.trials < 0:
            raise ValueError("trials must be >= 0")
        if not self.dims or min(self.dims) < 1:
            raise ValueError("dims must be positive")
        if not self.alphas or min(self.alphas) <= 0:
            raise ValueError("alphas must be positive")
        for name in ("dims", "alphas", "ranks", "properties"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, tuple(v))
        unknown = set(self.properties or ()) - set(MEASURE_PROPERTIES[self.measure])
        if unknown:
            raise ValueError(f"properties {sorted(unknown)} not available for {self.measure}")

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown campaign keys: {sorted(extra)}")
        return cls(**d)

    def active_properties(self) -> tuple[str, ...]:
        return self.properties or MEASURE_PROPERTIES[self.measure]


@dataclass
class TrialResult:
    index: int | str
    seed: list | None
    alpha: float
    dim: int
    margins: dict = field(default_factory=dict)  # property -> margin (>= -tol means pass)


def _properties_for(cfg: CampaignConfig, alpha: float) -> set:
    props = set(cfg.active_properties())
    if alpha > 2.0 and not AlphaParam(alpha).is_limit_one:
        # the norm-based measures do not depend on alpha
        props -= _ALPHA_LE_2 if cfg.measure == "c_alpha" else {"tpcp_monotonicity", "joint_convexity"}
    return props


def _measure_fn(measure: str, alpha: float):
    if measure == "c_alpha":
        return lambda rho, basis: coherence_alpha(rho, alpha, basis).value
    if measure == "c_l1":
        return coherence_l1
    return coherence_l2


def _dirichlet(rng, k):
    return rng.dirichlet(np.ones(k))


def _rotated_kraus(kraus: KrausSet, basis_in: ReferenceBasis, out_bases) -> KrausSet:
    ops = [b.unitary @ k @ basis_in.unitary.conj().T for k, b in zip(kraus.operators, out_bases)]
    return KrausSet(ops, out_bases)


def _trial_setup(cfg: CampaignConfig, rng: np.random.Generator):
    d = int(rng.choice(cfg.dims))
    ranks = [r for r in (cfg.ranks or range(1, d + 1)) if 1 <= r <= d] or [d]
    rank = int(rng.choice(ranks))
    alpha = float(rng.choice(cfg.alphas))
    n_out = int(rng.integers(1, cfg.max_outcomes + 1))
    out_dims = [int(m) for m in rng.integers(1, d + 2, size=n_out)]
    while sum(out_dims) < d:
        out_dims[int(rng.integers(n_out))] += 1
    rho = random_density(d, rank, rng)
    kraus = random_incoherent_kraus(d, out_dims, rng)
    if rng.random() < 0.5:
        b_in = ReferenceBasis(random_unitary(d, rng))
        out_bases = [ReferenceBasis(random_unitary(m, rng)) for m in out_dims]
        kraus = _rotated_kraus(kraus, b_in, out_bases)
    else:
        b_in = ReferenceBasis.identity(d)
    return d, alpha, rho, kraus, b_in


def _selective_margins(cfg, props, res, rho, kraus, b_in, alpha, measure):
    margins = res.margins
    if cfg.measure == "c_alpha" and ({"weighted_monotonicity", "proof_chain", "standard_monotonicity"} & props):
        if "weighted_monotonicity" in props or "proof_chain" in props:
            rep = strong_monotonicity_report(kraus, rho, alpha, b_in, chain="proof_chain" in props)
            if "weighted_monotonicity" in props:
                margins["weighted_monotonicity"] = math.inf if rep.infinite_weight else rep.weighted_gap
            if "proof_chain" in props:
                margins["proof_chain"] = min(rep.chain_margins)
            if "standard_monotonicity" in props:
                margins["standard_monotonicity"] = rep.standard_gap
        elif "standard_monotonicity" in props:
            avg, c_in = selective_average(kraus, rho, measure, b_in)
            margins["standard_monotonicity"] = c_in - avg
    elif "standard_monotonicity" in props:
        avg, c_in = selective_average(kraus, rho, measure, b_in)
        margins["standard_monotonicity"] = c_in - avg
    if "generalized_l2_monotonicity" in props:
        rep = l2_generalized_monotonicity_report(kraus, rho, alpha, b_in)
        margins["generalized_l2_monotonicity"] = rep.c_input - rep.weighted_sum
    if "channel_monotonicity" in props:
        lifted = lift_block_column(kraus)
        out = DensityMatrix(sum(sandwich(k, rho.matrix) for k in lifted.operators))
        margins["channel_monotonicity"] = measure(rho, b_in) - measure(out, lifted.output_bases[0])


def run_trial(cfg: CampaignConfig, index: int) -> TrialResult:
    """Draw and evaluate trial ``index`` of the campaign."""
    rng = np.random.default_rng([cfg.master_seed, index])
    d, alpha, rho, kraus, b_in = _trial_setup(cfg, rng)
    props = _properties_for(cfg, alpha)
    res = TrialResult(index, [cfg.master_seed, index], alpha, d)
    measure = _measure_fn(cfg.measure, alpha)

    if "tpcp_monotonicity" in props:
        sigma = random_density(d, d, rng)
        d_out = int(rng.integers(1, d + 2))
        n_ops = max(int(rng.integers(1, 4)), -(-d // d_out))
        chan = random_channel(d, d_out, n_ops, rng)
        before = float(quantum_tsallis(rho, sigma, alpha))
        after = float(quantum_tsallis(_apply(chan, rho), _apply(chan, sigma), alpha))
        res.margins["tpcp_monotonicity"] = before - after

    if "joint_convexity" in props:
        k = int(rng.integers(2, 4))
        w = _dirichlet(rng, k)
        rhos = [random_density(d, int(rng.integers(1, d + 1)), rng) for _ in range(k)]
        sigmas = [random_density(d, d, rng) for _ in range(k)]
        mix_r = DensityMatrix(sum(wi * r.matrix for wi, r in zip(w, rhos)))
        mix_s = DensityMatrix(sum(wi * s.matrix for wi, s in zip(w, sigmas)))
        rhs = sum(wi * float(quantum_tsallis(r, s, alpha)) for wi, r, s in zip(w, rhos, sigmas))
        res.margins["joint_convexity"] = rhs - float(quantum_tsallis(mix_r, mix_s, alpha))

    if {"gap_identity", "gap_nonnegative"} & props:
        sigma = random_density(d, d, rng)
        sides = outcome_split_sides(kraus, rho, sigma, alpha)
        if "gap_identity" in props:
            # relative to the size of the sides, whose difference cancels digits
            res.margins["gap_identity"] = -abs(sides.gap - sides.classical) / max(1.0, abs(sides.lhs))
        if "gap_nonnegative" in props:
            res.margins["gap_nonnegative"] = sides.gap

    if "mixing_convexity" in props:
        k = int(rng.integers(2, 4))
        w = _dirichlet(rng, k)
        states = [random_density(d, int(rng.integers(1, d + 1)), rng) for _ in range(k)]
        mix = DensityMatrix(sum(wi * s.matrix for wi, s in zip(w, states)))
        rhs = sum(wi * measure(s, b_in) for wi, s in zip(w, states))
        res.margins["mixing_convexity"] = rhs - measure(mix, b_in)

    _selective_margins(cfg, props, res, rho, kraus, b_in, alpha, measure)
    return res


def _apply(kraus: KrausSet, rho: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(sum(sandwich(k, rho.matrix) for k in kraus.operators))


def anchor_trials(cfg: CampaignConfig) -> list[TrialResult]:
    """The qutrit example at |b| = 1, once per configured alpha."""
    props = set(cfg.active_properties()) & {
        "weighted_monotonicity",
        "proof_chain",
        "standard_monotonicity",
        "generalized_l2_monotonicity",
        "channel_monotonicity",
    }
    rho = example_state()
    kraus = example_kraus(1.0)
    b_in = ReferenceBasis.identity(3)
    out = []
    for alpha in sorted(set(cfg.alphas)):
        res = TrialResult(f"anchor:b=1,alpha={alpha:g}", None, alpha, 3)
        p = props & _properties_for(cfg, alpha)
        _selective_margins(cfg, p, res, rho, kraus, b_in, alpha, _measure_fn(cfg.measure, alpha))
        out.append(res)
    return out


def _round(x: float) -> float | None:
    if x is None or not math.isfinite(x):
        return None
    return float(f"{x:.12g}")


def aggregate(cfg: CampaignConfig, results) -> dict:
    """Fold trial results (in the given order) into a JSON-serialisable report."""
    stats = {
        name: {
            "asserted": cfg.measure in ASSERTED[name],
            "checked": 0,
            "passed": 0,
            "failed": 0,
            "min_margin": None,
            "violations": [],
        }
        for name in cfg.active_properties()
    }
    for res in results:
        for name, margin in res.margins.items():
            s = stats[name]
            s["checked"] += 1
            if math.isfinite(margin) and (s["min_margin"] is None or margin < s["min_margin"]):
                s["min_margin"] = margin
            if margin >= -cfg.tol:
                s["passed"] += 1
                continue
            s["failed"] += 1
            # anchor instances are always listed; random trials up to max_reported
            if isinstance(res.index, str) or len(s["violations"]) < cfg.max_reported:
                s["violations"].append(
                    {"trial": res.index, "seed": res.seed, "alpha": res.alpha, "dim": res.dim, "margin": _round(margin)}
                )
    for s in stats.values():
        s["min_margin"] = _round(s["min_margin"])
    failed = sorted(n for n, s in stats.items() if s["asserted"] and s["failed"])
    config = asdict(cfg)
    return {
        "config": config,
        "properties": stats,
        "asserted_violations": failed,
        "ok": not failed,
    }


def run_campaign(cfg: CampaignConfig, *, workers: int = 1) -> dict:
    indices = range(cfg.trials)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_trial, [cfg] * cfg.trials, indices, chunksize=64))
    else:
        results = [run_trial(cfg, i) for i in indices]
    if cfg.include_anchor:
        results.extend(anchor_trials(cfg))
    return aggregate(cfg, results)


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)
