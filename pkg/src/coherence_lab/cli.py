"""Command-line front end.

Exit codes: 0 success, 2 parse error, 3 invariant violation (invalid state,
non-incoherent Kraus set, ...), 4 I/O error, 5 property violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

from . import counterexample
from .channels import strong_monotonicity_report
from .coherence import (
    ReferenceBasis,
    coherence_alpha,
    coherence_l1,
    coherence_l2,
    mixedness,
    purity_upper_bound,
    tradeoff_report,
)
from .config import DEFAULT_TOLERANCES, use_tolerances
from .divergence import AlphaParam, quantum_tsallis
from .errors import CoherenceLabError, ParseError
from .fuzz import MEASURES, CampaignConfig, run_campaign
from .io import dumps, matrix_to_obj, read_kraus, read_matrix
from .linalg import DensityMatrix
from .qubit import write_figures

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_IO = 4
EXIT_VIOLATION = 5

SEED_ENV = "COHERENCE_LAB_SEED"


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _alpha(text: str) -> float:
    try:
        a = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(a) or a <= 0:
        raise argparse.ArgumentTypeError(f"alpha must be > 0, got {text}")
    return a


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"{SEED_ENV} must be an integer, got {raw!r}", EXIT_PARSE) from None


def _read(reader, path):
    try:
        return reader(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc


def _state(path) -> DensityMatrix:
    return DensityMatrix(_read(read_matrix, path))


def _basis(args) -> ReferenceBasis | None:
    if getattr(args, "basis", None) is None:
        return None
    return ReferenceBasis(_read(read_matrix, args.basis))


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    try:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}", EXIT_IO) from exc


# -- commands --------------------------------------------------------------------


def cmd_coherence(args) -> int:
    rho = _state(args.input)
    basis = _basis(args)
    res = coherence_alpha(rho, args.alpha, basis)
    out = {
        "alpha": args.alpha,
        "dim": rho.dim,
        "value": res.value,
        "minimizer": res.minimizer.weights,
        "c_l1": coherence_l1(rho, basis),
        "c_l2": coherence_l2(rho, basis),
        "purity_bound": purity_upper_bound(rho, args.alpha),
    }
    if rho.dim > 1:
        out["mixedness"] = mixedness(rho)
        if args.alpha <= 2.0 or AlphaParam(args.alpha).is_limit_one:
            out["tradeoff_slack"] = tradeoff_report(rho, args.alpha, basis).slack
    _emit(dumps(out), args.out)
    return EXIT_OK


def cmd_closest(args) -> int:
    rho = _state(args.input)
    state = coherence_alpha(rho, args.alpha, _basis(args)).minimizer
    # the matrix keys make the output readable as a state file
    out = matrix_to_obj(state.matrix)
    out.update(alpha=args.alpha, weights=state.weights)
    _emit(dumps(out), args.out)
    return EXIT_OK


def cmd_divergence(args) -> int:
    rho, sigma = _state(args.rho), _state(args.sigma)
    val = quantum_tsallis(rho, sigma, args.alpha)
    _emit(dumps({"alpha": args.alpha, "divergence": val.to_json()}), args.out)
    return EXIT_OK


def cmd_monotonicity(args) -> int:
    rho = _state(args.input)
    kraus = _read(read_kraus, args.kraus)
    rep = strong_monotonicity_report(kraus, rho, args.alpha, _basis(args))
    out = {
        "alpha": rep.alpha,
        "c_input": rep.c_input,
        "weighted_sum": rep.weighted_sum,
        "standard_sum": rep.standard_sum,
        "p": rep.p,
        "q": rep.q,
        "outcome_coherence": rep.outcome_coherence,
        "holds_weighted": rep.holds_weighted,
        "holds_standard": rep.holds_standard,
        "chain": rep.chain,
        "holds_chain": rep.holds_chain,
    }
    _emit(dumps(out), args.out)
    return EXIT_OK if rep.holds_weighted and rep.holds_chain else EXIT_VIOLATION


def _table(rows) -> str:
    cols = list(rows[0].keys())
    lines = ["\t".join(cols)]
    for r in rows:
        cells = []
        for c in cols:
            v = r[c]
            if isinstance(v, bool):
                cells.append("pass" if v else "FAIL")
            elif v is None:
                cells.append("-")
            else:
                cells.append(f"{v:.12g}")
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def cmd_paper_example(args) -> int:
    rows = [r.as_dict() for r in counterexample.sweep(args.points, with_l2=args.l2)]
    if args.format == "table":
        _emit(_table(rows), args.out)
        return EXIT_OK
    at_one = counterexample.evaluate(1.0, with_l2=args.l2).as_dict()
    _emit(dumps({"rows": rows, "at_b1": at_one}), args.out)
    return EXIT_OK


def cmd_figures(args) -> int:
    try:
        if args.full_range:
            p1, p2 = write_figures(args.out, points=2 * args.points - 1, u_max=1.0)
        else:
            p1, p2 = write_figures(args.out, points=args.points)
    except OSError as exc:
        raise CliError(f"cannot write figures to {args.out}: {exc}", EXIT_IO) from exc
    print(p1)
    print(p2)
    return EXIT_OK


def _campaign_config(args) -> CampaignConfig:
    data = {}
    if args.config is not None:
        try:
            data = json.loads(_read(lambda p: Path(p).read_text(), args.config))
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid campaign config: {exc}") from exc
        if not isinstance(data, dict):
            raise ParseError("campaign config must be a JSON object")
    if args.seed is not None:
        data["master_seed"] = args.seed
    elif "master_seed" not in data:
        data["master_seed"] = _default_seed()
    if args.trials is not None:
        data["trials"] = args.trials
    if args.measure is not None:
        data["measure"] = args.measure
    if args.alpha:
        data["alphas"] = args.alpha
    try:
        return CampaignConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"invalid campaign config: {exc}") from exc


def cmd_fuzz(args) -> int:
    cfg = _campaign_config(args)
    report = run_campaign(cfg, workers=args.workers)
    _emit(json.dumps(report, indent=2, sort_keys=True), args.out)
    if not report["ok"]:
        print(f"asserted properties violated: {', '.join(report['asserted_violations'])}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

_TOL_FIELDS = [f.name for f in dataclasses.fields(DEFAULT_TOLERANCES) if isinstance(f.default, float)]


def _add_common(p: argparse.ArgumentParser, *, alpha: bool = True, basis: bool = True) -> None:
    if alpha:
        p.add_argument("--alpha", type=_alpha, default=2.0, help="order alpha > 0 (default 2)")
    if basis:
        p.add_argument("--basis", help="unitary whose columns are the reference basis (matrix JSON)")
    p.add_argument("--out", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coherence-lab", description="Tsallis relative alpha-entropy coherence toolkit"
    )
    tol = parser.add_argument_group("tolerances")
    for name in _TOL_FIELDS:
        tol.add_argument(
            f"--tol-{name.replace('_', '-')}",
            dest=f"tol_{name}",
            type=float,
            metavar="X",
            help=f"default {getattr(DEFAULT_TOLERANCES, name):g}",
        )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coherence", help="alpha-coherence, minimizer and related quantities of a state")
    p.add_argument("input", help="density matrix JSON")
    _add_common(p)
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("closest", help="closest incoherent state")
    p.add_argument("input")
    _add_common(p)
    p.set_defaults(func=cmd_closest)

    p = sub.add_parser("divergence", help="quantum Tsallis divergence D_alpha(rho || sigma)")
    p.add_argument("rho")
    p.add_argument("sigma")
    _add_common(p, basis=False)
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("monotonicity", help="strong monotonicity report for a Kraus set")
    p.add_argument("input", help="density matrix JSON")
    p.add_argument("kraus", help="Kraus set JSON")
    _add_common(p)
    p.set_defaults(func=cmd_monotonicity)

    p = sub.add_parser("paper-example", help="sweep of the two-outcome qutrit example over |b|")
    p.add_argument("--points", type=_positive_int, default=11, help="number of |b| values in [0, 1]")
    p.add_argument("--l2", action="store_true", help="include the squared l2 measure")
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_paper_example)

    p = sub.add_parser("figures", help="write fig1.csv and fig2.csv")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--points", type=_positive_int, default=501, help="u grid size on [0, 1/2]")
    p.add_argument("--full-range", action="store_true", help="cover u in [0, 1] with the same spacing")
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("fuzz", help="randomized property campaign")
    p.add_argument("--config", help="campaign config JSON")
    p.add_argument("--seed", type=int, help=f"master seed (falls back to ${SEED_ENV}, then 0)")
    p.add_argument("--trials", type=_positive_int)
    p.add_argument("--measure", choices=MEASURES)
    p.add_argument("--alpha", type=_alpha, action="append", help="repeat to test several orders")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fuzz)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {name: v for name in _TOL_FIELDS if (v := getattr(args, f"tol_{name}")) is not None}
    try:
        with use_tolerances(**overrides):
            return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CoherenceLabError as exc:
        print(f"invalid input: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
