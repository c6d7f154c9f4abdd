"""Command line interface: JSON config in, CSV out.

Subcommands ``complexity``, ``curve``, ``compare``, ``diagnose`` and
``spectrum``.  Grid points are evaluated by a thread pool but rows are always
emitted in grid order, so output bytes do not depend on ``--threads``.

Exit codes: 0 success, 2 configuration error, 3 every row hit a regime
error, 4 term cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Callable, Sequence

from . import __version__
from .asymptotics import (
    homogeneous_limit_spec,
    korobov_limit_spec,
    korobov_linear_prediction,
    theorem2_prediction,
    theorem3_log_prediction,
)
from .complexity import exact_complexity, homogeneous_complexity, reduced_complexity
from .config import RUN_METHODS, RunConfig, load_config
from .errors import ComplexityError, ConfigurationError, DomainError, RegimeError, ResourceError, ValidationError
from .field import (
    assemble,
    assumption2_ratio,
    epsilon_0,
    epsilon_d,
    lambda0_ratio,
    merged_stream,
)
from .spectra import SequenceModel
from .spectral_df import build_Uj, build_Wd, integral_complexity, midpoint_grid, sup_distance

Row = list

COMPLEXITY_HEADER = [
    "d", "eps", "method", "n", "threshold", "achieved_partial_sum", "terms_consumed", "prediction", "flag",
]
COMPARE_HEADER = [
    "d", "eps", "n_exact", "n_reduced", "n_integral", "asymptotic_prediction",
    "ratio_exact_over_prediction", "flag",
]
DIAGNOSE_HEADER = [
    "d", "eps_d", "lambda0_ratio", "assumption2_ratio", "trace_partial_sum", "Uj_dist", "Wd_dist",
]
SPECTRUM_HEADER = ["rank", "value", "source_j"]

# truncation level for per-marginal distributions in diagnostics
UJ_MASS_TARGET = 1.0 - 1e-6


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _pmap(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def asymptotic_prediction(model: SequenceModel, d: int, eps: float) -> tuple[float | None, str]:
    """Predicted ``n`` from the applicable asymptotic law, or ``None`` with a flag."""
    try:
        if model.family == "homogeneous":
            return theorem2_prediction(model, d, eps, homogeneous_limit_spec(model)).predicted_n, ""
        if model.family != "korobov_parametric":
            return None, "no-limit-spec"
        if model.degenerate:
            return None, "degenerate"
        if model.tau > 1:
            return None, "bounded"
        eps0 = epsilon_0(model)
        if eps >= eps0:
            return None, "regime:n=1"
        if model.tau < 1:
            return korobov_linear_prediction(d, eps, model.tau, eps0), ""
        if d < 2:
            return None, "regime:d<2"
        spec = korobov_limit_spec(model.c, model.tau)
        return math.exp(theorem3_log_prediction(model, d, eps, spec).predicted_log_n), ""
    except RegimeError as exc:
        return None, f"regime:{exc.kind}" if exc.kind == "n=1" else exc.kind


def _join(*flags: str) -> str:
    return ";".join(dict.fromkeys(f for f in flags if f))


def _methods(config: RunConfig) -> list[str]:
    if config.method != "all":
        return [config.method]
    out = ["exact", "reduced", "integral"]
    if config.model.family == "homogeneous":
        out.append("homogeneous")
    return out + ["asymptotic"]


def _complexity_rows(config: RunConfig, d: int) -> list[Row]:
    model = config.model
    fld = None
    rows = []
    for eps in config.eps:
        for method in _methods(config):
            if method == "asymptotic":
                pred, flag = asymptotic_prediction(model, d, eps)
                rows.append([d, eps, method, None, None, None, None, pred, flag])
                continue
            try:
                if method == "homogeneous":
                    res = homogeneous_complexity(model.marginals[0], d, eps, config.term_cap)
                else:
                    fld = fld or assemble(model, d)
                    fn = {"exact": exact_complexity, "reduced": reduced_complexity,
                          "integral": integral_complexity}[method]
                    res = fn(fld, eps, config.term_cap)
            except RegimeError as exc:
                rows.append([d, eps, method, None, None, None, None, None, f"regime:{exc.kind}"])
                continue
            rows.append([d, eps, method, res.n, res.threshold, res.achieved_partial_sum,
                         res.terms_consumed, None, ""])
    return rows


def run_curve(config: RunConfig) -> tuple[list[str], list[Row]]:
    per_d = _pmap(lambda d: _complexity_rows(config, d), list(config.d_grid), config.threads)
    return COMPLEXITY_HEADER, [r for rows in per_d for r in rows]


def run_complexity(config: RunConfig) -> tuple[list[str], list[Row]]:
    single = replace(config, eps=config.eps[:1], d_grid=config.d_grid[:1], threads=1)
    return run_curve(single)


def _compare_rows(config: RunConfig, d: int) -> list[Row]:
    fld = assemble(config.model, d)
    rows = []
    for eps in config.eps:
        n_exact = exact_complexity(fld, eps, config.term_cap).n
        flags = []
        try:
            n_reduced = reduced_complexity(fld, eps, config.term_cap).n
            n_integral = integral_complexity(fld, eps, config.term_cap).n
        except RegimeError as exc:
            n_reduced = n_integral = None
            flags.append(f"regime:{exc.kind}")
        pred, flag = asymptotic_prediction(config.model, d, eps)
        flags.append(flag)
        ratio = n_exact / pred if pred else None
        rows.append([d, eps, n_exact, n_reduced, n_integral, pred, ratio, _join(*flags)])
    return rows


def run_compare(config: RunConfig) -> tuple[list[str], list[Row]]:
    per_d = _pmap(lambda d: _compare_rows(config, d), list(config.d_grid), config.threads)
    return COMPARE_HEADER, [r for rows in per_d for r in rows]


def _uj_distance(model: SequenceModel, j: int) -> float | None:
    """Distance of the shifted j-th marginal distribution from ``1(x >= 0)``."""
    if model.family != "korobov_parametric" or model.degenerate:
        if model.family == "homogeneous":
            return 0.0
        return None
    ell = -math.log(model.c) + model.tau * math.log(j)
    Uj = build_Uj(model.marginal(j), shift=ell, mass_target=UJ_MASS_TARGET)
    return sup_distance(Uj, lambda x: 1.0 if x >= 0 else 0.0, midpoint_grid(Uj))


def _wd_distance(model: SequenceModel, d: int) -> float | None:
    if model.family == "homogeneous":
        return 0.0
    if model.family != "korobov_parametric" or model.degenerate or model.tau > 1:
        return None
    spec = korobov_limit_spec(model.c, model.tau)
    if spec.b_d is not None:
        if d < 2:
            return None
        Wd = build_Wd(model, d, spec.ell, spec.a_d(d), spec.b_d(d), spec.sign)
    else:
        Wd = build_Wd(model, d, spec.ell, spec.a_d(d), 1.0, spec.sign)
    return sup_distance(Wd, spec.W, midpoint_grid(Wd))


def _diagnose_row(config: RunConfig, d: int) -> Row:
    model = config.model
    fld = assemble(model, d)
    return [
        d,
        epsilon_d(fld),
        lambda0_ratio(fld),
        assumption2_ratio(fld),
        fld.reduced_trace_sum,
        _uj_distance(model, d),
        _wd_distance(model, d),
    ]


def run_diagnose(config: RunConfig) -> tuple[list[str], list[Row]]:
    rows = _pmap(lambda d: _diagnose_row(config, d), list(config.d_grid), config.threads)
    return DIAGNOSE_HEADER, rows


def run_spectrum(config: RunConfig, top: int = 20) -> tuple[list[str], list[Row]]:
    """The ``top`` largest reduced eigenvalues of the field at the last grid point."""
    fld = assemble(config.model, config.d_grid[-1])
    return SPECTRUM_HEADER, [[k, v, j] for k, (v, j) in enumerate(merged_stream(fld).take(top), start=1)]


def write_csv(header: list[str], rows: list[Row], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])


def render_csv(header: list[str], rows: list[Row]) -> str:
    buf = io.StringIO()
    write_csv(header, rows, buf)
    return buf.getvalue()


def _all_regime(header: list[str], rows: list[Row]) -> bool:
    if "flag" not in header or not rows:
        return False
    i = header.index("flag")
    return all("regime" in (r[i] or "") for r in rows)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="addcomplexity",
        description="Average-case approximation complexity of additive random fields.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("complexity", "n(eps) at the first grid point and first eps"),
        ("curve", "n(eps) along the d grid"),
        ("compare", "exact, reduced, integral and asymptotic side by side"),
        ("diagnose", "assumption diagnostics and limit distances"),
        ("spectrum", "largest merged eigenvalues with source marginals"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output CSV path (default stdout)")
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: CPU count)")
        p.add_argument("--method", choices=RUN_METHODS, default=None, help="override config method")
        if name == "spectrum":
            p.add_argument("--top", type=int, default=20, help="number of eigenvalues")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, threads=args.threads, output=args.out)
        if args.method is not None:
            if args.method == "homogeneous" and config.model.family != "homogeneous":
                raise ConfigurationError("method: homogeneous requires model.family = homogeneous")
            config = replace(config, method=args.method)
        if args.command == "spectrum":
            if args.top < 1:
                raise ConfigurationError("--top must be >= 1")
            header, rows = run_spectrum(config, args.top)
        else:
            runner = {"complexity": run_complexity, "curve": run_curve,
                      "compare": run_compare, "diagnose": run_diagnose}[args.command]
            header, rows = runner(config)
    except (ConfigurationError, ValidationError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ResourceError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return 4
    except RegimeError as exc:
        print(f"regime error: {exc}", file=sys.stderr)
        return 3
    except ComplexityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    text = render_csv(header, rows)
    if config.output:
        with open(config.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 3 if _all_regime(header, rows) else 0


if __name__ == "__main__":
    sys.exit(main())
