"""Command-line front end: measures in, CSV/JSON result tables out.

Subcommands: spectrum, dims, partition, coarse, order, empirical, probe,
validate. Flags mirror config-file keys one-to-one; `--config file.json`
loads the same schema with explicit flags taking precedence. Real grids use
"a:b:step", integer level ranges "a..b", thresholds either a comma list or
"pow2:a..b" for 2^-a .. 2^-b, and the literal "inf" is accepted for p or q.

Exit codes: 0 success, 1 validation/solver failure, 2 resource cap,
64 usage error, 66 unreadable input file.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import pickle
import sys
from fractions import Fraction

from . import __version__, reports
from .coarse import coarse_profile, default_alpha_grid
from .empirical import decay_experiment, packing_probe
from .errors import ParseError, ResourceLimitError, SolverError, ValidationError
from .functions import catalog
from .measures import (
    DEFAULT_MAX_CUBES,
    IfsMeasure,
    MeasureModel,
    ingest_points,
    load_measure,
)
from .orders import EmbeddingParams, dual_exponent, geometric_bounds, lower_order, upper_order
from .partition import DEFAULT_MAX_CELLS, build_partition, entropy_slope
from .spectrum import beta_n, closed_form_spectrum, empirical_spectrum, minkowski

EX_OK = 0
EX_FAIL = 1
EX_RESOURCE = 2
EX_USAGE = 64
EX_NOINPUT = 66


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EX_USAGE)


def parse_extended(text: str) -> float:
    if str(text).strip().lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def parse_levels(text: str) -> list[int]:
    text = str(text).strip()
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(tok) for tok in text.split(",") if tok.strip()]


def parse_grid(text: str) -> list[float]:
    """Real grid "a:b:step" (exact decimal stepping) or a comma list."""
    text = str(text).strip()
    if ":" in text:
        a, b, step = (Fraction(tok) for tok in text.split(":"))
        if step <= 0:
            raise ParseError("grid step must be positive")
        out = []
        x = a
        while x <= b:
            out.append(float(x))
            x += step
        return out
    return [float(tok) for tok in text.split(",") if tok.strip()]


def parse_thresholds(text: str) -> list[float]:
    text = str(text).strip()
    if text.startswith("pow2:"):
        lo, hi = text[5:].split("..")
        return [2.0 ** (-k) for k in range(int(lo), int(hi) + 1)]
    if ":" in text:
        return parse_grid(text)
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _load_model(path: str, weight_column=None) -> MeasureModel:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise FileNotFoundError(f"cannot read measure spec {path}: {exc}") from exc
    if path.endswith(".csv"):
        return ingest_points(data.decode(), weight_column)
    return load_measure(data)


def _cache_path(model: MeasureModel) -> str | None:
    cache_dir = os.environ.get("WIDTHLAB_CACHE_DIR")
    if not cache_dir or not isinstance(model, IfsMeasure):
        return None
    key = hashlib.sha256(
        json.dumps(model.to_spec(), sort_keys=True).encode()
    ).hexdigest()[:24]
    return os.path.join(cache_dir, f"mass-memo-{key}.pkl")


def _load_cache(model: MeasureModel) -> None:
    path = _cache_path(model)
    if path and os.path.exists(path):
        try:
            with open(path, "rb") as fh:
                model._memo.update(pickle.load(fh))
        except Exception:
            pass  # cache is best-effort


def _save_cache(model: MeasureModel) -> None:
    path = _cache_path(model)
    if path:
        try:
            os.makedirs(os.path.dirname(path), exist_ok=True)
            with open(path, "wb") as fh:
                pickle.dump(model._memo, fh)
        except Exception:
            pass


def _merged(args, config: dict, key: str, default=None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    return config.get(key, default)


def _require(value, name: str):
    if value is None:
        raise ValidationError(f"missing required option --{name.replace('_', '-')}")
    return value


def _emit_csv(out, columns, rows, config):
    if out is None:
        print(reports.header_line(config))
        print(",".join(columns))
        for row in rows:
            print(",".join(reports._fmt(v) for v in row))
    else:
        reports.write_csv(out, columns, rows, config)


def _emit_json(out, payload, config):
    if out is None:
        print(reports.header_line(config))
        print(json.dumps(payload, sort_keys=True, indent=2, default=str))
    else:
        reports.write_json(out, payload, config)


def _embedding(args, config, model) -> EmbeddingParams:
    m = _merged(args, config, "m", model.m)
    if int(m) != model.m:
        raise ValidationError(f"--m {m} does not match measure dimension {model.m}")
    sigma = int(_require(_merged(args, config, "sigma"), "sigma"))
    p = parse_extended(_require(_merged(args, config, "p"), "p"))
    q = parse_extended(_require(_merged(args, config, "q"), "q"))
    return EmbeddingParams(m=model.m, sigma=sigma, p=p, q=q)


def _rho(args, config, model) -> float:
    rho = _merged(args, config, "rho")
    if rho is not None:
        rho = float(rho)
        if rho <= 0:
            raise ValidationError("--rho must be positive")
        return rho
    params = _embedding(args, config, model)
    if math.isinf(params.q):
        raise ValidationError("q = inf has no finite rho; pass --rho directly")
    return params.rho


def _config_dict(args, model) -> dict:
    cfg = {k: v for k, v in vars(args).items() if v is not None and k != "func"}
    cfg["tool_version"] = __version__
    cfg["measure_spec"] = model.to_spec()
    return cfg


# -- subcommand implementations ----------------------------------------------


def cmd_spectrum(args, config):
    model = _load_model(_require(_merged(args, config, "measure"), "measure"),
                        _merged(args, config, "weight_column"))
    _load_cache(model)
    levels = parse_levels(_merged(args, config, "levels", "4..10"))
    t_grid = parse_grid(_merged(args, config, "t_grid", "0:1.5:0.05"))
    max_cubes = int(_merged(args, config, "max_cubes", DEFAULT_MAX_CUBES))
    cfg = _config_dict(args, model)
    rows = [
        (n, t, beta_n(model, n, t, max_cubes)) for n in levels for t in t_grid
    ]
    _emit_csv(_merged(args, config, "out"), ["n", "t", "beta_n"], rows, cfg)
    curve = closed_form_spectrum(model)
    if curve is not None and _merged(args, config, "out") is not None:
        print(f"closed form available: {curve.label}")
    _save_cache(model)
    return EX_OK


def cmd_dims(args, config):
    model = _load_model(_require(_merged(args, config, "measure"), "measure"),
                        _merged(args, config, "weight_column"))
    _load_cache(model)
    levels = parse_levels(_merged(args, config, "levels", "4..10"))
    max_cubes = int(_merged(args, config, "max_cubes", DEFAULT_MAX_CUBES))
    est = minkowski(model, levels, max_cubes)
    cfg = _config_dict(args, model)
    rows = list(zip(est.levels, est.values))
    _emit_csv(_merged(args, config, "out"), ["n", "boxdim"], rows, cfg)
    _save_cache(model)
    return EX_OK


def cmd_partition(args, config):
    model = _load_model(_require(_merged(args, config, "measure"), "measure"),
                        _merged(args, config, "weight_column"))
    _load_cache(model)
    rho = _rho(args, config, model)
    thresholds = parse_thresholds(
        _require(_merged(args, config, "thresholds"), "thresholds")
    )
    max_cells = int(_merged(args, config, "max_cells", DEFAULT_MAX_CELLS))
    cfg = _config_dict(args, model)
    rows = []
    cell_rows = []
    for t in thresholds:
        part = build_partition(model, rho, t, max_cells)
        rows.append((t, part.card, part.min_level, part.max_level, part.max_j))
        cell_rows.extend((t, str(cell)) for cell in part.cells)
    _emit_csv(
        _merged(args, config, "out"),
        ["t", "card", "min_level", "max_level", "max_j"],
        rows,
        cfg,
    )
    cells_out = _merged(args, config, "cells_out")
    if cells_out:
        reports.write_csv(cells_out, ["t", "cell"], cell_rows, cfg)
    if len(thresholds) >= 3:
        try:
            fit = entropy_slope(model, rho, thresholds, max_cells)
            print(f"entropy slope estimate: {fit.slope!r}")
        except SolverError:
            pass
    _save_cache(model)
    return EX_OK


def cmd_coarse(args, config):
    model = _load_model(_require(_merged(args, config, "measure"), "measure"),
                        _merged(args, config, "weight_column"))
    _load_cache(model)
    rho = _rho(args, config, model)
    levels = parse_levels(_merged(args, config, "levels", "4..10"))
    alpha_opt = _merged(args, config, "alpha_grid")
    alpha_grid = parse_grid(alpha_opt) if alpha_opt else default_alpha_grid(model.m, rho)
    max_cubes = int(_merged(args, config, "max_cubes", DEFAULT_MAX_CUBES))
    prof = coarse_profile(model, levels, rho, alpha_grid, max_cubes)
    cfg = _config_dict(args, model)
    rows = []
    for i, n in enumerate(prof.levels):
        for j, alpha in enumerate(prof.alpha_grid):
            count = prof.counts[i][j]
            f_est = math.log2(max(count, 1)) / n
            rows.append((n, alpha, count, f_est))
    _emit_csv(_merged(args, config, "out"), ["n", "alpha", "count", "F_est"], rows, cfg)
    summary_out = _merged(args, config, "summary")
    _emit_json(summary_out, prof.summary(), cfg) if summary_out else print(
        json.dumps(prof.summary(), sort_keys=True)
    )
    _save_cache(model)
    return EX_OK


def _order_report(model, params, levels, max_cubes, with_lower=True):
    curve = closed_form_spectrum(model)
    if curve is None:
        curve = empirical_spectrum(model, max(levels), max_cubes=max_cubes)
    dims = minkowski(model, levels, max_cubes)
    if not with_lower:
        return upper_order(params, curve, dims), curve, dims
    if math.isinf(params.q):
        return lower_order(params, curve, dims), curve, dims
    prof = coarse_profile(model, levels, params.rho, max_cubes=max_cubes)
    return lower_order(params, curve, dims, prof), curve, dims


def cmd_order(args, config):
    model = _load_model(_require(_merged(args, config, "measure"), "measure"),
                        _merged(args, config, "weight_column"))
    _load_cache(model)
    levels = parse_levels(_merged(args, config, "levels", "4..10"))
    max_cubes = int(_merged(args, config, "max_cubes", DEFAULT_MAX_CUBES))
    cfg = _config_dict(args, model)
    p_grid = _merged(args, config, "p_grid")
    q_grid = _merged(args, config, "q_grid")
    if p_grid or q_grid:
        sigma = int(_require(_merged(args, config, "sigma"), "sigma"))
        ps = parse_grid(p_grid) if p_grid else [parse_extended(_require(_merged(args, config, "p"), "p"))]
        qs = parse_grid(q_grid) if q_grid else [parse_extended(_require(_merged(args, config, "q"), "q"))]
        rows = []
        for p in ps:
            for q in qs:
                params = EmbeddingParams(m=model.m, sigma=sigma, p=p, q=q)
                rep, _, _ = _order_report(model, params, levels, max_cubes)
                lo, hi = rep.lower["K"]
                rows.append(
                    (p, q, rep.upper["K"], rep.upper["G"], rep.upper["L"], lo, hi, rep.case)
                )
        _emit_csv(
            _merged(args, config, "out"),
            ["p", "q", "uAO_K", "uAO_G", "uAO_L", "lAO_lo", "lAO_hi", "case"],
            rows,
            cfg,
        )
        _save_cache(model)
        return EX_OK

    params = _embedding(args, config, model)
    rep, curve, dims = _order_report(model, params, levels, max_cubes)
    payload = rep.to_dict()
    if model.finite_support:
        payload["finite_support_warning"] = (
            "measure has finite support; asymptotic formulas degenerate"
        )
    if not math.isinf(params.q):
        payload["geometric_bounds"] = list(geometric_bounds(params, curve, dims))
    _emit_json(_merged(args, config, "out"), payload, cfg)
    _save_cache(model)
    return EX_OK


def cmd_empirical(args, config):
    model = _load_model(_require(_merged(args, config, "measure"), "measure"),
                        _merged(args, config, "weight_column"))
    _load_cache(model)
    params = _embedding(args, config, model)
    fname = _merged(args, config, "function", "sin")
    f = catalog(fname, model.m)
    thresholds = parse_thresholds(
        _require(_merged(args, config, "thresholds"), "thresholds")
    )
    depth_offset = int(_merged(args, config, "depth_offset", 3))
    max_cells = int(_merged(args, config, "max_cells", DEFAULT_MAX_CELLS))
    max_cubes = int(_merged(args, config, "max_cubes", DEFAULT_MAX_CUBES))
    result = decay_experiment(
        f, model, params, thresholds,
        depth_offset=depth_offset, max_cells=max_cells, max_cubes=max_cubes,
    )
    cfg = _config_dict(args, model)
    rows = [
        (t, card, err, math.log(card), math.log(err) if err > 0 else -math.inf)
        for t, card, err in result.rows
    ]
    _emit_csv(
        _merged(args, config, "out"),
        ["t", "card", "error", "logcard", "logerror"],
        rows,
        cfg,
    )
    verdict = {
        "function": fname,
        "slope": result.slope,
        "predicted": result.predicted,
        "pass": result.upper_bound_ok,
        "degenerate": result.degenerate,
    }
    verdict_out = _merged(args, config, "verdict")
    _emit_json(verdict_out, verdict, cfg) if verdict_out else print(
        json.dumps(verdict, sort_keys=True)
    )
    _save_cache(model)
    return EX_OK


def cmd_probe(args, config):
    model = _load_model(_require(_merged(args, config, "measure"), "measure"),
                        _merged(args, config, "weight_column"))
    _load_cache(model)
    params = _embedding(args, config, model)
    n = int(_require(_merged(args, config, "n"), "n"))
    alpha = float(_require(_merged(args, config, "alpha"), "alpha"))
    seed = int(_merged(args, config, "seed", 0))
    max_cubes = int(_merged(args, config, "max_cubes", DEFAULT_MAX_CUBES))
    result = packing_probe(model, n, alpha, params, seed=seed, max_cubes=max_cubes)
    cfg = _config_dict(args, model)
    payload = {
        "n": result.n,
        "alpha": result.alpha,
        "family": [str(c) for c in result.family],
        "family_size": len(result.family),
        "ratio": result.ratio,
        "normalized_ratio": result.normalized_ratio,
        "sobolev_norm": result.sobolev_norm,
        "lq_norm": result.lq_norm,
        "operator_checks": [list(c) for c in result.operator_checks],
        "operator_bound_ok": result.operator_bound_ok,
    }
    _emit_json(_merged(args, config, "out"), payload, cfg)
    _save_cache(model)
    return EX_OK


def cmd_validate(args, config):
    path = _require(_merged(args, config, "measure"), "measure")
    model = _load_model(path, _merged(args, config, "weight_column"))
    print(f"ok: {path} is a valid {type(model).__name__} with m={model.m}")
    return EX_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="widthlab", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"widthlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--config", help="JSON config file; flags override its keys")
        sp.add_argument("--measure", help="measure spec (.json) or point cloud (.csv)")
        sp.add_argument("--weight-column", dest="weight_column",
                        help="CSV weight column (name or index)")
        sp.add_argument("--max-cubes", dest="max_cubes", type=int,
                        help="cap on enumerated cubes / multiset size")
        sp.add_argument("--threads", type=int,
                        help="worker cap (accepted for config parity; "
                             "the exact-arithmetic kernels run serially)")
        sp.add_argument("--out", help="output file (default: stdout)")

    def add_embedding(sp, need_rho=False):
        sp.add_argument("--m", type=int, help="dimension (checked against the measure)")
        sp.add_argument("--sigma", type=int, help="smoothness order")
        sp.add_argument("--p", help="source integrability in [1, inf]")
        sp.add_argument("--q", help="target integrability in [1, inf]")
        if need_rho:
            sp.add_argument("--rho", type=float,
                            help="partition exponent; defaults to q*(sigma - m/p)")

    sp = sub.add_parser("spectrum", help="finite-level L^q-spectrum table")
    add_common(sp)
    sp.add_argument("--levels", help='level range "a..b"')
    sp.add_argument("--t-grid", dest="t_grid", help='moment grid "a:b:step"')
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("dims", help="box-counting dimension estimates")
    add_common(sp)
    sp.add_argument("--levels", help='level range "a..b"')
    sp.set_defaults(func=cmd_dims)

    sp = sub.add_parser("partition", help="adaptive threshold partitions")
    add_common(sp)
    add_embedding(sp, need_rho=True)
    sp.add_argument("--thresholds", help='comma list, "a:b:step", or "pow2:a..b"')
    sp.add_argument("--cells-out", dest="cells_out", help="optional cell dump CSV")
    sp.add_argument("--max-cells", dest="max_cells", type=int)
    sp.set_defaults(func=cmd_partition)

    sp = sub.add_parser("coarse", help="coarse multifractal counts and optimized dims")
    add_common(sp)
    add_embedding(sp, need_rho=True)
    sp.add_argument("--levels", help='level range "a..b"')
    sp.add_argument("--alpha-grid", dest="alpha_grid", help='grid "a:b:step"')
    sp.add_argument("--summary", help="summary JSON path")
    sp.set_defaults(func=cmd_coarse)

    sp = sub.add_parser("order", help="approximation-order report")
    add_common(sp)
    add_embedding(sp)
    sp.add_argument("--levels", help="levels for dimension/coarse estimates")
    sp.add_argument("--p-grid", dest="p_grid", help="sweep mode: grid for p")
    sp.add_argument("--q-grid", dest="q_grid", help="sweep mode: grid for q")
    sp.set_defaults(func=cmd_order)

    sp = sub.add_parser("empirical", help="projection decay experiment")
    add_common(sp)
    add_embedding(sp)
    sp.add_argument("--function", help="catalog function: sin, linear, bump, constant")
    sp.add_argument("--thresholds", help='comma list, "a:b:step", or "pow2:a..b"')
    sp.add_argument("--depth-offset", dest="depth_offset", type=int)
    sp.add_argument("--max-cells", dest="max_cells", type=int)
    sp.add_argument("--verdict", help="verdict JSON path")
    sp.set_defaults(func=cmd_empirical)

    sp = sub.add_parser("probe", help="packing lower-bound probe")
    add_common(sp)
    add_embedding(sp)
    sp.add_argument("--n", type=int, help="level of the probed family")
    sp.add_argument("--alpha", type=float, help="goodness exponent")
    sp.add_argument("--seed", type=int, help="seed for random span elements")
    sp.set_defaults(func=cmd_probe)

    sp = sub.add_parser("validate", help="validate a measure spec")
    add_common(sp)
    sp.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EX_USAGE
    config = {}
    if args.config:
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except OSError as exc:
            sys.stderr.write(f"widthlab: cannot read config: {exc}\n")
            return EX_NOINPUT
        except json.JSONDecodeError as exc:
            sys.stderr.write(f"widthlab: bad config JSON: {exc}\n")
            return EX_FAIL
    threads = getattr(args, "threads", None) or config.get("threads")
    if threads is not None and int(threads) < 1:
        sys.stderr.write("widthlab: --threads must be >= 1\n")
        return EX_USAGE
    try:
        return args.func(args, config)
    except FileNotFoundError as exc:
        sys.stderr.write(f"widthlab: {exc}\n")
        return EX_NOINPUT
    except ResourceLimitError as exc:
        sys.stderr.write(f"widthlab: resource cap: {exc}\n")
        return EX_RESOURCE
    except (ValidationError, ParseError, SolverError) as exc:
        sys.stderr.write(f"widthlab: {exc}\n")
        return EX_FAIL


if __name__ == "__main__":
    sys.exit(main())
