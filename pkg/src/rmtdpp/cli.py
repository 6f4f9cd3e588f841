"""Command-line interface: distribution grids, moments, correlations, samplers.

Subcommands `dist`, `moments`, `corr`, `sample`.  Data goes to stdout (or
--out); progress notes go to stderr.  Configuration precedence is
flags > environment (RMTDPP_*) > --config file (key=value lines) > defaults.
Exit codes: 0 ok, 2 invalid configuration, 3 numerical failure.
"""

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__, airyproc, aztec, rmtstats
from .errors import NoConvergence, RmtDppError
from .samplers import make_rng, sample_gue_positions

ENV_PREFIX = "RMTDPP_"

_DIST_STATS = (
    "extreme-cdf",
    "extreme-pdf",
    "second-cdf",
    "second-pdf",
    "bulk-gap-ccdf",
    "bulk-gap-pdf",
    "spacing-pdf",
    "spacing-cdf",
    "joint-pdf",
)
_MOMENT_STATS = ("extreme", "second", "bulk-gap", "spacing")
_SAMPLE_TARGETS = ("gue", "aztec", "dr-path", "airy-process", "dbm")


@dataclass
class RunConfig:
    """Effective settings for one invocation after precedence resolution."""

    subcommand: str
    stat: str = None
    target: str = None
    edge: str = None
    alpha: int = 0
    size: int = 0
    grid: str = None
    times: str = None
    cells: int = 60
    n: int = 0
    order: int = 0
    rtol: float = 1e-9
    seed: int = 0
    fmt: str = "csv"
    out: str = None


def _f17(v):
    return f"{float(v):.17g}"


def _jfloat(v):
    # 17 significant digits survive the round trip; reparse so json.dumps
    # prints the identical double deterministically.
    return float(_f17(v))


def parse_grid(spec):
    """Parse `start:step:stop` into an inclusive ascending grid."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid spec {spec!r} is not start:step:stop")
    start, step, stop = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise ValueError(f"grid spec {spec!r} is empty or descending")
    count = int(np.floor((stop - start) / step + 0.5)) + 1
    return start + step * np.arange(count)


def _read_config_file(path):
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"bad config line {line!r}")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


_OPTION_TYPES = {
    "stat": str,
    "edge": str,
    "alpha": int,
    "size": int,
    "grid": str,
    "times": str,
    "cells": int,
    "n": int,
    "order": int,
    "rtol": float,
    "seed": int,
    "fmt": str,
    "out": str,
}

_ENV_NAMES = {
    "size": "N",
    "fmt": "FORMAT",
    "times": "T",
}


def _resolve(args):
    """Merge flag, environment, and config-file values into a RunConfig."""
    file_values = _read_config_file(args.config) if getattr(args, "config", None) else {}
    cfg = RunConfig(subcommand=args.subcommand)
    cfg.target = getattr(args, "target", None)
    defaults = {
        "order": 40,
        "rtol": 1e-9,
        "seed": 0,
        "fmt": "csv",
        "alpha": 0,
        "size": 0,
        "cells": 60,
        "n": 0,
    }
    for key, conv in _OPTION_TYPES.items():
        value = getattr(args, key, None)
        if value is None:
            env = os.environ.get(ENV_PREFIX + _ENV_NAMES.get(key, key.upper()))
            if env is not None:
                value = conv(env)
        if value is None and key in file_values:
            value = conv(file_values[key])
        if value is None:
            value = defaults.get(key)
        if value is not None:
            setattr(cfg, key, value)
    return cfg


def _edge_from(cfg):
    if cfg.edge == "soft":
        return rmtstats.soft_edge()
    if cfg.edge == "hard":
        return rmtstats.hard_edge(cfg.alpha)
    if cfg.edge == "finite":
        if cfg.size < 1:
            raise ValueError("--N must be >= 1 for the finite ensemble")
        return rmtstats.finite_gue(cfg.size)
    raise ValueError(f"--edge must be soft, hard, or finite (got {cfg.edge!r})")


def _emit(cfg, text):
    if cfg.out:
        tmp = cfg.out + ".tmp"
        with open(tmp, "w") as fh:
            fh.write(text)
        os.replace(tmp, cfg.out)
    else:
        sys.stdout.write(text)


def _meta(cfg, **extra):
    meta = {"version": __version__, "subcommand": cfg.subcommand}
    for key in ("stat", "target", "edge", "grid", "times"):
        value = getattr(cfg, key)
        if value is not None:
            meta[key] = value
    if cfg.edge == "hard":
        meta["alpha"] = cfg.alpha
    if cfg.edge == "finite":
        meta["N"] = cfg.size
    meta.update(extra)
    return meta


def _rows_text(cfg, meta, header, rows):
    if cfg.fmt == "json":
        payload = {"meta": meta, "columns": header, "rows": rows}
        return json.dumps(payload) + "\n"
    lines = [f"# {k}={v}" for k, v in meta.items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_f17(v) for v in row))
    return "\n".join(lines) + "\n"


def cmd_dist(cfg):
    if cfg.stat not in _DIST_STATS:
        raise ValueError(f"--stat must be one of {', '.join(_DIST_STATS)}")
    if cfg.grid is None:
        raise ValueError("dist needs --grid start:step:stop")
    grid = parse_grid(cfg.grid)
    m = cfg.order
    if cfg.stat.startswith("bulk-gap"):
        fn = rmtstats.bulk_gap_ccdf if cfg.stat.endswith("ccdf") else rmtstats.bulk_gap_pdf
        values = [fn(s, m=max(m, 48)) for s in grid]
        rows = [(s, v) for s, v in zip(grid, map(_jfloat, values))]
        return _rows_text(cfg, _meta(cfg, order=m), ["s", "value"], rows)
    edge = _edge_from(cfg)
    if cfg.stat == "joint-pdf":
        rows = []
        for x1 in grid:
            for x2 in grid:
                v = rmtstats.joint_pdf_extremes(edge, [x1, x2], m=min(m, 24))
                rows.append((x1, x2, _jfloat(v)))
        return _rows_text(cfg, _meta(cfg, order=m), ["x1", "x2", "value"], rows)
    fns = {
        "extreme-cdf": rmtstats.extreme_cdf,
        "extreme-pdf": rmtstats.extreme_pdf,
        "second-cdf": rmtstats.second_cdf,
        "second-pdf": rmtstats.second_pdf,
        "spacing-pdf": rmtstats.spacing_pdf,
        "spacing-cdf": rmtstats.spacing_cdf,
    }
    fn = fns[cfg.stat]
    rows = []
    for i, s in enumerate(grid):
        if cfg.edge == "hard" and s <= 0 and "spacing" not in cfg.stat:
            raise ValueError("hard-edge grids must have s > 0")
        rows.append((s, _jfloat(fn(edge, s, m=m))))
        if i % 32 == 31:
            print(f"{cfg.stat}: {i + 1}/{len(grid)}", file=sys.stderr)
    return _rows_text(cfg, _meta(cfg, order=m), ["s", "value"], rows)


def cmd_moments(cfg):
    if cfg.stat not in _MOMENT_STATS:
        raise ValueError(f"--stat must be one of {', '.join(_MOMENT_STATS)}")
    start = time.perf_counter()
    if cfg.stat == "bulk-gap":
        summary = rmtstats.bulk_gap_moments(rtol=min(cfg.rtol, 1e-11))
    else:
        edge = _edge_from(cfg)
        if cfg.stat == "spacing":
            summary = rmtstats.spacing_moments(edge, rtol=cfg.rtol)
        else:
            which = 1 if cfg.stat == "extreme" else 2
            summary = rmtstats.extreme_moments(edge, which=which, rtol=cfg.rtol)
    elapsed = time.perf_counter() - start
    payload = {
        "meta": _meta(cfg, rtol=cfg.rtol),
        "mean": _jfloat(summary.mean),
        "variance": _jfloat(summary.variance),
        "skewness": _jfloat(summary.skewness),
        "excess_kurtosis": _jfloat(summary.excess_kurtosis),
        "order_used": summary.order_used,
        "est_error": _jfloat(summary.est_error),
        "wall_seconds": _jfloat(elapsed),
    }
    return json.dumps(payload) + "\n"


def cmd_corr(cfg):
    edge = _edge_from(cfg)
    start = time.perf_counter()
    rho = rmtstats.corr_coeff(edge)
    elapsed = time.perf_counter() - start
    payload = {
        "meta": _meta(cfg),
        "rho": _jfloat(rho),
        "wall_seconds": _jfloat(elapsed),
    }
    return json.dumps(payload) + "\n"


def cmd_sample(cfg):
    if cfg.target not in _SAMPLE_TARGETS:
        raise ValueError(f"sample target must be one of {', '.join(_SAMPLE_TARGETS)}")
    seed = cfg.seed
    if seed == 0:
        seed = int(np.random.SeedSequence().entropy % (2**63))
        print(f"seed=0 requested entropy; using seed={seed}", file=sys.stderr)
    rng = make_rng(seed)
    if cfg.target == "aztec":
        if cfg.n < 1:
            raise ValueError("sample aztec needs --n >= 1")
        tiling = aztec.sample_tiling(cfg.n, rng)
        if cfg.fmt == "json":
            return f'{{"meta":{json.dumps(_meta(cfg, seed=seed))},"tiling":{aztec.tiling_to_json(tiling)}}}\n'
        return f"# seed={seed}\n" + aztec.tiling_to_text(tiling)
    if cfg.target == "dr-path":
        if cfg.n < 1:
            raise ValueError("sample dr-path needs --n >= 1")
        path = aztec.sample_top_dr_path(cfg.n, rng)
        return (
            f'{{"meta":{json.dumps(_meta(cfg, seed=seed, n=cfg.n))},'
            f'"path":{aztec.path_to_json(path)}}}\n'
        )
    if cfg.target == "airy-process":
        if cfg.times is None:
            raise ValueError("sample airy-process needs --t start:step:stop")
        times = parse_grid(cfg.times)
        grid = airyproc.MultitimeGrid(times=tuple(times), m_cells=cfg.cells)
        path = airyproc.sample_airy_path(grid, rng)
        return path.to_csv(seed=seed)
    if cfg.target == "dbm":
        if cfg.times is None:
            raise ValueError("sample dbm needs --t start:step:stop")
        if cfg.size < 2:
            raise ValueError("sample dbm needs --N >= 2")
        path = airyproc.simulate_dbm(cfg.size, parse_grid(cfg.times), rng)
        return path.to_csv(seed=seed)
    # gue spectrum sample through the projection sampler
    if cfg.size < 1:
        raise ValueError("sample gue needs --N >= 1")
    positions = sample_gue_positions(cfg.size, rng)
    lines = [f"# seed={seed}", f"# N={cfg.size}", "x"]
    lines.extend(_f17(x) for x in positions)
    return "\n".join(lines) + "\n"


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rmtdpp",
        description="Eigenvalue statistics and exact DPP samplers",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, *, value_grid=True):
        p.add_argument("--stat", default=None)
        p.add_argument("--edge", default=None)
        p.add_argument("--alpha", type=int, default=None)
        p.add_argument("--N", dest="size", type=int, default=None)
        if value_grid:
            p.add_argument("--grid", default=None, help="value grid start:step:stop")
        p.add_argument("--order", type=int, default=None)
        p.add_argument("--rtol", type=float, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--config", default=None)

    add_common(sub.add_parser("dist", help="tabulate a distribution on a grid"))
    add_common(sub.add_parser("moments", help="first four moments of a statistic"))
    add_common(sub.add_parser("corr", help="correlation of the two extremal eigenvalues"))
    sample = sub.add_parser("sample", help="draw reproducible samples")
    sample.add_argument("target", choices=_SAMPLE_TARGETS)
    sample.add_argument("--n", type=int, default=None, help="Aztec diamond order")
    sample.add_argument("--t", dest="times", default=None, help="time grid start:step:stop")
    sample.add_argument(
        "--grid", dest="cells", type=int, default=None, help="eigenvalue cells per block"
    )
    add_common(sample, value_grid=False)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
        runner = {
            "dist": cmd_dist,
            "moments": cmd_moments,
            "corr": cmd_corr,
            "sample": cmd_sample,
        }[cfg.subcommand]
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        text = runner(cfg)
    except (ValueError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NoConvergence as exc:
        print(f"error: no convergence: {exc}", file=sys.stderr)
        return 3
    except RmtDppError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    _emit(cfg, text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
