"""Command-line experiment harness.

Subcommands: ``fit``, ``alpha-scan``, ``rer-curve``, ``synth``, ``info``.
Exit status is 0 on success, 1 on numerical failure and 2 on invalid input.
The log level is read from ``MCCA_LOG_LEVEL`` (default WARNING).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments, metrics, serialization, svg
from .covariance import ModeCovariances
from .exceptions import ConvergenceError, FormatError
from .ingest import assemble, load_manifest, load_pnm, read_idx
from .synth import make_grouped_tensors, write_synthetic
from .tensor import frobenius_norm

logger = logging.getLogger("mcca")

EXIT_OK, EXIT_NUMERICAL, EXIT_INPUT = 0, 1, 2


def _fmt(v: float) -> str:
    return format(v, ".17g")


def _load_dataset(args):
    if not args.manifest:
        raise ValueError("--manifest is required")
    return assemble(load_manifest(args.manifest))


def _methods(text: str) -> list[str]:
    methods = [m.strip().lower() for m in text.split(",") if m.strip()]
    if not methods:
        raise ValueError("--methods must name at least one method")
    for m in methods:
        if m not in experiments.METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {', '.join(experiments.METHODS)}")
    return methods


def _grid(args, shape):
    if not args.grid:
        raise ValueError("--grid is required")
    axes = experiments.parse_grid(args.grid)
    if len(axes) != len(shape):
        raise ValueError(f"grid has {len(axes)} axes for {len(shape)}-mode data")
    points = experiments.expand_grid(axes, tie=args.tie)
    experiments.check_grid(points, shape)
    return points


def _write_report(path: Path, method: str, model) -> None:
    """One row per iteration: objective, then per-mode alpha and bounds."""
    report = getattr(model, "report_", None)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if report is None:
            trace = getattr(model, "scatter_trace_", None) or [float(np.sum(getattr(model, "explained_variance_", [])))]
            w.writerow(["iteration", "objective"])
            for i, v in enumerate(trace):
                w.writerow([i, _fmt(v)])
            return
        m = len(report.alphas)
        header = ["iteration", "objective"]
        header += [f"alpha_{k + 1}" for k in range(m)]
        header += [f"lower_{k + 1}" for k in range(m)] + [f"upper_{k + 1}" for k in range(m)]
        w.writerow(header)
        for i, v in enumerate(report.objective_trace):
            w.writerow([i, _fmt(v)] + [_fmt(a) for a in report.alphas]
                       + [_fmt(lo) for lo, _ in report.bounds] + [_fmt(hi) for _, hi in report.bounds])


def cmd_fit(args) -> int:
    data = _load_dataset(args)
    methods = _methods(args.methods)
    if len(methods) != 1:
        raise ValueError("fit takes exactly one method")
    method = methods[0]
    if not args.ranks:
        raise ValueError("--ranks is required")
    ranks = experiments.parse_ranks(args.ranks)
    model = experiments.fit_method(method, data, ranks, tol=args.tol, max_iter=args.max_iter)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    serialization.save_model(out / "model.mcca", model)
    _write_report(out / "report.csv", method, model)
    rec = metrics.CompressionRecord.evaluate(method, model, data)
    with (out / "rer.csv").open("w", newline="") as fh:
        metrics.write_records_csv([rec], fh)
    summary = {
        "method": method, "ranks": list(rec.ranks), "params": rec.params, "cr": rec.cr, "rer": rec.rer,
        "groups": data.n_groups, "samples": data.n_samples, "shape": list(data.shape),
    }
    if hasattr(model, "report_"):
        summary.update(iterations=model.n_iter_, converged=model.converged_,
                       alphas=[float(a) for a in model.report_.alphas])
    if rec.cr > 1:
        logger.warning("compression ratio %.3f exceeds 1: the model stores more than the raw data", rec.cr)
    print(json.dumps(summary))
    return EXIT_OK


def cmd_alpha_scan(args) -> int:
    data = _load_dataset(args)
    points = _grid(args, data.shape)
    cov = ModeCovariances.from_dataset(data)
    rows = experiments.alpha_scan(cov, points)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    m = len(data.shape)
    with (out / "alpha.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"r{k + 1}" for k in range(m)] + ["mode", "alpha"])
        for ranks, k, alpha in rows:
            w.writerow(list(ranks) + [k + 1, _fmt(alpha)])
    if args.svg:
        # one slice per mode: vary R_k with the other ranks at their first grid value
        series = []
        first = points[0]
        for k in range(m):
            sl = sorted((r[k], a) for r, kk, a in rows if kk == k
                        and all(r[j] == first[j] for j in range(m) if j != k))
            if sl:
                series.append((f"alpha{k + 1}", [s[0] for s in sl], [s[1] for s in sl]))
        (out / "alpha.svg").write_text(svg.line_chart(series, "Contraction ratio per mode", "rank of the mode", "alpha"))
    print(f"wrote {len(rows)} rows to {out / 'alpha.csv'}")
    return EXIT_OK


def cmd_rer_curve(args) -> int:
    methods = _methods(args.methods)
    data = _load_dataset(args)
    points = _grid(args, data.shape)
    vector_ranks = None
    if args.vector_ranks:
        vector_ranks = experiments.parse_axis(args.vector_ranks)
    records = experiments.rer_curve(data, methods, points, vector_ranks=vector_ranks,
                                    tol=args.tol, max_iter=args.max_iter)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "rer.csv").open("w", newline="") as fh:
        metrics.write_records_csv(records, fh)
    if args.svg:
        series = []
        for method in methods:
            xs, ys = experiments.curve(records, method)
            series.append((method.upper(), xs, ys))
        (out / "rer.svg").write_text(svg.line_chart(series, "Reconstruction error rate", "CR", "RER"))
    print(f"wrote {len(records)} rows to {out / 'rer.csv'}")
    return EXIT_OK


def cmd_synth(args) -> int:
    shape = experiments.parse_ranks(args.shape)
    ranks = experiments.parse_ranks(args.ranks) if args.ranks else tuple(max(1, p // 3) for p in shape)
    data = make_grouped_tensors(shape, ranks, args.groups, args.per_group, noise=args.noise,
                                decay=args.decay, seed=args.seed)
    path = write_synthetic(args.out, data)
    print(f"wrote {data.dataset.n_groups} groups to {path}")
    return EXIT_OK


def cmd_info(args) -> int:
    path = Path(args.path)
    head = path.read_bytes()[:5]
    if head == serialization.MODEL_MAGIC:
        model = serialization.load_model(path)
        method = serialization.method_name(model)
        bases = model.components_ if isinstance(model.components_, list) else [model.components_]
        n = model.n_samples_fit_
        info = {"kind": "model", "method": method, "shape": list(model.sample_shape_),
                "ranks": [b.shape[1] for b in bases], "groups": len(model.latent_covariances_),
                "samples": n, "params": metrics.model_param_count(bases, n)}
    elif head == serialization.TENSOR_MAGIC:
        t = serialization.load_tensor(path)
        info = {"kind": "tensor", "shape": list(t.shape), "norm": frobenius_norm(t)}
    elif head[:2] in (b"P5", b"P6"):
        info = {"kind": "pnm", "shape": list(load_pnm(path).shape)}
    elif head[:2] == b"\x00\x00":
        info = {"kind": "idx", "shape": list(read_idx(path).shape)}
    elif path.suffix == ".json":
        data = assemble(load_manifest(path))
        info = {"kind": "manifest", "groups": data.n_groups, "samples": data.n_samples,
                "per_group": [g.shape[0] for g in data.groups], "shape": list(data.shape)}
    else:
        raise FormatError(f"{path}: unrecognized file type")
    print(json.dumps(info))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcca", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid=False):
        p.add_argument("--manifest", help="dataset manifest (JSON)")
        p.add_argument("--tol", type=float, default=1e-8, help="relative objective change to stop at")
        p.add_argument("--max-iter", type=int, default=100)
        p.add_argument("--out", default=".", help="output directory")
        if grid:
            p.add_argument("--grid", help="per-mode rank lists, e.g. 1-25x1-25 or 2,4,6x2,4,6x2")
            p.add_argument("--tie", action="store_true", help="set R2 = R1 along the first grid axis")
            p.add_argument("--svg", action="store_true", help="also write an SVG line chart")

    p = sub.add_parser("fit", help="fit one method and write model.mcca and report.csv")
    common(p)
    p.add_argument("--ranks", help="ranks such as 8x8 (a single number for pca/cca)")
    p.add_argument("--methods", default="mcca")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("alpha-scan", help="contraction ratios over a rank grid")
    common(p, grid=True)
    p.set_defaults(func=cmd_alpha_scan)

    p = sub.add_parser("rer-curve", help="RER against CR for several methods")
    common(p, grid=True)
    p.add_argument("--methods", default="mcca,mpca,cca,pca")
    p.add_argument("--vector-ranks", help="explicit ranks for pca/cca, e.g. 1-20")
    p.set_defaults(func=cmd_rer_curve)

    p = sub.add_parser("synth", help="write a seeded synthetic grouped dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shape", default="12x10")
    p.add_argument("--ranks", help="planted ranks, e.g. 4x3")
    p.add_argument("--groups", type=int, default=4)
    p.add_argument("--per-group", type=int, default=25)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--decay", type=float, default=0.5)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("info", help="describe a model, tensor, image, IDX or manifest file")
    p.add_argument("path")
    p.set_defaults(func=cmd_info)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("MCCA_LOG_LEVEL", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConvergenceError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"mcca: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"mcca: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
