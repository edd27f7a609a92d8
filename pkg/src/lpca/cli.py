"""Command-line interface.

::

    lpca fit data.csv --k 2 --out model.json
    lpca plot model.json data.csv --map descriptor:D16 --out d16.svg
    lpca report model.json data.csv --out report.csv
    lpca synth --n 2000 --d 24 --out data.csv

Exit status is 0 on success, 1 for data or fit errors and 2 for usage
errors. ``LPCA_THREADS`` caps the number of BLAS worker threads.
"""
import argparse
import csv
import io
import os
import sys

import numpy as np
from threadpoolctl import threadpool_limits

from . import core, irt, plot, synth
from .exceptions import ConfigError, LPCAError
from .expfam import Family
from .ingest import (ResponseTable, read_table, serialize_table,
                     to_response_matrix)

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _pc_pair(text):
    parts = text.split(",")
    try:
        axes = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad component list {text!r}")
    if len(axes) == 1:
        axes = (axes[0], axes[0] + 1)
    if len(axes) != 2 or axes[0] == axes[1] or min(axes) < 1:
        raise argparse.ArgumentTypeError(
            f"need two distinct components >= 1, got {text!r}")
    return axes


def _map_kind(text):
    if text in ("proficiency", "loadings"):
        return text, None
    kind, sep, target = text.partition(":")
    if sep and target and kind in ("descriptor", "category"):
        return kind, target
    raise argparse.ArgumentTypeError(
        "expected proficiency, loadings, descriptor:NAME or category:COLUMN")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lpca", description="Logistic PCA for assessment data.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a model to a response table")
    p.add_argument("input")
    p.add_argument("--k", type=_positive_int, default=2)
    p.add_argument("--m", type=_positive_float, default=4.0)
    p.add_argument("--max-iter", type=_positive_int, default=500)
    p.add_argument("--tol", type=_positive_float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--family", choices=[f.value for f in Family],
                   default=Family.BERNOULLI.value)
    p.add_argument("--init", choices=[i.value for i in core.Init],
                   default=core.Init.SVD.value)
    p.add_argument("--out", required=True, help="model JSON path")

    p = sub.add_parser("plot", help="render a map as SVG")
    p.add_argument("model")
    p.add_argument("input")
    p.add_argument("--map", type=_map_kind, required=True, dest="map_kind",
                   metavar="{proficiency|descriptor:NAME|category:COL|loadings}")
    p.add_argument("--pc", type=_pc_pair, default=(1, 2))
    p.add_argument("--levelset", default=None,
                   help="descriptor whose 0.5 level set is overlaid")
    p.add_argument("--sample", type=_positive_int, default=None,
                   help="plot a uniform random subset of this many rows")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=_positive_int, default=640)
    p.add_argument("--height", type=_positive_int, default=480)
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="export item parameters")
    p.add_argument("model")
    p.add_argument("input")
    p.add_argument("--out", required=True)

    p = sub.add_parser("synth", help="write synthetic M2PL responses")
    p.add_argument("--n", type=_positive_int, default=1000)
    p.add_argument("--d", type=_positive_int, default=24)
    p.add_argument("--k", type=_positive_int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--na-rate", type=float, default=0.0)
    p.add_argument("--out", required=True)
    return parser


def _load_data(path, family):
    table = read_table(path, strict=Family(family) is Family.BERNOULLI)
    return table, to_response_matrix(table)


def _load_model_and_data(model_path, data_path):
    params = core.load_model(model_path)
    table, data = _load_data(data_path, params.family)
    if data.d != params.d:
        raise LPCAError(
            f"model has {params.d} columns but the table has {data.d}")
    if params.column_names and params.column_names != data.column_names:
        raise LPCAError("table descriptors do not match the model's columns")
    return params, table, data


def cmd_fit(args, out):
    table, data = _load_data(args.input, args.family)
    config = core.FitConfig(k=args.k, m=args.m, max_iter=args.max_iter,
                            rel_tol=args.tol, seed=args.seed, init=args.init)
    result = core.fit(data, args.family, config)
    core.save_model(result.params, args.out)
    lines = [
        f"n: {data.n}",
        f"d: {data.d}",
        f"k: {config.k}",
        f"m: {config.m!r}",
        f"family: {result.params.family.value}",
        f"iterations: {result.n_iter}",
        f"objective: {result.objective!r}",
        f"true_deviance: {result.true_deviance!r}",
        f"converged: {str(result.converged).lower()}",
    ]
    lines += [f"note: {msg}" for msg in result.diagnostics]
    out.write("\n".join(lines) + "\n")


def cmd_plot(args, out):
    params, table, data = _load_model_and_data(args.model, args.input)
    kind, target = args.map_kind
    spec_kw = dict(axes=args.pc, width=args.width, height=args.height,
                   overlay_levelset=args.levelset)
    if kind == "loadings":
        if args.pc[0] > params.k:
            raise UsageError(f"model has only {params.k} components")
        spec = plot.PlotSpec(kind=plot.MapKind.LOADINGS_BAR, **spec_kw)
        svg = plot.render(spec, params)
    else:
        if params.k < 2:
            raise UsageError("scatter maps need a model with k >= 2")
        if max(args.pc) > params.k:
            raise UsageError(f"model has only {params.k} components")
        psi = core.scores(params, data)
        rows = np.arange(data.n)
        if args.sample is not None and args.sample < data.n:
            rng = np.random.default_rng(args.seed)
            rows = np.sort(rng.choice(data.n, size=args.sample, replace=False))
        sub_table = _subset_table(table, rows)
        mode = {"proficiency": plot.ColorMode.PROFICIENCY,
                "descriptor": plot.ColorMode.DESCRIPTOR,
                "category": plot.ColorMode.CATEGORY}[kind]
        spec = plot.PlotSpec(color_mode=mode, target=target, **spec_kw)
        svg = plot.render(spec, params, psi[rows], sub_table)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    out.write(f"wrote {args.out}\n")


def _subset_table(table, rows):
    return ResponseTable(
        [table.examinee_ids[i] for i in rows], table.descriptor_names,
        table.cells[rows],
        {k: [v[i] for i in rows] for k, v in table.metadata.items()})


def report_text(params, table, data):
    """Item-parameter CSV, followed by PC/proficiency correlations when the
    table has a ``meta:proficiency`` column."""
    items = irt.to_item_params(params)
    text = irt.item_params_csv(items, params.column_names or
                               data.column_names)
    notice = None
    if "proficiency" in table.metadata:
        prof = table.numeric_metadata("proficiency")
        keep = ~np.isnan(prof)
        psi = core.scores(params, data)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["component", "pearson_proficiency"])
        for l in range(params.k):
            r = irt.pearson_correlation(psi[keep, l], prof[keep])
            w.writerow([f"PC{l + 1}", repr(r)])
        text += "\n" + buf.getvalue()
    else:
        notice = "no meta:proficiency column; correlation section omitted"
    return text, notice


def cmd_report(args, out):
    params, table, data = _load_model_and_data(args.model, args.input)
    text, notice = report_text(params, table, data)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    if notice:
        sys.stderr.write(f"lpca: {notice}\n")
    out.write(f"wrote {args.out}\n")


def cmd_synth(args, out):
    spec = synth.GeneratorSpec(n=args.n, d=args.d, k=args.k, seed=args.seed,
                               na_rate=args.na_rate)
    table = synth.to_table(synth.generate(spec))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(serialize_table(table))
    out.write(f"wrote {args.out}\n")


_COMMANDS = {"fit": cmd_fit, "plot": cmd_plot, "report": cmd_report,
             "synth": cmd_synth}


def _thread_cap():
    raw = os.environ.get("LPCA_THREADS")
    if raw is None or raw == "":
        return None
    try:
        cap = int(raw)
    except ValueError:
        raise UsageError(f"LPCA_THREADS must be a positive integer: {raw!r}")
    if cap < 1:
        raise UsageError(f"LPCA_THREADS must be a positive integer: {raw!r}")
    return cap


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        cap = _thread_cap()
        with threadpool_limits(limits=cap):
            _COMMANDS[args.command](args, out)
    except (UsageError, ConfigError) as exc:
        sys.stderr.write(f"lpca: usage error: {exc}\n")
        return EXIT_USAGE
    except (LPCAError, OSError) as exc:
        sys.stderr.write(f"lpca: error: {exc}\n")
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
