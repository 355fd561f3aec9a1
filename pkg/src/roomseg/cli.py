"""Command-line interface: segment, evaluate, batch and sweep.

Exit codes: 0 success, 2 usage or input error, 1 internal error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import evaluation
from .map_io import (
    EmptyGroundTruthError,
    MapFormatError,
    load_ground_truth,
    load_labels,
    load_map,
    write_gray,
    write_segmentation,
)
from .merging import MODES, Params
from .pipeline import SWEEPABLE, _downscale, _upscale, run_stages, segment, sweep

log = logging.getLogger("roomseg")

MAP_SUFFIXES = (".png", ".pgm")


class InputError(Exception):
    """Bad user input; reported with exit code 2."""


def fraction(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{v} is outside [0, 1]")
    return v


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"{v} must be >= 1")
    return v


def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=MODES, default="robot")
    p.add_argument("--ripple-threshold", type=fraction, default=0.40)
    p.add_argument("--t-merging", type=fraction, default=0.30)
    p.add_argument("--m", type=fraction, default=0.10)
    p.add_argument("--d-threshold", type=fraction, default=None,
                   help="default 0.4 in robot mode, 1.0 in sketch mode")
    p.add_argument("--downscale", type=positive_int, default=1)


def _params(args) -> Params:
    try:
        return Params(ripple_threshold=args.ripple_threshold, t_merging=args.t_merging,
                      m=args.m, d_threshold=args.d_threshold, mode=args.mode)
    except ValueError as e:
        raise InputError(str(e)) from None


def _overlay_path(out: Path) -> Path:
    return out.with_name(f"{out.stem}_overlay.png")


# -- segment ---------------------------------------------------------------


def _dump_debug(stages, debug_dir: Path) -> None:
    debug_dir.mkdir(parents=True, exist_ok=True)
    write_gray(stages.distance, debug_dir / "distance.png")
    write_gray(stages.fsi, debug_dir / "fsi.png")
    for name in ("initial", "ripples", "merged", "walls", "final"):
        write_segmentation(getattr(stages, name), debug_dir / f"{name}.png", mode="colored-overlay")
    (debug_dir / "graph.txt").write_text(stages.graph_listing + "\n")
    counts = " ".join(f"{k}={v}" for k, v in stages.region_counts.items())
    (debug_dir / "counts.txt").write_text(counts + "\n")


def cmd_segment(args) -> int:
    p = _params(args)
    grid = load_map(args.map)
    work = _downscale(grid, args.downscale) if args.downscale > 1 else grid
    t0 = time.perf_counter()
    stages = run_stages(work, p)
    seg = stages.final if args.downscale == 1 else _upscale(stages.final, grid, args.downscale)
    elapsed = time.perf_counter() - t0
    out = Path(args.output)
    write_segmentation(seg, out, mode="labels")
    write_segmentation(seg, _overlay_path(out), mode="colored-overlay", grid=grid)
    if args.debug_dir:
        _dump_debug(stages, Path(args.debug_dir))
    print(f"{args.map}: {seg.n_regions} regions in {elapsed:.2f}s -> {out}")
    return 0


# -- evaluate --------------------------------------------------------------


def cmd_evaluate(args) -> int:
    seg = load_labels(args.seg)
    truths = [args.gt] + ([args.gt2] if args.gt2 else [])
    rows = []
    for gt_path in truths:
        gt = load_ground_truth(gt_path)
        try:
            rep = evaluation.evaluate(seg, gt, recall_averaging=args.recall_averaging)
        except ValueError as e:
            raise InputError(str(e)) from None
        print(f"{gt_path}: precision={rep.precision:.4f} recall={rep.recall:.4f} "
              f"mcc={rep.mcc:.4f} macro_mcc={rep.macro_mcc:.4f} regions={rep.n_regions}")
        rows.append(evaluation.report_row(str(gt_path), rep))
    if args.csv:
        evaluation.write_csv(rows, args.csv)
    return 0


# -- batch -----------------------------------------------------------------


def find_maps(directory: Path, gt_suffix: str) -> list[tuple[Path, Path | None]]:
    """(map, ground truth or None) for every map file in ``directory``, sorted by name."""
    files = sorted(f for f in directory.iterdir() if f.suffix.lower() in MAP_SUFFIXES)
    by_stem = {f.stem: f for f in files}
    pairs = []
    for f in files:
        if f.stem.endswith(gt_suffix) or f.stem.endswith("_overlay"):
            continue
        pairs.append((f, by_stem.get(f.stem + gt_suffix)))
    return pairs


def _run_one(job):
    map_path, gt_path, params, downscale = job
    grid = load_map(map_path)
    gt = load_ground_truth(gt_path)
    t0 = time.perf_counter()
    seg = segment(grid, params, downscale)
    elapsed = time.perf_counter() - t0
    return map_path.name, evaluation.evaluate(seg, gt), elapsed


def _load_dataset(directory: Path, gt_suffix: str):
    if not directory.is_dir():
        raise InputError(f"not a directory: {directory}")
    pairs = []
    for m, g in find_maps(directory, gt_suffix):
        if g is None:
            log.warning("no ground truth for %s, skipped", m.name)
            continue
        pairs.append((m, g))
    if not pairs:
        raise InputError(f"no maps with ground truth in {directory}")
    return pairs


def cmd_batch(args) -> int:
    p = _params(args)
    pairs = _load_dataset(Path(args.directory), args.gt_suffix)
    jobs = [(m, g, p, args.downscale) for m, g in pairs]
    t0 = time.perf_counter()
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    wall = time.perf_counter() - t0
    results.sort(key=lambda r: r[0])
    reports = [r[1] for r in results]
    rows = [evaluation.report_row(name, rep) for name, rep, _ in results]
    summary = evaluation.summarize(reports)
    rows.append(evaluation.summary_row(summary, reports))
    for name, rep, sec in results:
        print(f"{name}: regions={rep.n_regions} mcc={rep.mcc:.4f} "
              f"precision={rep.precision:.4f} recall={rep.recall:.4f} time={sec:.2f}s")
    seg_time = sum(r[2] for r in results)
    print(f"maps={summary['maps']} median_mcc={summary['median_mcc']:.4f} "
          f"precision={summary['precision_mean']:.4f}±{summary['precision_sd']:.4f} "
          f"recall={summary['recall_mean']:.4f}±{summary['recall_sd']:.4f}")
    print(f"timing: total={wall:.2f}s mean_per_map={seg_time / len(results):.2f}s")
    if args.report:
        evaluation.write_csv(rows, args.report)
    return 0


# -- sweep -----------------------------------------------------------------


def cmd_sweep(args) -> int:
    base = _params(args)
    pairs = _load_dataset(Path(args.directory), args.gt_suffix)
    dataset = [(load_map(m), load_ground_truth(g)) for m, g in pairs]
    try:
        rows = sweep(dataset, args.parameter, args.values, base=base, jobs=args.jobs)
    except ValueError as e:
        raise InputError(str(e)) from None
    out = open(args.csv, "w", newline="") if args.csv else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["parameter", "value", "median_mcc"])
        for r in rows:
            w.writerow([r["parameter"], r["value"], f"{r['median_mcc']:.6f}"])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


# -- entry point -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roomseg", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("segment", help="segment one map")
    s.add_argument("map")
    s.add_argument("-o", "--output", required=True, help="label raster (.png or .pgm)")
    s.add_argument("--debug-dir", help="write per-stage images and the region graph here")
    _add_params(s)
    s.set_defaults(func=cmd_segment)

    e = sub.add_parser("evaluate", help="score a segmentation against ground truth")
    e.add_argument("seg")
    e.add_argument("gt")
    e.add_argument("--gt2", help="second ground truth")
    e.add_argument("--csv", help="write results as CSV")
    e.add_argument("--recall-averaging", choices=("gt", "seg"), default="gt")
    e.set_defaults(func=cmd_evaluate)

    b = sub.add_parser("batch", help="segment and evaluate every map in a directory")
    b.add_argument("directory")
    b.add_argument("--gt-suffix", default="_gt")
    b.add_argument("--jobs", type=positive_int, default=1)
    b.add_argument("--report", help="CSV report path")
    _add_params(b)
    b.set_defaults(func=cmd_batch)

    w = sub.add_parser("sweep", help="median MCC over a directory for values of one parameter")
    w.add_argument("directory")
    w.add_argument("--parameter", choices=SWEEPABLE, required=True)
    w.add_argument("--values", type=fraction, nargs="+", required=True)
    w.add_argument("--gt-suffix", default="_gt")
    w.add_argument("--jobs", type=positive_int, default=1)
    w.add_argument("--csv")
    _add_params(w)
    w.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, OSError, MapFormatError, EmptyGroundTruthError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {e!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
