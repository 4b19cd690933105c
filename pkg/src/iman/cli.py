"""Command line entry point: ``iman {discover,simulate,bench,revcheck,quantize}``.

Exit codes: 0 success, 2 bad input data, 3 not enough data for discovery,
4 reversibility predicates disagree.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import metrics, revcheck
from .discover import InsufficientDataError, discover
from .freqtable import DataError
from .indep import MIN_COUNT
from .modcore import Distribution
from .simulate import simulate, write_csv, write_truth

EXIT_OK, EXIT_DATA, EXIT_INSUFFICIENT, EXIT_DISAGREE = 0, 2, 3, 4

log = logging.getLogger("iman")

BENCH_COLUMNS = ["d", "m", "n", "pa", "noise", "trials", "ero", "acc", "ct_ms", "failures"]

GRID_PRESETS = {
    "table1": "d=2,4,6,8;m=2,3,4,5,6;n=1000;pa=0.5;noise=uniform-random",
    "table2": "d=2,4,6,8;m=2,3,4,5,6;n=1000;pa=0.5;noise=two-point",
    "table4": "d=4;m=4;n=100,500,1000,5000,10000;pa=0.5;noise=uniform-random",
    "table5": "d=4;m=4;n=1000;pa=0.0,0.2,0.4,0.6,0.8,1.0;noise=uniform-random",
}


# ----------------------------------------------------------------------------
# input helpers

def read_int_csv(path):
    """Header row plus integer cells. Raises DataError naming the bad cell."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if not rows[1:]:
        raise DataError(f"{path}: no data rows")
    data = np.empty((len(rows) - 1, len(header)), dtype=np.int64)
    for r, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise DataError(f"{path}: row {r} has {len(row)} cells, header has {len(header)}")
        for c, cell in enumerate(row):
            try:
                data[r - 1, c] = int(cell.strip())
            except ValueError:
                raise DataError(f"{path}: row {r}, column {header[c]!r}: {cell!r} is not an integer") from None
    return header, data


def read_float_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    if len(rows) < 2:
        raise DataError(f"{path}: need a header and at least one data row")
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(c) for c in row] for row in rows[1:]], dtype=np.float64)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
    if data.shape[1] != len(header):
        raise DataError(f"{path}: ragged rows")
    return header, data


def parse_probs(text: str) -> np.ndarray:
    vals = [float(Fraction(t.strip())) for t in text.replace(";", ",").split(",") if t.strip()]
    return np.array(vals, dtype=np.float64)


def parse_noise(text: str):
    """``uniform-random`` | ``two-point[:p[:i]]`` | ``point[:i]``."""
    kind, *rest = text.split(":")
    p = float(rest[0]) if kind in ("two-point", "twopoint") and len(rest) > 0 and rest[0] else None
    i = None
    if kind in ("two-point", "twopoint") and len(rest) > 1:
        i = int(rest[1])
    if kind in ("point", "noiseless") and rest:
        i = int(rest[0])
    return kind, p, i


def parse_grid(grid: str) -> list[dict]:
    grid = GRID_PRESETS.get(grid, grid)
    axes = {}
    for part in grid.split(";"):
        if not part.strip():
            continue
        key, _, vals = part.partition("=")
        axes[key.strip()] = [v.strip() for v in vals.split(",") if v.strip()]
    missing = {"d", "m", "n", "pa"} - set(axes)
    if missing:
        raise ValueError(f"grid is missing {sorted(missing)}")
    axes.setdefault("noise", ["uniform-random"])
    cells = []
    for d in axes["d"]:
        for m in axes["m"]:
            for n in axes["n"]:
                for pa in axes["pa"]:
                    for noise in axes["noise"]:
                        cells.append({"d": int(d), "m": int(m), "n": int(n), "pa": float(pa), "noise": noise})
    return cells


# ----------------------------------------------------------------------------
# commands

def cmd_discover(args) -> int:
    try:
        header, data = read_int_csv(args.input)
        result = discover(data, args.modulus, alpha=args.alpha, min_count=args.min_count, variables=header)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InsufficientDataError as exc:
        print(f"insufficient data: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    dot = result.to_dot()
    if args.out_dot:
        Path(args.out_dot).write_text(dot, encoding="utf-8")
    if args.out_json:
        Path(args.out_json).write_text(json.dumps(result.to_dict(), indent=2) + "\n", encoding="utf-8")
    if not args.out_dot:
        sys.stdout.write(dot)
    for v, pa in result.order:
        log.info("%s <- {%s}", v, ", ".join(map(str, sorted(pa, key=result.variables.index))))
    return EXIT_OK


def _describe(v) -> str:
    if v is None:
        return "n/a"
    if not v.reversible:
        return "not reversible"
    out = "reversible"
    if v.matched_condition:
        out += f" ({v.matched_condition})"
    if v.witness_g is not None:
        out += f", witness g={list(v.witness_g)}"
    return out


def cmd_revcheck(args) -> int:
    try:
        p_raw, q_raw = parse_probs(args.p), parse_probs(args.q)
        m = args.m if args.m is not None else len(p_raw)
        if len(p_raw) != m or len(q_raw) != m:
            raise ValueError(f"--p and --q need exactly m={m} entries")
        for name, v in (("p", p_raw), ("q", q_raw)):
            if abs(v.sum() - 1.0) > 1e-9:
                raise ValueError(f"{name} sums to {v.sum()}, not 1")
        p = Distribution(p_raw, normalize=True)
        q = Distribution(q_raw, normalize=True)
        report = revcheck.check_all(p, q)
    except (ValueError, ZeroDivisionError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    theorem = report["theorem"]
    lines = [
        f"m = {m}",
        "theorem: " + (_describe(theorem) if theorem is not None else "unsupported modulus (not a prime power)"),
        "lemma:   " + (_describe(report["lemma"]) if report["lemma"] is not None else "n/a (m > 4)"),
        "oracle:  " + (_describe(report["oracle"]) if report["oracle"] is not None else "skipped (m > 8)"),
    ]
    if theorem is None and report["oracle"] is not None:
        lines.append("verdict: oracle-only")
    lines.append("agreement: " + ("yes" if report["agree"] else "NO"))
    print("\n".join(lines))
    if args.json:
        payload = {
            k: None if v is None else {
                "reversible": v.reversible,
                "matched_condition": v.matched_condition,
                "witness_g": None if v.witness_g is None else list(v.witness_g),
            }
            for k, v in report.items() if k != "agree"
        }
        payload["agree"] = report["agree"]
        Path(args.json).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK if report["agree"] else EXIT_DISAGREE


def cmd_simulate(args) -> int:
    kind, p, i = parse_noise(args.noise)
    try:
        data, model = simulate(args.d, args.m, args.n, args.pa, kind, seed=args.seed,
                               injective=not args.no_injective, noise_p=p, noise_i=i)
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    write_csv(args.out, data)
    if args.truth:
        write_truth(args.truth, model, args.seed)
    return EXIT_OK


def run_trial(cell: dict, seed: int, trial: int, alpha: float = 0.05, min_count: int = MIN_COUNT):
    """One simulate-and-discover round; returns ``(ero, acc, ct_ms, failed)``."""
    kind, p, i = parse_noise(cell["noise"])
    data, model = simulate(cell["d"], cell["m"], cell["n"], cell["pa"], kind, seed=(seed, trial), noise_p=p, noise_i=i)
    B = model.truth_adjacency()
    t0 = time.perf_counter()
    failed = False
    try:
        B_hat = discover(data, cell["m"], alpha=alpha, min_count=min_count).adjacency()
    except InsufficientDataError:
        failed = True
        B_hat = np.zeros_like(B)
    ct = (time.perf_counter() - t0) * 1e3
    if cell["d"] < 2:
        return 0.0, 1.0, ct, failed
    return metrics.ero(B, B_hat), metrics.acc(B, B_hat), ct, failed


def _run_trial_star(a):
    return run_trial(*a)


def bench_workers() -> int:
    cap = os.environ.get("IMAN_THREADS")
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def run_bench(cells: list[dict], trials: int, seed: int, alpha: float = 0.05, workers: int | None = None,
              min_count: int = MIN_COUNT) -> list[dict]:
    workers = bench_workers() if workers is None else workers
    rows = []
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for cell in cells:
            jobs = [(cell, seed, t, alpha, min_count) for t in range(trials)]
            out = list(pool.map(_run_trial_star, jobs)) if pool else [run_trial(*j) for j in jobs]
            arr = np.array([o[:3] for o in out], dtype=np.float64)
            rows.append({
                **cell,
                "trials": trials,
                "ero": float(arr[:, 0].mean()),
                "acc": float(arr[:, 1].mean()),
                "ct_ms": float(arr[:, 2].mean()),
                "failures": int(sum(o[3] for o in out)),
            })
            log.info("%s", rows[-1])
    finally:
        if pool:
            pool.shutdown()
    return rows


def cmd_bench(args) -> int:
    try:
        cells = parse_grid(args.grid)
    except ValueError as exc:
        print(f"bad grid: {exc}", file=sys.stderr)
        return EXIT_DATA
    rows = run_bench(cells, args.trials, args.seed, args.alpha)
    out = open(args.report, "w", newline="", encoding="utf-8") if args.report else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=BENCH_COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in r.items()})
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def quantize(values: np.ndarray, bins: int | None = None, lo=None, hi=None, cuts=None) -> np.ndarray:
    """Map each column of ``values`` onto ``{0, .., k-1}``.

    With ``cuts`` the bin index is the number of cut points ``<= x``.
    Otherwise ``bins`` equal-width bins span ``[lo, hi)`` (per-column min and
    max when not given); edge values go to the higher bin and values outside
    the range are clamped to the end bins.
    """
    x = np.asarray(values, dtype=np.float64)
    if cuts is not None:
        cuts = np.sort(np.asarray(cuts, dtype=np.float64))
        return np.searchsorted(cuts, x, side="right").astype(np.int64)
    if bins is None or bins < 1:
        raise ValueError("need bins >= 1 or explicit cuts")
    lo = np.nanmin(x, axis=0) if lo is None else np.full(x.shape[-1], float(lo))
    hi = np.nanmax(x, axis=0) if hi is None else np.full(x.shape[-1], float(hi))
    width = (hi - lo) / bins
    with np.errstate(divide="ignore", invalid="ignore"):
        # scale first, then divide by bins: keeps exact edges (e.g. lo + width) from rounding down
        k = np.where(width > 0, np.floor((x - lo) * bins / np.where(hi > lo, hi - lo, 1.0)), 0.0)
    return np.clip(k, 0, bins - 1).astype(np.int64)


def cmd_quantize(args) -> int:
    try:
        header, x = read_float_csv(args.input)
        if args.cuts is not None:
            out = quantize(x, cuts=args.cuts)
        else:
            lo, hi = (args.range if args.range else (None, None))
            out = quantize(x, args.bins, lo, hi)
    except (DataError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    if args.output:
        write_csv(args.output, out, header)
    else:
        w = csv.writer(sys.stdout)
        w.writerow(header)
        w.writerows(out.tolist())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="iman", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("discover", help="learn a causal DAG from a modular CSV")
    d.add_argument("input")
    d.add_argument("--modulus", "-m", type=int, required=True)
    d.add_argument("--alpha", type=float, default=0.05)
    d.add_argument("--min-count", type=int, default=MIN_COUNT)
    d.add_argument("--out-dot")
    d.add_argument("--out-json")
    d.set_defaults(func=cmd_discover)

    r = sub.add_parser("revcheck", help="bivariate reversibility report")
    r.add_argument("--m", type=int)
    r.add_argument("--p", required=True, help="comma-separated cause distribution, fractions allowed")
    r.add_argument("--q", required=True, help="comma-separated noise distribution")
    r.add_argument("--json", help="also write the report as JSON")
    r.set_defaults(func=cmd_revcheck)

    s = sub.add_parser("simulate", help="sample a dataset from a random model")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--pa", type=float, default=0.5)
    s.add_argument("--noise", default="uniform-random", help="uniform-random | two-point[:p[:i]] | point[:i]")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--truth")
    s.add_argument("--no-injective", action="store_true", help="single-parent functions need not be bijections")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bench", help="Monte Carlo grid of Ero/Acc/CT")
    b.add_argument("--grid", required=True,
                   help="'d=4;m=4;n=100,1000;pa=0.5;noise=uniform-random' or a preset: " + ", ".join(GRID_PRESETS))
    b.add_argument("--trials", type=int, default=100)
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--alpha", type=float, default=0.05)
    b.add_argument("--report")
    b.set_defaults(func=cmd_bench)

    q = sub.add_parser("quantize", help="bin continuous columns into residues")
    q.add_argument("--input", required=True)
    q.add_argument("--bins", type=int)
    q.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"))
    q.add_argument("--cuts", type=float, nargs="+")
    q.add_argument("--output")
    q.set_defaults(func=cmd_quantize)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
