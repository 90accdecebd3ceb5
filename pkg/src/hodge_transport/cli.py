"""Command-line entry point: ``hodge-transport generate|exp1|...|exp5``."""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import datasets as ds_mod
from .chains import save_series_csv
from .errors import HodgeTransportError, InvalidInputError
from .experiments import Experiment, GridFailure, Report, Table, config_from_pairs, parse_config_text, run

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID_CONFIG = 2
EXIT_GAP_FAILURE = 3
EXIT_ASSERTION = 4


def _collect_pairs(items) -> dict:
    """Merge ``--config`` arguments: each is a key=value file or an inline key=value pair."""
    pairs: dict = {}
    for item in items or ():
        path = Path(item)
        if path.is_file():
            pairs.update(parse_config_text(path.read_text()))
        elif "=" in item:
            pairs.update(parse_config_text(item))
        else:
            raise InvalidInputError(f"--config {item!r} is neither a file nor key=value")
    return pairs


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hodge-transport",
                                description="Zero-mode curvature and holonomy experiments on Rips filtrations.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", action="append", default=[], metavar="FILE|KEY=VALUE",
                        help="flat key=value config file, or a single key=value override (repeatable)")
        sp.add_argument("--out", default=None, help="output directory (default: print JSON to stdout)")
        sp.add_argument("--threads", type=int, default=None, help="worker threads for grid sweeps")

    g = sub.add_parser("generate", help="write a synthetic series as CSV")
    g.add_argument("--generator", required=True, choices=[n.value for n in ds_mod.GeneratorName])
    common(g)
    for e in Experiment:
        sp = sub.add_parser(e.value, help=f"run {e.value}")
        common(sp)
        sp.add_argument("--assert", dest="assert_", action="store_true",
                        help="exit with status 4 if any acceptance check fails")
        sp.add_argument("--svg", action="store_true", help="also write SVG heatmaps")
    return p


def _generate(args, pairs) -> int:
    gen = {k[4:]: float(v) for k, v in pairs.items() if k.startswith("gen.")}
    other = {k: v for k, v in pairs.items() if not k.startswith("gen.")}
    bad = set(other) - {"n_points", "n_t", "seed", "period"}
    if bad:
        raise InvalidInputError(f"unknown generate keys {sorted(bad)}")
    try:
        cfg = ds_mod.GeneratorConfig(
            args.generator,
            n_points_per_feature=int(other.get("n_points", 12)),
            n_times=int(other.get("n_t", 40)),
            period=float(other.get("period", 1.0)),
            seed=int(other.get("seed", 0)),
            shape=gen,
        )
    except ValueError as exc:
        raise InvalidInputError(str(exc)) from exc
    data = ds_mod.generate(cfg)
    out = Path(args.out) if args.out else None
    if isinstance(data, ds_mod.VineyardFamily):
        header = ["t"] + [f"vine{a}_{c}" for a in range(3) for c in ("birth", "death")] + ["elder_birth", "elder_death"]
        t_all = list(data.times) + [cfg.period]
        rows = [[t_all[j]] + [data.vines[a, j, c] for a in range(3) for c in range(2)] + list(data.elder[j])
                for j in range(len(t_all))]
        text = Report("generate", {}, {}, tables={"v": Table(header, rows)}).table_csv("v")
        if out is None:
            sys.stdout.write(text)
        else:
            out.mkdir(parents=True, exist_ok=True)
            (out / f"{cfg.name.value}_vines.csv").write_text(text)
        return EXIT_OK
    if out is None:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["t", "x", "y"])
        for t, frame in zip(data.times, data.points):
            for x, y in frame:
                w.writerow([repr(float(t)), repr(float(x)), repr(float(y))])
        return EXIT_OK
    out.mkdir(parents=True, exist_ok=True)
    save_series_csv(data, out / f"{cfg.name.value}.csv")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        pairs = _collect_pairs(args.config)
        if args.threads is not None:
            pairs["threads"] = str(args.threads)
        if args.command == "generate":
            pairs.pop("threads", None)
            return _generate(args, pairs)
        cfg = config_from_pairs(pairs, experiment=args.command)
        formats = set(cfg.formats)
        if args.svg:
            formats.add("svg")
        report = run(cfg)
    except GridFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GAP_FAILURE
    except InvalidInputError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    except HodgeTransportError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR

    out_dir = args.out or cfg.out_dir
    if out_dir:
        for path in report.write(out_dir, tuple(sorted(formats))):
            print(path)
    else:
        sys.stdout.write(report.to_json())
    for name, ok in report.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}", file=sys.stderr)
    if args.assert_ and not report.passed:
        return EXIT_ASSERTION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
