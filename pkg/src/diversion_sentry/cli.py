"""Command-line interface: ``simulate``, ``train``, ``detect``, ``bench``, ``swu``.

Exit codes: 0 success, 1 usage error, 2 invalid configuration or data, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench
from .core import DiversionSentryError, RngStream, parse_series, serialize_series
from .detectors import KINDS, ShiftSpec, dumps_model, loads_model
from .enrichment import (
    DEFAULT_TAILS_ASSAY,
    KG_SWU_PER_MTSWU,
    NATURAL_FEED_ASSAY,
    EnrichmentSpec,
    separative_work,
)
from .simulator import ScenarioConfig, default_paper_scenario, generate_training_and_test

log = logging.getLogger("diversion_sentry")

EXIT_USAGE, EXIT_CONFIG, EXIT_IO = 1, 2, 3


class UsageError(Exception):
    pass


class ConfigFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path, text: str):
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _load_json(path) -> dict:
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise ConfigFailure(f"{path}: not valid JSON: {exc}") from None


def _scenario(args) -> ScenarioConfig:
    if getattr(args, "paper_default", False):
        return default_paper_scenario()
    if getattr(args, "scenario", None):
        return ScenarioConfig.from_dict(_load_json(args.scenario))
    raise UsageError("give --paper-default or --scenario FILE")


def _shift(args, base: dict | None = None) -> ShiftSpec:
    base = dict(base or {})
    if args.shift_lower is not None:
        base["lower_mult"] = args.shift_lower
    if args.shift_upper is not None:
        base["upper_mult"] = args.shift_upper
    return ShiftSpec(**base)


def _add_shift_flags(p):
    p.add_argument("--shift-lower", type=float, help="smallest post-change mean shift, in stds (default 0.5)")
    p.add_argument("--shift-upper", type=float, help="largest post-change mean shift, in stds (default 3.0)")


def cmd_simulate(args) -> int:
    if not (args.train_out or args.test_out):
        raise UsageError("give --train-out and/or --test-out")
    config = _scenario(args)
    training, test = generate_training_and_test(config, RngStream(args.seed))
    if args.train_out:
        _write(args.train_out, serialize_series(training))
    if args.test_out:
        _write(args.test_out, serialize_series(test))
    print(f"change_point: {config.change_point}")
    print(f"first_diversion: {test.change_point if test.change_point is not None else 'none'}")
    return 0


def _detector_params(algo: str, args, shift: ShiftSpec) -> dict:
    if algo == "ks":
        return {"window": args.window}
    params = {"shift": shift}
    if algo == "gm_cusum":
        params["k_max"] = args.k_max
    if algo == "m_cusum":
        params["m_range"] = (args.m_min, args.m_max)
    return params


def cmd_train(args) -> int:
    training = parse_series(_read(args.data))
    det = bench.make_detector(args.algo, args.seed, **_detector_params(args.algo, args, _shift(args)))
    det.fit(training)
    _write(args.out, dumps_model(det) + "\n")
    print(f"kind: {det.kind}")
    if args.algo == "m_cusum":
        print(f"M = {det.m_}")
        for i, (e, z) in enumerate(det.cluster_means(), start=1):
            print(f"  cluster {i}: energy_mean={e:.6g} power_mean={z:.6g}")
    elif args.algo == "gm_cusum":
        print(f"duration components: {det.duration_mix_.k}; power components: {det.power_mix_.k}")
    elif args.algo == "g_cusum":
        print(f"duration: mean={det.duration_g0_.mean:.6g} std={det.duration_g0_.std:.6g}")
        print(f"power: mean={det.power_g0_.mean:.6g} std={det.power_g0_.std:.6g}")
    else:
        print(f"window: {det.window}")
    return 0


def cmd_detect(args) -> int:
    det = loads_model(_read(args.model))
    data = parse_series(_read(args.data))
    t = det.alarm_time(data, args.threshold)
    print("none" if t is None else t)
    return 0


def _bench_settings(args) -> dict:
    cfg = _load_json(args.config) if args.config else {}
    if not isinstance(cfg, dict):
        raise ConfigFailure("bench config must be a JSON object")
    known = {"scenario", "algo", "algos", "shift", "window", "thresholds", "trials", "seed"}
    unknown = set(cfg) - known
    if unknown:
        raise ConfigFailure(f"unknown bench config key(s): {', '.join(sorted(unknown))}")

    if args.paper_default or args.scenario:
        scenario = _scenario(args)
    elif "scenario" in cfg:
        scenario = ScenarioConfig.from_dict(cfg["scenario"])
    else:
        raise UsageError("give --paper-default, --scenario FILE or a config with a scenario")

    algos = args.algos or cfg.get("algos") or cfg.get("algo") or list(KINDS)
    if isinstance(algos, str):
        algos = algos.split(",")
    bad = [a for a in algos if a not in KINDS]
    if bad:
        raise ConfigFailure(f"unknown algorithm(s): {', '.join(bad)}")

    thresholds = cfg.get("thresholds")
    if args.thresholds:
        try:
            thresholds = [float(x) for x in args.thresholds.split(",")]
        except ValueError:
            raise ConfigFailure(f"bad --thresholds {args.thresholds!r}") from None
    trials = args.trials if args.trials is not None else cfg.get("trials", 200)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    if int(trials) < 1:
        raise ConfigFailure("trials must be at least 1")
    window = args.window if args.window is not None else cfg.get("window", 50)
    return {
        "scenario": scenario,
        "algos": algos,
        "thresholds": thresholds,
        "trials": int(trials),
        "seed": int(seed),
        "shift": _shift(args, cfg.get("shift")),
        "window": int(window),
    }


def cmd_bench(args) -> int:
    s = _bench_settings(args)
    algos = {}
    for algo in s["algos"]:
        params = {"window": s["window"]} if algo == "ks" else {"shift": s["shift"]}
        th = s["thresholds"] if s["thresholds"] is not None else bench.default_thresholds(algo, args.n_thresholds)
        algos[algo] = (bench.make_detector(algo, s["seed"], **params), np.asarray(th, dtype=float))
    log.info("running %d trials for %s", s["trials"], ", ".join(algos))
    curves = bench.run_experiment(s["scenario"], algos, s["trials"], s["seed"], args.threads, args.retrain)
    _write(args.out, bench.curves_to_csv(curves))
    return 0


def cmd_swu(args) -> int:
    spec = EnrichmentSpec(
        product_assay=args.product, product_mass_kg=args.mass, feed_assay=args.feed, tails_assay=args.tails
    )
    kg = separative_work(spec)
    print(f"kg-SWU: {kg:.6g}")
    print(f"MTSWU: {kg / KG_SWU_PER_MTSWU:.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="diversion-sentry", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("simulate", help="simulate training and test shipment streams")
    p.add_argument("--paper-default", action="store_true", help="six-pattern reference scenario")
    p.add_argument("--scenario", help="scenario JSON file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-out")
    p.add_argument("--test-out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="train a detector on diversion-free shipments")
    p.add_argument("--algo", required=True, choices=KINDS)
    p.add_argument("--data", required=True, help="training CSV")
    p.add_argument("--out", required=True, help="model JSON to write")
    p.add_argument("--window", type=int, default=50, help="KS window length")
    p.add_argument("--k-max", type=int, default=8, help="largest mixture order for gm_cusum")
    p.add_argument("--m-min", type=int, default=2)
    p.add_argument("--m-max", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    _add_shift_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("detect", help="run a trained detector over a shipment CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--threshold", type=float, required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("bench", help="Monte Carlo delay / false-alarm curves")
    p.add_argument("--paper-default", action="store_true")
    p.add_argument("--scenario")
    p.add_argument("--config", help="JSON with scenario, algos, shift, window, thresholds, trials, seed")
    p.add_argument("--algos", help="comma-separated subset of " + ",".join(KINDS))
    p.add_argument("--thresholds", help="comma-separated thresholds used for every algorithm")
    p.add_argument("--n-thresholds", type=int, default=25)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--threads", type=int, help=f"worker threads (default ${bench.THREADS_ENV}, 0 = auto)")
    p.add_argument("--retrain", action="store_true", help="fresh training data for every trial")
    p.add_argument("--out", required=True, help="curve CSV to write")
    _add_shift_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("swu", help="separative work for an enrichment job")
    p.add_argument("--product", type=float, required=True, help="product assay (mass fraction)")
    p.add_argument("--mass", type=float, required=True, help="product mass in kg")
    p.add_argument("--feed", type=float, default=NATURAL_FEED_ASSAY)
    p.add_argument("--tails", type=float, default=DEFAULT_TAILS_ASSAY)
    p.set_defaults(func=cmd_swu)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DiversionSentryError, ConfigFailure, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
