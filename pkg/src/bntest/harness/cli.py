"""Command-line entry point: ``python -m bntest <command> CONFIG``."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .. import instances
from ..core.inference import balancedness
from ..core.net import BayesNet
from ..core.nondegeneracy import nondegeneracy_interval
from ..errors import BNTestError, ConfigInvalid
from .registry import build_instance, get_tester
from .runner import (ExperimentConfig, _one_trial, reports_to_csv, reports_to_json, run_trials,
                     sweep_sample_complexity)

CONFIG_ERROR = 2


def _load(path: str) -> dict:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ConfigInvalid("config must be a JSON object")
    return obj


def _experiment(obj: dict, args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_dict(obj)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.threads is not None:
        cfg = replace(cfg, threads=args.threads)
    return cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_gen(obj, args) -> str:
    if "family" not in obj:
        raise ConfigInvalid("gen needs 'family'")
    seed = args.seed if args.seed is not None else obj.get("seed", 0)
    try:
        env = instances.generate(obj["family"], obj.get("params", {}), seed)
    except KeyError as exc:
        raise ConfigInvalid(f"missing family parameter {exc}") from None
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from None
    return instances.to_json(env) + "\n"


def cmd_test(obj, args) -> str:
    cfg = _experiment(obj, args)
    get_tester(cfg.tester)
    inst = build_instance(cfg.family, cfg.family_args(),
                          cfg.seed if cfg.instance_seed is None else cfg.instance_seed)
    r = _one_trial(cfg, inst, 0)
    out = {"decision": r.decision, "samples_used": r.samples_used, "trigger": r.trigger,
           "seed": r.seed, "error": r.error}
    return json.dumps(out, sort_keys=True) + "\n"


def _fmt(reports, args) -> str:
    if args.format == "json" or (args.out or "").endswith(".json"):
        return reports_to_json(reports) + "\n"
    return reports_to_csv(reports)


def cmd_trials(obj, args) -> str:
    return _fmt([run_trials(_experiment(obj, args))], args)


def cmd_sweep(obj, args) -> str:
    cfg = _experiment(obj, args)
    if not cfg.sweep:
        raise ConfigInvalid("sweep needs at least one axis under 'sweep'")
    return _fmt(sweep_sample_complexity(cfg), args)


def cmd_audit(obj, args) -> str:
    if "net" in obj:
        try:
            net = BayesNet.from_dict(obj["net"])
        except (KeyError, TypeError) as exc:
            raise ConfigInvalid(f"malformed net: {exc}") from None
    elif "family" in obj:
        seed = args.seed if args.seed is not None else obj.get("seed", 0)
        inst = build_instance(obj["family"], obj.get("family_params", {}), seed)
        net = inst.Q.as_net() if not isinstance(inst.Q, BayesNet) else inst.Q
    else:
        raise ConfigInvalid("audit needs 'net' or 'family'")
    bal = balancedness(net)
    out = {"n": net.n, "d": net.structure.d, "c": bal.c, "C": bal.C, "exact": bal.exact}
    d = obj.get("d")
    try:
        rep = nondegeneracy_interval(net, d)
    except BNTestError as exc:
        out["nondegeneracy"] = {"error": f"{type(exc).__name__}: {exc}"}
    else:
        weak = rep.weakest()
        out["nondegeneracy"] = {
            "triples": len(rep.intervals),
            "gamma_lower": None if weak is None else rep.gamma_lower,
            "weakest": None if weak is None else {"i": weak.triple.i, "j": weak.triple.j,
                                                  "S": list(weak.triple.S), "beta": weak.beta},
        }
    return json.dumps(out, indent=2, sort_keys=True) + "\n"


COMMANDS = {"gen": cmd_gen, "test": cmd_test, "trials": cmd_trials, "sweep": cmd_sweep,
            "audit": cmd_audit}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bntest", description="Testers for binary Bayes nets.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("config", help="JSON config file")
    ap.add_argument("--seed", type=int, default=None, help="override the base seed")
    ap.add_argument("--threads", type=int, default=None, help="worker threads for trials")
    ap.add_argument("--out", default=None, help="output file (default: stdout)")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads is not None and args.threads < 1:
            raise ConfigInvalid("--threads must be >= 1")
        text = COMMANDS[args.command](_load(args.config), args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return CONFIG_ERROR
    _emit(text, args.out)
    return 0
