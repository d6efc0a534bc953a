"""Seeded Monte-Carlo trials, error-rate reports and sample-complexity sweeps."""
from __future__ import annotations

import csv
import io
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import stats

from ..errors import BNTestError, ConfigInvalid
from .registry import FAMILIES, TESTERS, build_instance, get_tester

CSV_COLUMNS = ["family", "tester", "n", "eps", "m", "T", "accept", "reject",
               "mean_samples", "wilson_lo", "wilson_hi", "seed"]
CONTRACT_LOWER = 0.55


@dataclass(frozen=True)
class ExperimentConfig:
    tester: str
    family: str
    eps: float
    T: int = 200
    seed: int = 0
    tester_params: dict = field(default_factory=dict)
    family_params: dict = field(default_factory=dict)
    instance_seed: int | None = None
    sweep: dict = field(default_factory=dict)
    threads: int = 1
    expect: str | None = None  # "accept" or "reject": the correct decision

    def __post_init__(self):
        if self.T < 1:
            raise ConfigInvalid("T must be >= 1")
        if self.tester not in TESTERS:
            raise ConfigInvalid(f"unknown tester {self.tester!r}")
        if self.family not in FAMILIES:
            raise ConfigInvalid(f"unknown family {self.family!r}")
        if self.expect not in (None, "accept", "reject"):
            raise ConfigInvalid("expect must be 'accept' or 'reject'")
        bad = set(self.sweep) - {"n", "eps", "m"}
        if bad:
            raise ConfigInvalid(f"unknown sweep axes {sorted(bad)}")
        if any(not isinstance(v, list) or not v for v in self.sweep.values()):
            raise ConfigInvalid("every sweep axis needs a non-empty list")

    @property
    def n(self):
        return self.family_params.get("n")

    def family_args(self) -> dict:
        return {"eps": self.eps, **self.family_params}

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigInvalid("config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        extra = set(obj) - known
        if extra:
            raise ConfigInvalid(f"unknown config keys {sorted(extra)}")
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ConfigInvalid(str(exc)) from None

    def to_dict(self) -> dict:
        return asdict(self)


def wilson_interval(k: int, T: int, confidence: float = 0.95) -> tuple[float, float]:
    if T == 0:
        return float("nan"), float("nan")
    ci = stats.binomtest(int(k), int(T)).proportion_ci(confidence, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class TrialResult:
    index: int
    seed: int
    decision: str | None
    samples_used: int
    trigger: str | None
    error: str | None = None


@dataclass(frozen=True)
class ErrorRateReport:
    family: str
    tester: str
    n: int | None
    eps: float
    m: int | None
    T: int
    accept: int
    reject: int
    errors: int
    mean_samples: float
    seed: int
    wilson_lo: float
    wilson_hi: float
    trials: tuple[TrialResult, ...] = ()

    @property
    def accept_rate(self) -> float:
        done = self.accept + self.reject
        return self.accept / done if done else float("nan")

    @property
    def undefined(self) -> bool:
        """No trial produced a verdict."""
        return self.accept + self.reject == 0

    def correct_interval(self, expect: str) -> tuple[float, float]:
        k = self.accept if expect == "accept" else self.reject
        return wilson_interval(k, self.accept + self.reject)

    def meets_contract(self, expect: str, lower: float = CONTRACT_LOWER) -> bool:
        lo, _ = self.correct_interval(expect)
        return lo > lower

    def row(self) -> list:
        return [self.family, self.tester, "" if self.n is None else self.n, repr(float(self.eps)),
                "" if self.m is None else self.m, self.T, self.accept, self.reject,
                repr(float(self.mean_samples)), repr(self.wilson_lo), repr(self.wilson_hi), self.seed]

    def to_dict(self) -> dict:
        d = dict(zip(CSV_COLUMNS, self.row()))
        d.update(errors=self.errors, accept_rate=self.accept_rate)
        return d


def trial_rngs(seed: int) -> list[np.random.Generator]:
    """Independent generators for the P stream, the Q stream and the tester."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)]


def _one_trial(cfg: ExperimentConfig, inst, index: int) -> TrialResult:
    seed = cfg.seed + index
    tester = get_tester(cfg.tester)
    try:
        v = tester(inst, cfg.eps, trial_rngs(seed), cfg.tester_params)
    except BNTestError as exc:
        return TrialResult(index, seed, None, 0, None, f"{type(exc).__name__}: {exc}")
    return TrialResult(index, seed, v.decision, int(v.samples_used), v.trigger)


def run_trials(cfg: ExperimentConfig, keep_trials: bool = False) -> ErrorRateReport:
    """``T`` independent trials; trial ``t`` is seeded with ``seed + t``."""
    inst_seed = cfg.seed if cfg.instance_seed is None else cfg.instance_seed
    inst = build_instance(cfg.family, cfg.family_args(), inst_seed)
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            results = list(pool.map(lambda t: _one_trial(cfg, inst, t), range(cfg.T)))
    else:
        results = [_one_trial(cfg, inst, t) for t in range(cfg.T)]
    results.sort(key=lambda r: r.index)
    acc = sum(r.decision == "accept" for r in results)
    rej = sum(r.decision == "reject" for r in results)
    err = sum(r.error is not None for r in results)
    done = [r.samples_used for r in results if r.error is None]
    lo, hi = wilson_interval(acc, acc + rej)
    return ErrorRateReport(cfg.family, cfg.tester, cfg.n, cfg.eps, cfg.tester_params.get("m"),
                           cfg.T, acc, rej, err, float(np.mean(done)) if done else float("nan"),
                           cfg.seed, lo, hi, tuple(results) if keep_trials else ())


def reports_to_csv(reports: Sequence[ErrorRateReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


def reports_to_json(reports: Sequence[ErrorRateReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True)


def sweep_points(cfg: ExperimentConfig) -> list[ExperimentConfig]:
    axes = sorted(cfg.sweep)
    if not axes:
        return [cfg]
    out = []
    for values in itertools.product(*(cfg.sweep[a] for a in axes)):
        point = dict(zip(axes, values))
        fam = dict(cfg.family_params)
        tp = dict(cfg.tester_params)
        eps = point.get("eps", cfg.eps)
        if "n" in point:
            fam["n"] = point["n"]
        if "m" in point:
            tp["m"] = point["m"]
        out.append(replace(cfg, eps=eps, family_params=fam, tester_params=tp, sweep={}))
    return out


def sweep_sample_complexity(cfg: ExperimentConfig) -> list[ErrorRateReport]:
    return [run_trials(point) for point in sweep_points(cfg)]


def sweep_table(null_cfg: ExperimentConfig, alt_cfg: ExperimentConfig) -> list[dict]:
    """Per sweep point: null accept rate and alternative reject rate."""
    rows = []
    for a, b in zip(sweep_points(null_cfg), sweep_points(alt_cfg)):
        ra, rb = run_trials(a), run_trials(b)
        rows.append({"n": a.n, "eps": a.eps, "m": a.tester_params.get("m"),
                     "null_accept": ra.accept_rate, "alt_reject": 1 - rb.accept_rate,
                     "mean_samples": ra.mean_samples})
    return rows
