"""Acceptance criteria.  Each test prints one PASS/FAIL line (outside pytest's
capture) and then asserts the criterion."""
import time
from itertools import combinations
from math import log, sqrt

import numpy as np
import pytest
from scipy import stats

from bntest import BayesNet, DagStructure, ProductSpec
from bntest.bn_testers import thought_experiment_statistic
from bntest.core import (balancedness, beta_exact, chi2_identity_proxy, ci_surgery,
                         conditional_covariances, distance_to_ci, hellinger_bound_bn,
                         hellinger_sq_exact, kl_lower_proxy, kl_same_structure, l1_exact,
                         product_l1_lower_bound, tree_nondegeneracy, tv_exact)
from bntest.core.nondegeneracy import ci_table
from bntest.core.sampling import NetSource
from bntest.harness import ExperimentConfig, run_trials
from bntest.harness.cli import main
from bntest.harness.registry import random_tree, shifted
from bntest.instances import gen_tree_matching_net, matching_closed_form
from bntest.learner import learn_known_structure, light_l1_contribution
from bntest.product import identity_statistic, tolerant_map_fdelta
from bntest.structure import chow_liu, exact_mutual_information, skeleton_edges

from conftest import random_net, random_structure

SLACK = 1e-9
CONTRACT = 0.55


@pytest.fixture
def report(capsys):
    def emit(name, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, f"{name}: {detail}"
    return emit


def within_se(values, target, k=4.0):
    values = np.asarray(values, float)
    se = values.std(ddof=1) / sqrt(values.size)
    return abs(values.mean() - target) <= k * se, (values.mean() - target) / se


# --- 1 ------------------------------------------------------------------------------

def test_c1_distance_inequalities(report):
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(500):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 9))
        s = random_structure(rng, n, 2)
        P, Q = random_net(rng, n, 2, structure=s), random_net(rng, n, 2, structure=s)
        kl = kl_same_structure(P, Q)
        l1 = l1_exact(P, Q)
        h2 = hellinger_sq_exact(P, Q)
        tv = 0.5 * l1
        gaps = [
            kl_lower_proxy(P, Q) - kl,                      # sandwich, lower side
            kl - chi2_identity_proxy(P, Q, "P"),            # sandwich, upper side
            l1 ** 2 - 2 * kl,                               # Pinsker
            h2 - tv,                                        # H^2 <= TV
            tv - sqrt(2) * sqrt(h2),                        # TV <= sqrt(2) H
            h2 - hellinger_bound_bn(P, Q),                  # CPT bound dominates
        ]
        p, q = rng.uniform(0.05, 0.95, n), rng.uniform(0.05, 0.95, n)
        gaps.append(product_l1_lower_bound(p, q) - l1_exact(ProductSpec(p), ProductSpec(q)) ** 2)
        worst = max(worst, max(gaps))
    elapsed = time.perf_counter() - t0
    report("1 distance inequalities", worst <= SLACK and elapsed < 60,
           f"500 pairs, worst violation {worst:.2e}, {elapsed:.1f}s")


# --- 2 ------------------------------------------------------------------------------

def test_c2_unbiasedness(report):
    t0 = time.perf_counter()
    n, m, T = 20, 5000, 2000
    rng = np.random.default_rng(2024)
    q = rng.uniform(0.2, 0.5, n)
    p = q + rng.choice([-1, 1], n) * 0.01
    want = m * m * np.sum((p - q) ** 2 / (q * (1 - q)))
    alt = [identity_statistic(rng.poisson(m * p), m, q) for _ in range(T)]
    null = [identity_statistic(rng.poisson(m * q), m, q) for _ in range(T)]
    ok_a, za = within_se(alt, want)
    ok_n, zn = within_se(null, 0.0)

    Q = random_tree(10, 0.3, 0.7, 7)
    P = shifted(Q, 0.08, 8, 0.05, 0.95)
    mb, Tb = 3000, 400
    want_b = chi2_identity_proxy(P, Q, "Q")
    sa, sn = NetSource(P, 11), NetSource(Q, 12)
    alt_b = [thought_experiment_statistic(Q, sa, mb) for _ in range(Tb)]
    null_b = [thought_experiment_statistic(Q, sn, mb) for _ in range(Tb)]
    ok_ab, zab = within_se(alt_b, want_b)
    ok_nb, znb = within_se(null_b, 0.0)
    elapsed = time.perf_counter() - t0
    report("2 statistic unbiasedness", ok_a and ok_n and ok_ab and ok_nb and elapsed < 300,
           f"product z={za:+.2f} null z={zn:+.2f}; net z={zab:+.2f} null z={znb:+.2f}; {elapsed:.0f}s")


# --- 3 ------------------------------------------------------------------------------

def _pair(tester, family, eps, fam, tp=None, null_fam=None, alt_fam=None, T=200):
    null = run_trials(ExperimentConfig(tester, family, eps, T, 0, tp or {}, {**fam, **(null_fam or {})}))
    alt = run_trials(ExperimentConfig(tester, family, eps, T, 10**6, tp or {}, {**fam, **(alt_fam or {})}))
    return null.correct_interval("accept")[0], alt.correct_interval("reject")[0], null, alt


def test_c3a_product_identity(report):
    lo_n = run_trials(ExperimentConfig("product_identity", "product_uniform", 0.25, 200, 0,
                                       {"constant": 2716}, {"n": 50})).correct_interval("accept")[0]
    lo_a = run_trials(ExperimentConfig("product_identity", "product_uniformity_no", 0.25, 200, 10**6,
                                       {"constant": 2716}, {"n": 50})).correct_interval("reject")[0]
    report("3a product identity n=50 eps=0.25", lo_n > CONTRACT and lo_a > CONTRACT,
           f"Wilson lower: null accept {lo_n:.3f}, far reject {lo_a:.3f}")


def test_c3b_product_closeness(report):
    lo_n, lo_a, _, _ = _pair("product_closeness", "closeness_pair", 0.3, {"n": 20},
                             null_fam={"far": False}, alt_fam={"far": True})
    report("3b product closeness n=20 eps=0.3 (calibrated C)", lo_n > CONTRACT and lo_a > CONTRACT,
           f"Wilson lower: null accept {lo_n:.3f}, far reject {lo_a:.3f}")


def test_c3c_known_structure_identity(report):
    fam = {"n": 10, "lo": 0.3, "hi": 0.7}
    Q = random_tree(10, 0.3, 0.7, 0)
    P = shifted(Q, 0.15, 1)
    bal = balancedness(Q)
    l1 = l1_exact(P, Q)
    lo_n, lo_a, _, _ = _pair("bn_identity_known", "random_tree", 0.3, fam, alt_fam={"shift": 0.15})
    ok = bal.is_balanced(0.3, 0.2) and l1 >= 0.3 and lo_n > CONTRACT and lo_a > CONTRACT
    report("3c known-structure identity n=10 d=1", ok,
           f"Q is ({bal.c:.3f}, {bal.C:.3f})-balanced, l1={l1:.3f}; "
           f"Wilson lower: null accept {lo_n:.3f}, far reject {lo_a:.3f}")


def test_c3d_structure_test(report):
    t0 = time.perf_counter()
    lo_n, lo_a, null, _ = _pair("structure", "v_structure", 0.3, {}, {"d": 1}, alt_fam={"wrong": True})
    report("3d structure test n=6 d=1", lo_n > CONTRACT and lo_a > CONTRACT,
           f"Wilson lower: true accept {lo_n:.3f}, wrong reject {lo_a:.3f}; {time.perf_counter() - t0:.0f}s")


# --- 4 ------------------------------------------------------------------------------

def test_c4_tree_family(report):
    worst = 0.0
    for n in (4, 6, 8):
        net, lam = gen_tree_matching_net(n, 0.3, n)
        delta = 0.3 / sqrt(n)
        worst = max(worst, float(np.abs(net.joint - matching_closed_form(lam, delta)).max()))
        r = np.arange(n // 2 + 1)
        tv_bin = 0.5 * np.abs(stats.binom.pmf(r, n // 2, 0.5) - stats.binom.pmf(r, n // 2, 0.5 + delta)).sum()
        worst = max(worst, abs(l1_exact(net, BayesNet.product(np.full(n, 0.5))) - 2 * tv_bin))
    report("4 tree-family exactness", worst <= 1e-12, f"max deviation {worst:.2e}")


# --- 5 ------------------------------------------------------------------------------

def test_c5_ci_bracketing(report):
    rng = np.random.default_rng(5)
    bad, checked, worst_cov, worst_tv = 0, 0, 0.0, 0.0
    for k in range(200):
        n = int(rng.integers(3, 5))
        P = random_net(rng, n, 2)
        i, j = sorted(rng.choice(n, 2, replace=False).tolist())
        rest = [v for v in range(n) if v not in (i, j)]
        S = rest[: int(rng.integers(0, len(rest) + 1))]
        beta = beta_exact(P, i, j, S)
        R = ci_surgery(P, i, j, S)
        cov, _ = conditional_covariances(ci_table(R, n, i, j, S), len(S))
        worst_cov = max(worst_cov, float(np.abs(cov).max()))
        worst_tv = max(worst_tv, abs(tv_exact(P.joint, R) - 2 * beta))
        dist = distance_to_ci(P, i, j, S, restarts=2, seed=k)
        checked += 1
        bad += not (beta / 3 - SLACK <= dist <= 2 * beta + SLACK)
    ok = bad == 0 and worst_cov <= 1e-12 and worst_tv <= 1e-12
    report("5 CI bracketing", ok,
           f"{checked} nets, {bad} outside [beta/3, 2 beta], max |cov| {worst_cov:.1e}, "
           f"max |TV - 2 beta| {worst_tv:.1e}")


# --- 6 ------------------------------------------------------------------------------

def _tree_path(Q, a, b):
    parent = {i: ps[0] for i, ps in enumerate(Q.parents) if ps}

    def up(v):
        out = [v]
        while v in parent:
            v = parent[v]
            out.append(v)
        return out

    ua, ub = up(a), up(b)
    common = next(v for v in ua if v in ub)
    return ua[:ua.index(common) + 1] + ub[:ub.index(common)][::-1]


def test_c6_mi_lemmas(report):
    rng = np.random.default_rng(6)
    c = 1 / 3
    gap_bad = floor_bad = miss = 0
    for _ in range(100):
        n = int(rng.integers(3, 9))
        parents = tuple(() if i == 0 else (int(rng.integers(0, i)),) for i in range(n))
        Q = BayesNet(DagStructure(n, parents), tuple(rng.uniform(c, 1 - c, 1 << len(p)) for p in parents))
        gamma = tree_nondegeneracy(Q)
        adj = {tuple(sorted(e)) for e in skeleton_edges(Q.structure)}
        mi = {(i, j): exact_mutual_information(Q, i, j) for i, j in combinations(range(n), 2)}
        floor_bad += sum(mi[e] < c * gamma ** 2 / (2 * log(2)) - 1e-12 for e in adj)
        for (i, j), v in mi.items():
            if (i, j) in adj:
                continue
            path = _tree_path(Q, i, j)
            low = min(mi[tuple(sorted(e))] for e in zip(path, path[1:]))
            gap_bad += v > (1 - 2 * c * c) * low + 1e-12
        miss += chow_liu(Q) != skeleton_edges(Q.structure)
    report("6 MI structure lemmas", gap_bad == floor_bad == miss == 0,
           f"100 trees: gap violations {gap_bad}, floor violations {floor_bad}, skeleton misses {miss}")


# --- 7 ------------------------------------------------------------------------------

def test_c7_learner(report):
    eps = 0.2
    P = random_tree(6, 0.2, 0.8, 3)
    good, light_bad = 0, 0
    for s in range(100):
        out = learn_known_structure(P.structure, NetSource(P, s), eps)
        good += l1_exact(P, out.net) <= eps
        light_bad += light_l1_contribution(P, out.net, eps, out.metadata["flipped_coords"]) > eps / 2
    report("7 learner n=6 d=1 eps=0.2", good >= 90 and light_bad == 0,
           f"{good}/100 runs within eps, {light_bad} light-contribution violations")


# --- 8 ------------------------------------------------------------------------------

def test_c8_fdelta(report):
    rng = np.random.default_rng(8)
    delta = 0.1
    ratios = []
    for _ in range(100):
        p, q = rng.dirichlet(np.ones(6)), rng.dirichlet(np.ones(6))
        tv = 0.5 * np.abs(p - q).sum()
        ratios.append(tv_exact(tolerant_map_fdelta(p, delta), tolerant_map_fdelta(q, delta)) / (delta * tv))
    lo, hi = min(ratios), max(ratios)
    report("8 F_delta map n=6 delta=0.1", lo >= 0.9 and hi <= 1.1 / delta,
           f"ratio range [{lo:.4f}, {hi:.4f}], allowed [0.9, {1.1 / delta:.1f}]")


# --- 9 ------------------------------------------------------------------------------

def test_c9_determinism(report, tmp_path):
    import json
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"tester": "product_identity", "family": "product_uniformity_no",
                               "eps": 0.3, "T": 30, "seed": 4, "family_params": {"n": 12}}))
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.csv"
        assert main(["trials", str(cfg), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    report("9 trials CSV determinism", outs[0] == outs[1], f"{len(outs[0])} bytes per run")
