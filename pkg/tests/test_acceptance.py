"""The eleven acceptance criteria, each checked at its stated tolerance.

One full ``run_all`` feeds every criterion; each test prints a single
PASS/FAIL line (also repeated in the terminal summary).
"""
import time

import numpy as np
import pytest

from anisocap import lab
from anisocap.geometry import PLANAR_STOCK, minkowski_gauge, polar_body, stock_body, support_function

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def full_run():
    t0 = time.perf_counter()
    agg = lab.run_all()
    return agg, time.perf_counter() - t0


def _cases(rep, prefix):
    return [i for i in rep.instances if i.case.startswith(prefix)]


def _report(log, k, ok, detail):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    log.append(line)
    assert ok, line


def test_criterion_01_gauge_polar_duality(acceptance_log):
    rng = np.random.default_rng(0)
    t0 = time.perf_counter()
    worst = 0.0
    for name in PLANAR_STOCK:
        K = stock_body(name)
        x = rng.normal(size=(200, 2)) * 3
        worst = max(worst, float(np.max(np.abs(minkowski_gauge(K, x) - support_function(polar_body(K), x)))))
    dt = time.perf_counter() - t0
    _report(acceptance_log, 1, worst <= 1e-10 and dt < 1.0, f"max |gauge - polar support| = {worst:.2e}, {dt:.2f} s")


def test_criterion_02_tail_integral(full_run, acceptance_log):
    rep = full_run[0].suites["kernel_tail"]
    tails = _cases(rep, "tail[")
    worst = max(-i.margin for i in tails)
    ok = len(tails) == 10 and worst <= 0.02 and rep.wall_time < 30
    _report(acceptance_log, 2, ok, f"{len(tails)} configs, max rel err {worst:.3%}, {rep.wall_time:.1f} s")


def test_criterion_03_isoperimetric_deficit(full_run, acceptance_log):
    rep = full_run[0].suites["thm3"]
    d = _cases(rep, "deficit[")
    pairs = {i.case.split(",a=")[0] for i in d}
    worst = min(i.margin for i in d)
    near = _cases(rep, "near_optimal")
    mono = _cases(rep, "deficit_monotone")
    ok = (len(pairs) == 20 and worst >= -1e-3 and all(abs(i.lhs) <= 0.2 for i in near)
          and all(i.margin >= 0 for i in mono) and rep.wall_time < 600)
    _report(acceptance_log, 3, ok, f"{len(pairs)} pairs x 9 alphas, min deficit {worst:.3e}, "
                                   f"max deficit at E=K, a=0.1: {max(i.lhs for i in near):.3f}, "
                                   f"{rep.wall_time:.0f} s")


def test_criterion_04_limit_alpha0(full_run, acceptance_log):
    rep = full_run[0].suites["limits"]
    c = _cases(rep, "alpha0[")
    worst = max(-i.margin for i in c)
    sq = next(i for i in c if i.case == "alpha0[square,square]")
    ok = worst <= 0.15 and sq.rhs == pytest.approx(32.0, rel=0.02)
    _report(acceptance_log, 4, ok, f"{len(c)} cases, max rel err {worst:.2%} (square/square target {sq.rhs:.3f})")


def test_criterion_05_limit_alpha1(full_run, acceptance_log):
    rep = full_run[0].suites["limits"]
    c = _cases(rep, "alpha1[")
    worst = max(-i.margin for i in c)
    sq = next(i for i in c if i.case == "alpha1[square,square]")
    disk = next(i for i in c if i.case == "alpha1[square,disk256]")
    tau = _cases(rep, "tau_form")[0]
    ok = (worst <= 0.10 and sq.rhs == pytest.approx(24.0, rel=1e-9) and disk.rhs == pytest.approx(16.0, rel=1e-3)
          and -tau.margin <= 1e-3)
    _report(acceptance_log, 5, ok, f"{len(c)} cases, max rel err {worst:.2%}, targets {sq.rhs:.4f} / {disk.rhs:.4f}")


def test_criterion_06_coarea(full_run, acceptance_log):
    rep = full_run[0].suites["coarea"]
    worst = max(-i.margin for i in rep.instances)
    _report(acceptance_log, 6, worst < 1e-8, f"{len(rep.instances)} functions, max rel err {worst:.2e}")


def test_criterion_07_solver_agreement(full_run, acceptance_log):
    rep = full_run[0].suites["thm4"]
    c = _cases(rep, "mincut_vs_lp")
    worst = max(-i.margin for i in c)
    ok = len(c) == 10 and worst <= 1e-6 and rep.wall_time < 120
    _report(acceptance_log, 7, ok, f"{len(c)} instances on 16x16, max rel diff {worst:.2e}, {rep.wall_time:.1f} s")


def test_criterion_08_capacity_properties(full_run, acceptance_log):
    rep = full_run[0].suites["theorem1"]
    body = max(-i.margin for i in _cases(rep, "homogeneity_body"))
    sets = max(-i.margin for i in _cases(rep, "homogeneity_set"))
    mono = min(i.margin for i in _cases(rep, "monotone["))
    sub = min(i.margin for i in _cases(rep, "subadditive["))
    usc_m = min(i.margin for i in _cases(rep, "usc_monotone"))
    gap = max(i.lhs for i in _cases(rep, "usc_gap"))
    ok = body < 1e-10 and sets < 5e-2 and mono >= 0 and sub >= 0 and usc_m >= 0 and gap < 0.02
    _report(acceptance_log, 8, ok, f"residual2 {body:.1e}, residual1 {sets:.2e}, min monotone {mono:.3g}, "
                                   f"min subadditive {sub:.3g}, usc gap {gap:.2%}")


def test_criterion_09_cyclic(full_run, acceptance_log):
    rep = full_run[0].suites["prop2"]
    c = _cases(rep, "cyclic")
    ok = len(c) >= 10 and all(i.margin >= -i.bound for i in c)
    worst = min(i.margin + i.bound for i in c)
    _report(acceptance_log, 9, ok, f"{len(c)} instances, min (margin + eps_trunc) {worst:.3e}")


def test_criterion_10_isocapacitary(full_run, acceptance_log):
    rep = full_run[0].suites["cor5"]
    iso = min(i.margin + i.bound for i in _cases(rep, "isocap["))
    a0 = max(-i.margin for i in _cases(rep, "cap_alpha0"))
    a1 = max(-i.margin for i in _cases(rep, "cap_alpha1"))
    ok = iso >= -1e-3 and a0 <= 0.15 and a1 <= 0.10
    _report(acceptance_log, 10, ok, f"min deficit {iso:.3e}, alpha->0 err {a0:.2%}, alpha->1 err {a1:.2%}")


def test_criterion_11_equivalence_suites(full_run, acceptance_log):
    agg, total = full_run
    reps = [agg.suites[k] for k in ("thm6", "thm7", "thm8")]
    ineq = [i for r in reps for i in r.instances
            if not i.case.startswith(("collapse", "halved_kappa", "no_counter"))]
    worst = min(i.margin + i.bound for i in ineq)
    collapse = max(-i.margin for r in reps for i in _cases(r, "collapse"))
    counter = _cases(agg.suites["thm8"], "no_counter_pattern")[0]
    halved = _cases(agg.suites["thm8"], "halved_kappa_fails")
    verify_time = sum(r.wall_time for r in agg.suites.values())
    ok = (worst >= -lab.ROUNDING and collapse <= 1e-10 and counter.lhs == 0 and all(i.passed for i in halved)
          and verify_time < 1800 and agg.passed)
    _report(acceptance_log, 11, ok, f"{len(ineq)} margins, min {worst:.3e}, collapse {collapse:.1e}, "
                                    f"counter-patterns {int(counter.lhs)}, full verify {verify_time / 60:.1f} min")
