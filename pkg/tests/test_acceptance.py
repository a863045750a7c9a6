"""Acceptance suite: one test per criterion, each reporting a pass/fail line.

The lines are collected in ``conftest.ACCEPTANCE`` and printed in the
terminal summary, so they show up whether or not the checks pass.
"""
import itertools
import json
import math
import time

import numpy as np
import pytest
import scipy.linalg
import scipy.stats

from conftest import ACCEPTANCE, load_pmf
from pidmaxent import gate, pid, random_simplex
from pidmaxent.finer import consistency_report, fine_decompose
from pidmaxent.pipeline import KEYS, identity_matrix, qp_repair
from pidmaxent.solver import OPTIMAL, INACCURATE, Tolerances

SIZES_Z = range(2, 15)
SAMPLES = 50


def _verdict(n, title, failures, detail):
    line = f"criterion {n} ({title}): {'PASS' if not failures else 'FAIL'} - {detail}"
    ACCEPTANCE[n] = line
    print(line)
    assert not failures, failures[:5]


def _timed_pid(d):
    t = time.perf_counter()
    r = pid(d)
    return r, time.perf_counter() - t


@pytest.fixture(scope="module")
def gate_runs(reference):
    return [(entry, *_timed_pid(load_pmf(entry))) for entry in reference["gates"]]


@pytest.fixture(scope="module")
def copy_runs():
    t = time.perf_counter()
    runs = [(sizes, pid(gate("copy", sizes=sizes))) for sizes in itertools.product(range(2, 9), repeat=3)]
    return runs, time.perf_counter() - t


@pytest.fixture(scope="module")
def random_runs():
    return {nz: [_timed_pid(random_simplex((2, 2, 2, nz), seed=1000 * nz + s)) for s in range(SAMPLES)]
            for nz in SIZES_Z}


def test_criterion_1_gates(gate_runs):
    failures = []
    worst, slowest = 0.0, 0.0
    for entry, r, secs in gate_runs:
        for k in KEYS:
            err = abs(r[k] - entry["pid"][k])
            worst = max(worst, err)
            if err > 1e-6:
                failures.append((entry["name"], k, err))
        slowest = max(slowest, secs)
        if secs > 1.0:
            failures.append((entry["name"], "time", secs))
    _verdict(1, "gate corpus", failures, f"max error {worst:.2e} bits, slowest {slowest:.3f} s")


def test_criterion_2_copy(copy_runs):
    runs, secs = copy_runs
    failures = []
    worst_rel, worst_abs = 0.0, 0.0
    for sizes, r in runs:
        for key, size in zip(("UIX", "UIY", "UIZ"), sizes):
            rel = abs(r[key] - math.log2(size)) / math.log2(size)
            worst_rel = max(worst_rel, rel)
            if rel > 1e-4:
                failures.append((sizes, key, rel))
        for key in ("CI", "UIXY", "UIXZ", "UIYZ", "SI"):
            worst_abs = max(worst_abs, abs(r[key]))
            if abs(r[key]) > 1e-5:
                failures.append((sizes, key, r[key]))
    if secs > 30.0:
        failures.append(("total time", secs))
    _verdict(2, "copy gate", failures,
             f"{len(runs)} size triples, worst relative {worst_rel:.1e}, "
             f"worst absolute {worst_abs:.1e} bits, {secs:.1f} s")


def test_criterion_3_random(random_runs):
    failures = []
    worst_res, slowest = 0.0, 0.0
    means = []
    for nz, runs in random_runs.items():
        for i, (r, secs) in enumerate(runs):
            bad = {k: s for k, s in r.statuses.items() if s not in (OPTIMAL, INACCURATE)}
            if bad:
                failures.append((nz, i, bad))
            res = float(np.max(np.abs(r.residuals())))
            worst_res = max(worst_res, res)
            if r.repaired or res > 1e-6:
                failures.append((nz, i, "identities", res))
            slowest = max(slowest, secs)
            if secs > 5.0:
                failures.append((nz, i, "time", secs))
        means.append(float(np.mean([r["UIZ"] for r, _ in runs])))
    # directional trend: rank correlation of mean UIZ with |Z|
    rho, p = scipy.stats.spearmanr(list(SIZES_Z), means)
    if not (rho > 0 and p / 2 < 0.01):
        failures.append(("UIZ trend", rho, p))
    _verdict(3, "random distributions", failures,
             f"{SAMPLES * len(SIZES_Z)} instances, worst residual {worst_res:.1e}, "
             f"slowest {slowest:.3f} s, UIZ rank correlation {rho:.2f}")


def test_criterion_4_certificates(gate_runs, copy_runs, random_runs):
    tol = Tolerances()
    reports = [rep for _, r, _ in gate_runs for rep in r.reports.values()]
    reports += [rep for _, r in copy_runs[0] for rep in r.reports.values()]
    reports += [rep for runs in random_runs.values() for r, _ in runs for rep in r.reports.values()]
    failures = []
    for rep in reports:
        ok = (rep.pres <= tol.feastol and rep.dres <= tol.feastol
              and rep.gap <= max(tol.abstol, tol.reltol * abs(rep.pcost)))
        if rep.status == OPTIMAL and not ok:
            failures.append(rep.stats())
    optimal = sum(rep.status == OPTIMAL for rep in reports)
    _verdict(4, "solver certificates", failures, f"{len(reports)} solves, {optimal} Optimal")


def _null_space_projection(u0, d):
    # independent route: particular solution plus the closest point of the
    # affine set, parametrized through an orthonormal null-space basis
    C = identity_matrix()
    particular = scipy.linalg.lstsq(C, d)[0]
    N = scipy.linalg.null_space(C)
    return particular + N @ (N.T @ (u0 - particular))


def test_criterion_5_qp_repair():
    rng = np.random.default_rng(2024)
    C = identity_matrix()
    failures = []
    worst_id, worst_oracle = 0.0, 0.0
    for i in range(1000):
        u0 = rng.normal(scale=rng.choice([1e-3, 1.0, 10.0]), size=8)
        d = rng.normal(size=4)
        out = np.array([qp_repair(u0, d)[k] for k in KEYS])
        id_err = float(np.max(np.abs(C @ out - d)))
        or_err = float(np.max(np.abs(out - _null_space_projection(u0, d))))
        worst_id, worst_oracle = max(worst_id, id_err), max(worst_oracle, or_err)
        if id_err > 1e-10 or or_err > 1e-9:
            failures.append((i, id_err, or_err))
    _verdict(5, "qp repair", failures,
             f"1000 vectors, identity error {worst_id:.1e}, oracle distance {worst_oracle:.1e}")


def test_criterion_6_fine_parts(reference):
    failures = []
    worst_res, worst_syn = 0.0, 0.0
    for entry in reference["gates"] + reference["random"]:
        d = load_pmf(entry)
        atoms = fine_decompose(d)
        res = max(abs(v) for v in consistency_report(atoms, d).values())
        syn = abs(atoms.synergy() - pid(d)["CI"])
        worst_res, worst_syn = max(worst_res, res), max(worst_syn, syn)
        if res > 1e-4 or syn > 1e-5:
            failures.append((entry["name"], res, syn))
    _verdict(6, "fine-parts consistency", failures,
             f"{len(reference['gates']) + len(reference['random'])} distributions, "
             f"worst residual {worst_res:.1e}, synergy mismatch {worst_syn:.1e}")


def test_criterion_7_oracle_minima(reference):
    failures = []
    worst = 0.0
    for entry in reference["random"]:
        r = pid(load_pmf(entry))
        for k, want in entry["minima"].items():
            err = abs(r.optima[k] - want)
            worst = max(worst, err)
            if err > 1e-4:
                failures.append((entry["name"], k, err))
    _verdict(7, "oracle minima", failures, f"{len(reference['random'])} instances, max error {worst:.1e} bits")


def test_criterion_8_determinism(reference):
    corpus = [load_pmf(e) for e in reference["gates"] + reference["random"]]
    corpus += [gate("copy", sizes=s) for s in ((2, 2, 2), (3, 4, 5), (8, 8, 8))]
    corpus += [random_simplex((2, 2, 2, nz), seed=1000 * nz) for nz in SIZES_Z]
    failures = []
    for i, d in enumerate(corpus):
        off = json.dumps(pid(d, parallel="off").as_dict())
        on = json.dumps(pid(d, parallel="on").as_dict())
        if off != on:
            failures.append(i)
    _verdict(8, "parallel determinism", failures, f"{len(corpus)} distributions bitwise equal")
