"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python tests/test_acceptance.py``.
"""

import subprocess
import sys
import time

import numpy as np
import pytest

from wcsbench import graded, power, states, wcs
from wcsbench.cli import pairs_upto, triples_upto
from wcsbench.tensor_core import IndexPermutation

EXACT = 0.0
TOLERANCE = 1e-12
CRITERION_1_SECONDS = 10.0
CLI_SECONDS = 60.0
CLI_COMMANDS = ["verify-wcs", "verify-power", "verify-bialgebra", "certificate"]


def powered(limit, arity):
    """All (x_1..x_arity, n) with (x_1 * ... * x_arity)^n <= limit."""
    base = {1: lambda m: [(a,) for a in range(1, m + 1)], 2: pairs_upto, 3: triples_upto}[arity]
    out = []
    n = 1
    while 2**n <= limit:
        out += [t + (n,) for t in base(limit) if int(np.prod(t)) ** n <= limit]
        n += 1
    return out


def worst(reports):
    return max((r.max_deviation for r in reports), default=0.0)


def all_pass(reports, bound=EXACT):
    return all(r.passed for r in reports) and worst(reports) <= bound


def criterion_1():
    start = time.perf_counter()
    coassoc = [wcs.check_weak_coassociativity(*t) for t in triples_upto(24)]
    units = [wcs.check_unit_conditions(a) for a in range(1, 37)]
    elapsed = time.perf_counter() - start
    dense = [wcs.check_weak_coassociativity(*t, dense=True) for t in triples_upto(24)]
    dense += [wcs.check_unit_conditions(a, dense=True) for a in range(1, 37)]
    ok = all_pass(coassoc + units) and all_pass(dense) and elapsed < CRITERION_1_SECONDS
    detail = (
        f"{len(coassoc)} triples, {len(units)} units, max deviation {worst(coassoc + units)}, "
        f"dense cross-check {worst(dense)}, {elapsed:.2f}s"
    )
    return ok, detail


def criterion_2():
    reports = [wcs.check_r_relation(a, b) for a, b in pairs_upto(36)]
    dense = [wcs.check_r_relation(a, b, dense=True) for a, b in pairs_upto(36)]
    units = sum(r.instances for r in reports)
    ok = all_pass(reports) and all_pass(dense)
    return ok, f"{len(reports)} pairs, {units} matrix units, max deviation {worst(reports + dense)}"


def criterion_3():
    hexagons = [wcs.check_quasi_triangularity(*t) for t in triples_upto(24)]
    triangular = [wcs.check_triangularity(a, b) for a, b in pairs_upto(36)]
    ok = all_pass(hexagons + triangular)
    return ok, f"{len(hexagons)} hexagon triples, {len(triangular)} triangularity pairs, exact"


def criterion_4():
    op = [power.check_op_compatibility(a, b, n) for a, b, n in powered(64, 2)]
    rrel = [power.check_powered_r_relation(a, b, n) for a, b, n in powered(64, 2)]
    tri = [power.check_powered_triangularity(a, b, c, n) for a, b, c, n in powered(64, 3)]
    ok = all_pass(op + rrel + tri)
    detail = f"{len(op)} (a,b,n) pairs, {len(tri)} (a,b,c,n) triples, max deviation {worst(op + rrel + tri)}"
    return ok, detail


def criterion_5():
    cases = [(a, b, n) for a, b, n in powered(64, 2) if (a * b) ** (n + 1) <= 64]
    reports = [power.check_psi_compatibility(a, b, n) for a, b, n in cases]
    morphisms = [graded.check_bialgebra_morphism(graded.psi_star(c, i)) for c, i in [(8, 1), (4, 2), (2, 3)]]
    ok = all_pass(reports) and all_pass(morphisms, TOLERANCE)
    return ok, f"{len(cases)} (a,b,n) squares commute, psi_* morphism checks {[m.passed for m in morphisms]}"


def criterion_6():
    reports = [graded.check_quasi_cocommutativity(n, i) for n, i in [(8, 1), (4, 2), (3, 3)]]
    return all_pass(reports), f"stages (8,1),(4,2),(3,3) max deviation {worst(reports)}"


def criterion_7():
    w1, w2 = states.diagonal_pure_state(2, 1), states.diagonal_pure_state(2, 2)
    left, right = states.star(w1, w2), states.star(w2, w1)
    verdict = states.equivalent(left, right, TOLERANCE)
    deficits_ok = bool(verdict.period_deficits) and all(d == 1.0 for d in verdict.period_deficits)
    cert = states.build_obstruction_certificate()
    distances = [
        states.trace_distance(states.finite_level_state(left, k), states.finite_level_state(right, k))
        for k in range(1, 5)
    ]
    distances_ok = all(abs(d - 1) <= TOLERANCE for d in distances)
    oracle_gap = 0.0
    for s, t in [(w1, w2), (w2, w1)]:
        for k in range(1, 4):
            slot_rule = states.finite_level_state(states.star(s, t), k).T
            oracle_gap = max(oracle_gap, float(np.max(np.abs(states.star_state_oracle(s, t, k) - slot_rule))))
    ok = (
        deficits_ok
        and not verdict.equivalent
        and cert.conclusion is states.Conclusion.NOT_QUASI_COCOMMUTATIVE
        and distances_ok
        and oracle_gap <= TOLERANCE
    )
    detail = (
        f"period deficits {verdict.period_deficits}, equivalent={verdict.equivalent}, "
        f"conclusion {cert.conclusion.value}, trace distances {distances}, oracle gap {oracle_gap}"
    )
    return ok, detail


def _tampered(p, seed):
    rng = np.random.default_rng(seed)
    i, j = rng.choice(p.size, size=2, replace=False)
    return p.compose(IndexPermutation.transposition(p.size, int(i), int(j)))


def criterion_8():
    blocks = [(a, b) for a, b in pairs_upto(36) if a * b >= 2]
    caught = 0
    for seed, (a, b) in enumerate(blocks):
        rep = wcs.check_r_relation(a, b, r=_tampered(wcs.rmatrix(a, b), seed))
        caught += (not rep.passed) and bool(rep.failures)
    refused = []
    for i, key in [(1, (1, 2)), (1, (2, 2)), (2, (2, 1)), (2, (1, 4))]:
        fam = graded.BlockRMatrix.standard(4, i).tampered(key)
        try:
            states.build_obstruction_certificate(stage_powers=(1, 2), cutoff=4, r_blocks={i: fam})
            refused.append(False)
        except states.CertificateRefused as exc:
            refused.append(exc.report is not None and bool(exc.report.failures))
    codes = [
        subprocess.run([sys.executable, "-m", "wcsbench", cmd, "--selftest-tamper"], capture_output=True).returncode
        for cmd in ("verify-wcs", "certificate")
    ]
    ok = caught == len(blocks) and all(refused) and codes == [1, 1]
    return ok, f"{caught}/{len(blocks)} tampered blocks caught, certificate refused {refused}, exit codes {codes}"


def criterion_9():
    start = time.perf_counter()
    codes = [
        subprocess.run([sys.executable, "-m", "wcsbench", cmd], capture_output=True).returncode for cmd in CLI_COMMANDS
    ]
    elapsed = time.perf_counter() - start
    ok = codes == [0, 0, 0, 0] and elapsed < CLI_SECONDS
    return ok, f"exit codes {codes}, {elapsed:.1f}s total"


CRITERIA = [
    (1, "axiom suite: weak coassociativity and unit conditions", criterion_1),
    (2, "local quasi-cocommutativity (R-relation)", criterion_2),
    (3, "local quasi-triangularity and triangularity", criterion_3),
    (4, "powered suite", criterion_4),
    (5, "inductive-system compatibility of psi", criterion_5),
    (6, "stage quasi-cocommutativity", criterion_6),
    (7, "obstruction certificate", criterion_7),
    (8, "negative controls", criterion_8),
    (9, "full default CLI run", criterion_9),
]


def report_line(number, title, ok, detail):
    return f"[criterion {number}] {'PASS' if ok else 'FAIL'}  {title}: {detail}"


@pytest.mark.parametrize("number,title,check", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, check, capsys):
    ok, detail = check()
    with capsys.disabled():
        print("\n" + report_line(number, title, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for number, title, check in CRITERIA:
        ok, detail = check()
        results.append(ok)
        print(report_line(number, title, ok, detail))
    sys.exit(0 if all(results) else 1)
