"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or ``python3 tests/test_acceptance.py`` (lines printed directly).
"""

import sys
import time
from fractions import Fraction
from itertools import combinations
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import erase, square_sum_vectors, weight_two_vectors  # noqa: E402
from tables import (  # noqa: E402
    ANYNODE_PARITY, THREE_PARITY_EXP, TWO_PARITY_Z, exp_table, symbolic_parity,
)
from zigzag.anynode import build_anynode, rebuild_any, verify_mds_anynode  # noqa: E402
from zigzag.error_decoder import (  # noqa: E402
    correct_erasure_plus_element, correct_node_error,
)
from zigzag.exceptions import UncorrectableError  # noqa: E402
from zigzag.field import field_new  # noqa: E402
from zigzag.rebuild import (  # noqa: E402
    check_property_e, min_optimal_e, normalized_bandwidth_bound, plan_multi, ratio_sweep,
    ratio_upper_bound_partial, rebuild_multi, rebuild_single,
)
from zigzag.rowspace import cosets, hyperplane  # noqa: E402
from zigzag.zigzag import build_optimal, build_searched, optimal_vectors, verify_mds  # noqa: E402

RESULTS: list[tuple[int, str, bool, str]] = []


class Failed(Exception):
    pass


def check(cond, message):
    if not cond:
        raise Failed(message)


def _stripe(code, seed):
    return code.encode(code.random_info(np.random.default_rng(seed))).columns()


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------


def criterion_1():
    """Two-parity example code: symbolic and numeric parity formulas."""
    code = build_optimal(2, 2, field_new(3))
    check(symbolic_parity(code, 1) == TWO_PARITY_Z, "zigzag parity table differs")
    rowsum = symbolic_parity(code, 0)
    check(all(rowsum[t] == {(t, j): 1 for j in range(3)} for t in range(4)), "row sums differ")
    rng = np.random.default_rng(1)
    f = code.field
    for _ in range(100):
        info = code.random_info(rng)
        parity = code.encode(info).parity
        for t in range(4):
            check(parity[t, 0] == f.sum(info[t]), "row sum value")
            terms = TWO_PARITY_Z[t]
            check(parity[t, 1] == f.sum([f.mul(c, info[i, j]) for (i, j), c in terms.items()]),
                  "zigzag value")
    return "8 formulas, 100 random arrays"


def criterion_2():
    """Single systematic rebuild of the two-parity code reads 8 of 16."""
    code = build_optimal(2, 2)
    cols = _stripe(code, 2)
    for node in range(3):
        col, log = rebuild_single(code, erase(cols, {node}), node)
        check(np.array_equal(col, cols[node]), f"node {node} wrong")
        check((log.total, log.remaining) == (8, 16), f"node {node} read {log.total}/{log.remaining}")
    return "C_0, C_1, C_2 each read 8 of 16"


def criterion_3():
    """Three-parity code, two erasures: access sets and ratio 2/3."""
    code = build_optimal(3, 2)
    cols = _stripe(code, 3)
    rec, log = rebuild_multi(code, erase(cols, {0, 1}), (0, 1))
    check(log.rows(2) == log.rows(3) == [0, 1, 3, 4, 6, 7], "C_2/P_0 rows")
    check(log.rows(4) == [1, 2, 4, 5, 7, 8], "P_1 rows")
    check(log.rows(5) == [0, 2, 3, 5, 6, 8], "P_2 rows")
    for pair in combinations(range(3), 2):
        rec, log = rebuild_multi(code, erase(cols, set(pair)), pair)
        check(log.ratio == Fraction(2, 3), f"{pair} ratio {log.ratio}")
        check(all(np.array_equal(rec[j], cols[j]) for j in pair), f"{pair} wrong data")
    return "rows match; 3 pairs at 2/3"


def criterion_4():
    """r=3, m in {2,3}: every systematic erasure set of size e rebuilds at e/r."""
    count = 0
    for m in (2, 3):
        code = build_optimal(3, m)
        for e in (1, 2, 3):
            for entry in ratio_sweep(code, e, seed=10 * m + e):
                check(entry.correct, f"m={m} {entry.erased} wrong data")
                check(entry.ratio == Fraction(e, 3), f"m={m} {entry.erased} ratio {entry.ratio}")
                check(not entry.log.fallback, f"m={m} {entry.erased} fell back")
                count += 1
            if e == 1:
                cols = _stripe(code, m)
                for node in range(code.k):
                    col, log = rebuild_single(code, erase(cols, {node}), node)
                    check(np.array_equal(col, cols[node]) and log.ratio == Fraction(1, 3),
                          f"single rebuild m={m} node {node}")
    return f"{count} erasure sets"


def criterion_5():
    """Exhaustive MDS checks: 10, 20 and 6 patterns."""
    reports = [verify_mds(build_optimal(2, 2)), verify_mds(build_optimal(3, 2)),
               verify_mds_anynode(build_anynode(2, 3))]
    check(all(r.ok for r in reports), f"failing: {[r.failing for r in reports]}")
    check([r.checked for r in reports] == [10, 20, 6], f"checked {[r.checked for r in reports]}")
    return "10 + 20 + 6 patterns"


def criterion_6():
    """Square-sum vectors: threshold e* = 2."""
    T = square_sum_vectors()
    check(min_optimal_e(T, 3) == 2, f"e* = {min_optimal_e(T, 3)}")
    code = build_searched(3, 2, T, field_new(16), seed=0)
    single = ratio_sweep(code, 1)
    check(all(x.correct for x in single), "single rebuild wrong data")
    check(any(x.ratio > Fraction(1, 3) for x in single), "all single ratios at 1/3")
    pairs = ratio_sweep(code, 2)
    check(all(x.correct and x.ratio == Fraction(2, 3) for x in pairs),
          f"pair ratios {[str(x.ratio) for x in pairs]}")
    worst = max(x.ratio for x in single)
    return f"e*=2; worst single {worst}; {len(pairs)} pairs at 2/3"


def criterion_7():
    """Any-node codes rebuild every column at 1/r."""
    for r, m in [(2, 3), (3, 3)]:
        code = build_anynode(r, m)
        cols = _stripe(code, r)
        for node in range(code.n):
            col, log = rebuild_any(code, erase(cols, {node}), node)
            check(np.array_equal(col, cols[node]), f"({r},{m}) node {node} wrong")
            check(log.ratio == Fraction(1, r), f"({r},{m}) node {node} ratio {log.ratio}")
    code = build_anynode(2, 3)
    check(all(symbolic_parity(code, l) == ANYNODE_PARITY[l] for l in (0, 1)), "example table")
    cols = _stripe(code, 7)
    _, log = rebuild_any(code, erase(cols, {0}), 0)
    check(all(log.rows(j) == [0, 1, 4, 5] for j in (1, 2, 3)), "C_2 access set")
    _, log = rebuild_any(code, erase(cols, {2}), 2)
    check(all(log.rows(j) == [0, 1, 2, 3] for j in (0, 1, 3)), "P_0 access set")
    return "(2,3) and (3,3) all columns; access sets match"


def criterion_8():
    """Erasure plus one element error on the two-parity code: 48 cases."""
    code = build_optimal(2, 2)
    word = code.encode(code.random_info(np.random.default_rng(8)))
    cases = 0
    for t in range(3):
        for j in (x for x in range(3) if x != t):
            for row in range(4):
                for e in (1, 2):
                    bad = word.columns()
                    bad[j][row] = (bad[j][row] + e) % 3
                    diag = correct_erasure_plus_element(code, erase(bad, {t}), t)
                    check(diag.corrected == word, f"t={t} cell=({row},{j}) e={e}")
                    check((diag.column, diag.row) == (j, row), "location")
                    cases += 1
    check(cases == 48, f"{cases} cases")
    for e in (1, 2):
        bad = word.columns()
        bad[1][0] = (bad[1][0] + e) % 3
        diag = correct_erasure_plus_element(code, erase(bad, {0}), 0)
        check(diag.details["W"] == [e, 0, e, 0], f"W trace {diag.details['W']}")
    return "48 cases exact; W=(e,0,e,0)"


def criterion_9():
    """Node-error decoding: 1000 single-column errors per code; no silent mis-correction."""
    rng = np.random.default_rng(9)
    detected = consistent = 0
    for code in (build_optimal(2, 2), build_optimal(3, 2)):
        f = code.field
        for _ in range(1000):
            word = code.encode(code.random_info(rng))
            bad = word.columns()
            j = int(rng.integers(0, code.n))
            err = rng.integers(0, f.q, size=code.p)
            if not err.any():
                err[int(rng.integers(0, code.p))] = 1
            bad[j] = f.add(bad[j], err)
            diag = correct_node_error(code, bad)
            check(diag.column == j and diag.corrected == word, f"{code}: column {j}")
        for _ in range(300):
            word = code.encode(code.random_info(rng))
            bad = word.columns()
            for j in rng.choice(code.n, size=2, replace=False):
                bad[j] = f.add(bad[j], rng.integers(1, f.q, size=code.p))
            try:
                diag = correct_node_error(code, bad)
            except UncorrectableError:
                detected += 1
                continue
            out = diag.corrected
            check(np.array_equal(code.encode(out.info).parity, out.parity),
                  "returned array is not a codeword")
            consistent += 1
    return f"2000 single-column cases exact; two-column: {detected} reported, {consistent} consistent"


def criterion_10():
    """Bounds engine."""
    for r in range(1, 5):
        for e in range(1, r + 1):
            for k in range(e, 9):
                val = normalized_bandwidth_bound(k, e, k + r - e)
                check(val == Fraction(e, r), f"k={k} e={e} r={r}: {val}")
    bound = ratio_upper_bound_partial(1, 2, 4, 2)
    check(bound == Fraction(3, 5), f"partial bound {bound}")
    code = build_searched(2, 4, weight_two_vectors(), field_new(8), seed=0)
    cols = _stripe(code, 10)
    rec, log = rebuild_multi(code, erase(cols, {3}), (3,))
    check(np.array_equal(rec[3], cols[3]), "weight-two rebuild wrong data")
    check(log.ratio <= bound, f"measured {log.ratio} > {bound}")
    return f"e/r for e<=r<=4; bound 3/5; measured {log.ratio}"


def _regression_zigzag():
    return [build_optimal(2, 2), build_optimal(3, 2), build_optimal(2, 3), build_optimal(3, 3),
            build_searched(3, 2, square_sum_vectors(), field_new(16), seed=0),
            build_searched(2, 4, weight_two_vectors(), field_new(8), seed=0)]


def criterion_11():
    """Property suite: property-e monotonicity, coset covers, update counts."""
    codes = _regression_zigzag()
    plans = 0
    for code in codes:
        holds = [check_property_e(code.T, e) for e in range(1, code.r + 1)]
        check(all(b or not a for a, b in zip(holds, holds[1:])), f"{code}: property e not monotone")
        check(np.all(code.occurrences() == code.r), f"{code}: update count")
        for e in range(1, code.r):
            for erased in combinations(range(code.k), e):
                plan = plan_multi(code, erased)
                X = set(plan.X)
                chosen = [c for c in cosets(hyperplane(plan.u)) if set(c) <= X]
                check(len(chosen) == e and sorted(x for c in chosen for x in c) == sorted(X),
                      f"{code} {erased}: X is not a union of e cosets")
                for l, rows in plan.parity_rows.items():
                    check(rows == {int(t) for t in code.f(plan.anchor, l)[list(plan.X)]},
                          f"{code} {erased}: parity {l} rows")
                plans += 1
    for r, m in [(2, 3), (3, 3), (2, 4), (3, 2)]:
        code = build_anynode(r, m)
        check(np.all(code.occurrences() == 2 * r - 1), f"{code}: update count")
    return f"{len(codes)} zigzag codecs, {plans} plans, 4 any-node codecs"


CRITERIA = [
    (1, "two-parity example code formulas", criterion_1, 1),
    (2, "single rebuild reads 8 of 16", criterion_2, 1),
    (3, "two-erasure access sets and ratio 2/3", criterion_3, 1),
    (4, "e/r optimality for r=3", criterion_4, 30),
    (5, "exhaustive MDS checks", criterion_5, 5),
    (6, "threshold e* = 2", criterion_6, 10),
    (7, "any-node rebuild at 1/r", criterion_7, 30),
    (8, "erasure plus element error", criterion_8, 5),
    (9, "node-error decoding", criterion_9, 30),
    (10, "bounds engine", criterion_10, 10),
    (11, "property suite", criterion_11, 30),
]


def run_criterion(number, name, func, budget):
    t0 = time.perf_counter()
    try:
        detail = func()
        ok = True
    except Failed as exc:
        detail, ok = str(exc), False
    elapsed = time.perf_counter() - t0
    if ok and elapsed > budget:
        ok, detail = False, f"{detail}; took {elapsed:.2f}s > {budget}s"
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {name} ({detail}) [{elapsed:.2f}s]"
    RESULTS.append((number, name, ok, line))
    return ok, line


@pytest.mark.parametrize("number,name,func,budget", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, name, func, budget):
    ok, line = run_criterion(number, name, func, budget)
    print(line)
    assert ok, line


if __name__ == "__main__":
    results = [run_criterion(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
