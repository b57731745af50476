from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from iprlab.colorings import DyadicWindow, IntRange, TableColoring, random_coloring
from iprlab.errors import BudgetExhausted, ImageOutsideDomain, InvalidInput
from iprlab.matrix import SparseMatrix, build_family
from iprlab.search import (
    SearchBounds, compactness_bound, extend_with_row, find_avoiding_coloring, find_witness,
    run_branches, separation_depth_search,
)
from iprlab.verify import verify_certificate
from oracles import brute_avoiding_exists, brute_bound

F = Fraction
SCHUR = build_family("schur", 2)


def classes(*parts):
    return TableColoring.from_classes(parts)


def test_witness_schur_none():
    c = classes([1, 4], [2, 3])
    assert find_witness(SCHUR, c, SearchBounds(range(1, 5))) is None


def test_witness_schur_found():
    c = classes([1, 4, 5], [2, 3])
    cert = find_witness(SCHUR, c, SearchBounds(range(1, 6)))
    assert cert.payload["x"] == ["1", "4"]
    assert [e["value"] for e in cert.payload["image"]] == ["1", "4", "5"]
    assert cert.payload["color"] == 0
    assert verify_certificate(cert).ok


def test_witness_identity_is_least_point():
    c = random_coloring(IntRange(3, 9), 3, seed=5)
    cert = find_witness(build_family("identity", 1), c, SearchBounds(range(3, 10)))
    assert cert.payload["x"] == ["3"]


def test_witness_epsilon_and_strict():
    c = random_coloring(DyadicWindow(-6, 0), 2, seed=1)
    grid = [p for p in c.domain.points if p < F(1, 8)]
    cert = find_witness(SCHUR, c, SearchBounds(grid, epsilon=F(1, 8)))
    assert cert is not None
    assert all(F(e["value"]) < F(1, 8) for e in cert.payload["image"])
    assert verify_certificate(cert).ok
    with pytest.raises(ImageOutsideDomain):
        find_witness(SCHUR, classes([1], [2]), SearchBounds([1, 2]), strict=True)


def test_witness_budget_and_zero_row():
    c = classes([1, 4], [2, 3])
    with pytest.raises(BudgetExhausted):
        find_witness(SCHUR, c, SearchBounds(range(1, 5), node_budget=3))
    zero = SparseMatrix.from_dense([[1, 0], [0, 0]])
    assert find_witness(zero, c, SearchBounds(range(1, 5))) is None


def test_witness_is_lexicographically_least():
    c = random_coloring(IntRange(1, 30), 2, seed=11)
    cert = find_witness(SCHUR, c, SearchBounds(range(1, 31)))
    best = None
    for x in range(1, 31):
        for y in range(1, 31):
            if x + y <= 30 and c.color(x) == c.color(y) == c.color(x + y):
                best = best or (x, y)
    assert tuple(int(v) for v in cert.payload["x"]) == best


def test_avoid_examples():
    cert = find_avoiding_coloring(SCHUR, 2, 4)
    assert cert is not None and verify_certificate(cert).ok
    assert sorted(map(sorted, cert.coloring.classes().values())) == [[1, 4], [2, 3]]
    assert find_avoiding_coloring(SCHUR, 2, 5) is None
    assert find_avoiding_coloring(build_family("identity", 1), 1, IntRange(1, 3)) is None


def test_bound_examples():
    cert = compactness_bound(SCHUR, 2, 10)
    assert cert.payload["N"] == 5
    assert verify_certificate(cert).ok
    assert compactness_bound(build_family("identity", 1), 1, 3).payload["N"] == 1
    assert compactness_bound(build_family("fs", 2), 2, 10).payload["N"] == 5
    assert compactness_bound(SCHUR, 2, 4) is None


@pytest.mark.parametrize("rows, r, max_n", [
    ([[1, 0], [0, 1], [1, 1]], 2, 6),
    ([[1, 0], [0, 1], [1, 2]], 2, 12),
    ([[1, 0], [1, 1], [1, 2]], 2, 12),
])
def test_bound_matches_brute_force(rows, r, max_n):
    cert = compactness_bound(SparseMatrix.from_dense(rows), r, max_n)
    want = brute_bound(rows, r, max_n)
    assert (cert.payload["N"] if cert else None) == want


def test_schur_three_colors():
    # S(3) = 13 so [1..14] is the first unavoidable interval
    assert compactness_bound(SCHUR, 3, 15).payload["N"] == 14


def test_extend_with_row():
    assert extend_with_row(SCHUR, [1, 1], [1], 2, 5) == 1
    assert extend_with_row(SCHUR, [1, 0], [1], 2, 5) == 1
    # frozen from an independent brute force: schur plus x - y forces a
    # monochromatic image first at N = 17
    assert extend_with_row(SCHUR, [1, -1], [1, 2, "1/2"], 2, 17) == 1
    assert extend_with_row(SCHUR, [1, -1], [1, 2, "1/2"], 2, 16) is None
    with pytest.raises(InvalidInput):
        extend_with_row(SCHUR, [1, -1], [1], 2, 4)


def test_extend_with_row_oracle():
    rows = [[1, 0], [0, 1], [1, 1], [1, -1]]
    assert brute_avoiding_exists(rows, 2, 16)
    assert not brute_avoiding_exists(rows, 2, 17)


@given(st.integers(0, 10**6))
@settings(max_examples=15)
def test_avoid_is_monotone_in_domain(seed):
    rows = [[1, 0], [0, 1], [1, 2]]
    m = SparseMatrix.from_dense(rows)
    n = 3 + seed % 8
    small = find_avoiding_coloring(m, 2, n) is not None
    big = find_avoiding_coloring(m, 2, n + 1) is not None
    assert small or not big
    if big:
        cert = find_avoiding_coloring(m, 2, n + 1)
        restricted = {k: v for k, v in cert.coloring.table().items() if k <= n}
        assert len(restricted) == n


def _square(x, cap):
    return (x * x if x < 5 else None), 1


def test_run_branches_ordered_merge():
    assert run_branches(_square, [7, 3, 2], budget=100) == (9, 2)
    assert run_branches(_square, [7, 3, 2], budget=100, workers=3) == (9, 2)
    with pytest.raises(BudgetExhausted):
        run_branches(_square, [7, 8, 9], budget=2)


@pytest.mark.parametrize("workers", [1, 4])
def test_searches_identical_across_workers(workers):
    c = random_coloring(IntRange(1, 40), 2, seed=4)
    a = find_witness(SCHUR, c, SearchBounds(range(1, 41)), workers=workers)
    b = find_witness(SCHUR, c, SearchBounds(range(1, 41)), workers=1)
    assert a.dumps() == b.dumps()
    a = compactness_bound(SCHUR, 2, 10, workers=workers)
    b = compactness_bound(SCHUR, 2, 10, workers=1)
    assert a.dumps() == b.dumps()


def test_separation_examples():
    rep = separation_depth_search((-4, 0), 2, [1], [1, 2])
    assert [c["depth"] for c in rep["colors"]] == [2, 2, 0]
    assert all(c["status"] == "exact" for c in rep["colors"])
    one = separation_depth_search((0, 0), 2, [1], [1, 2])
    assert [c["depth"] for c in one["colors"]] == [0, 0, 0]
    short = separation_depth_search((-4, 0), 1, [1], [1, 2])
    assert [c["depth"] for c in short["colors"]] == [0, 0, 0]
    assert separation_depth_search((-4, 0), 2, [1], [1, 2], workers=3) == rep


def test_separation_witnesses_check_out():
    from iprlab.mtsets import mt_enumerate
    from iprlab.numeric import dyadic_three_color
    rep = separation_depth_search((-6, 0), 3, [1], [1, 2])
    for entry in rep["colors"]:
        w = entry["witness"]
        if not w:
            continue
        for key, a in (("x", [1]), ("y", [1, 2])):
            terms = [F(t) for t in w[key]]
            assert all(0 < t < 2 for t in terms)
            vals = mt_enumerate(a, terms).values
            assert all(0 < v < 2 and dyadic_three_color(v) == entry["color"] for v in vals)


def test_separation_budget():
    rep = separation_depth_search((-8, 0), 3, [1], [1, 2], budget=50)
    assert any(c["status"] == "budget-exhausted" for c in rep["colors"])


@given(st.integers(0, 10**6), st.integers(1, 3))
@settings(max_examples=40)
def test_fuzzed_certificates_verify(seed, r):
    import random
    from iprlab.certificates import Certificate
    rng = random.Random(seed)
    v = rng.randint(1, 2)
    rows = [[rng.randint(0, 2) for _ in range(v)] for _ in range(rng.randint(1, 3))]
    rows = [row if any(row) else [1] * v for row in rows]
    m = SparseMatrix.from_dense(rows)
    c = random_coloring(IntRange(1, 12), r, seed)
    w = find_witness(m, c, SearchBounds(range(1, 13)))
    if w is not None:
        assert verify_certificate(w).ok
        assert Certificate.from_json(w.to_json()).dumps() == w.dumps()
    a = find_avoiding_coloring(m, r, 7)
    if a is not None:
        assert verify_certificate(a).ok
        assert Certificate.from_json(a.to_json()).dumps() == a.dumps()
