from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, strategies as st

from iprlab.errors import AllZero, InvalidInput, MissingBreakpoints, SizeTooLarge, UnknownFamily
from iprlab.matrix import (
    CompressedTuple, SegmentedSpec, SparseMatrix, build_family, classify_matrix, compress,
    diagonal_sum, mt_row_count,
)
from iprlab.mtsets import mt_enumerate

F = Fraction


def test_fs_family_rows_are_nonzero_binary_vectors():
    m = build_family("fs", 3)
    assert m.shape == (7, 3)
    got = {tuple(r) for r in m.dense()}
    want = {v for v in product((0, 1), repeat=3) if any(v)}
    assert got == want


def test_ex16_family():
    m = build_family("ex16", 4)
    assert m.dense() == [[1, 0, 0, 0], [2, 1, 0, 0], [4, 0, 1, 0], [8, 0, 0, 1]]


def test_ex17_family():
    m = build_family("ex17", 3)
    d = m.dense()
    assert d == [[1, -1, 0, 0], [F(1, 3), 0, -1, 0], [F(1, 5), 0, 0, -1]]


def test_mt_family_row_count():
    m = build_family("mt", 3, params=[1, 2])
    assert m.nrows == 5
    assert classify_matrix(m)["first_entries"]


@pytest.mark.parametrize("n, m", [(n, m) for n in range(1, 8) for m in range(1, n + 1)])
def test_mt_row_count_matches_closed_form(n, m):
    # choose the union of the blocks (2^n - 1 masks by size) and m-1 cut points in it
    from math import comb
    want = sum(comb(n, s) * comb(s - 1, m - 1) for s in range(m, n + 1))
    assert mt_row_count(n, m) == want
    assert build_family("mt", n, params=list(range(1, m + 1)), row_cap=10**6).nrows == want


def test_mt_family_rows_generate_mt_set():
    x = [F(1), F(4), F(16)]
    m = build_family("mt", 3, params=[1, 2])
    assert sorted(set(m.apply(x))) == list(mt_enumerate([1, 2], x).values)


def test_family_errors():
    with pytest.raises(UnknownFamily):
        build_family("nope", 3)
    with pytest.raises(SizeTooLarge):
        build_family("fs", 30, row_cap=1000)
    with pytest.raises(InvalidInput):
        build_family("fs", 0)


@pytest.mark.parametrize("row, out", [([1, 1, 1], [1]), ([2, 2, 0, 1, 1, 3], [2, 1, 3]),
                                      ([1, 2], [1, 2]), ([0, 5, 0, 5], [5])])
def test_compress_examples(row, out):
    assert compress(row).entries == tuple(F(v) for v in out)


def test_compress_all_zero():
    with pytest.raises(AllZero):
        compress([0, 0])
    with pytest.raises(InvalidInput):
        CompressedTuple((1, 1))


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=12).filter(any))
def test_compress_idempotent(row):
    c = compress(row)
    assert compress(c.entries) == c
    assert all(a != b for a, b in zip(c.entries, c.entries[1:]))
    assert set(c.entries) == {F(v) for v in row if v}


def test_classify_examples():
    schur = classify_matrix(build_family("schur", 2))
    assert schur["first_entries"] and schur["monic"]
    ex16 = classify_matrix(build_family("ex16", 4))
    assert not ex16["first_entries"] and ex16["problems"]
    fs = classify_matrix(build_family("fs", 3))
    assert fs["first_entries"] and fs["monic"]


def test_classify_non_monic_and_negative_leading():
    m = SparseMatrix.from_dense([[2, 0], [2, 1]])
    r = classify_matrix(m)
    assert r["first_entries"] and not r["monic"]
    assert not classify_matrix(SparseMatrix.from_dense([[-1, 1]]))["first_entries"]
    assert not classify_matrix(SparseMatrix.from_dense([[0, 0], [1, 0]]))["first_entries"]


def test_classify_segmented():
    m = diagonal_sum(build_family("schur", 2), build_family("fs", 2))
    r = classify_matrix(m, breakpoints=[0, 2], segmented=True)
    seg = r["segmented"]
    assert seg["valid"] and seg["monic_segmented"]
    assert [b["rows"] for b in seg["blocks"]] == [3, 3]
    with pytest.raises(MissingBreakpoints):
        classify_matrix(build_family("fs", 3), segmented=True)


def test_segmented_spec_blocks_and_json():
    m = diagonal_sum(build_family("schur", 2), build_family("identity", 1))
    spec = SegmentedSpec(m, (0, 2))
    assert [b.ncols for b in spec.blocks] == [2, 1]
    assert SegmentedSpec.from_json(spec.to_json()) == spec
    with pytest.raises(InvalidInput):
        SegmentedSpec(m, (1, 2))
    with pytest.raises(InvalidInput):
        SegmentedSpec(m, (0, 2, 2))


def test_diagonal_sum_examples():
    one = SparseMatrix.from_dense([[1]])
    assert diagonal_sum(one, one).dense() == [[1, 0], [0, 1]]
    assert diagonal_sum(build_family("fs", 2), build_family("schur", 2)).shape == (6, 4)
    assert diagonal_sum(build_family("fs", 3), build_family("mt", 3, params=[1, 2])).shape == (12, 6)


small_mats = st.integers(1, 3).flatmap(lambda v: st.lists(
    st.lists(st.integers(-3, 3), min_size=v, max_size=v), min_size=1, max_size=4))
vectors = st.lists(st.fractions(min_value=F(1, 64), max_value=8), min_size=3, max_size=3)


@given(small_mats, small_mats, vectors, vectors)
def test_diagonal_sum_concatenates_images(a, b, x, y):
    m, n = SparseMatrix.from_dense(a), SparseMatrix.from_dense(b)
    x, y = x[: m.ncols], y[: n.ncols]
    assert diagonal_sum(m, n).apply(x + y) == m.apply(x) + n.apply(y)


def test_matrix_json_roundtrip():
    for m in (build_family("ex17", 4), build_family("mt", 3, params=[1, 2]), build_family("schur", 2)):
        assert SparseMatrix.from_json(m.to_json()) == m


def test_matrix_from_json_rejects_garbage():
    with pytest.raises(InvalidInput):
        SparseMatrix.from_json({"shape": [1, 1], "rows": [[[5, "1"]]]})
