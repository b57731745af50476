"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import random
from fractions import Fraction
from itertools import product
from math import ceil, log2
from pathlib import Path

import pytest

from iprlab.certificates import Certificate, dumps
from iprlab.colorings import DyadicWindow, IntRange, random_coloring
from iprlab.constructions import (
    IPTailOracle, ex16_obstruction, ex16_witness, ex17_witness, extension_pipeline,
    segmented_solve,
)
from iprlab.matrix import SegmentedSpec, SparseMatrix, build_family, classify_matrix, diagonal_sum
from iprlab.mtsets import mt_enumerate
from iprlab.numeric import Dyadic, dyadic_three_color, phi_even_zero_blocks
from iprlab.search import (
    SearchBounds, compactness_bound, find_avoiding_coloring, find_witness, image_entries,
    separation_depth_search,
)
from iprlab.verify import verify_certificate
from oracles import naive_phi

pytestmark = pytest.mark.acceptance

F = Fraction
SCHUR = build_family("schur", 2)
GOLDEN = Path(__file__).parent / "golden" / "separation_w10_l3.json"


# -- 1 -----------------------------------------------------------------------

def test_criterion_1_phi_and_three_coloring(criterion):
    with criterion(1, "phi vs naive bit scanner and 3-coloring partition on supports in [-12, 0]", 1.0):
        exps = range(-12, 1)
        classes = {0: set(), 1: set(), 2: set()}
        count = 0
        for mask in range(1, 1 << 13):
            d = Dyadic.from_support([e for i, e in enumerate(exps) if mask >> i & 1])
            assert phi_even_zero_blocks(d) == naive_phi(d.value), d
            classes[dyadic_three_color(d.value)].add(d.value)
            count += 1
        assert count == 8191
        assert sum(map(len, classes.values())) == 8191
        assert len(set().union(*classes.values())) == 8191
        assert all(classes.values())


# -- 2 -----------------------------------------------------------------------

def _compressed_tuples():
    for length in (1, 2, 3):
        for t in product((1, 2, 3), repeat=length):
            if all(a != b for a, b in zip(t, t[1:])):
                yield t


def _term_sequences():
    rng = random.Random(2)
    for n in range(1, 9):
        yield [F(1, 2 ** k) for k in range(n)]
        yield [F(1)] * n
        yield [F(rng.randint(1, 40), rng.randint(1, 12)) for _ in range(n)]


def test_criterion_2_mt_strategies_agree(criterion):
    with criterion(2, "block-split and subset-filter MT enumerations agree; <1> count is 2^n - 1", 10.0):
        tuples = list(_compressed_tuples())
        assert len(tuples) == 21
        checked = 0
        for x in _term_sequences():
            one = mt_enumerate([1], x)
            assert one.total == 2 ** len(x) - 1
            for a in tuples:
                if len(a) > len(x):
                    continue
                p = mt_enumerate(a, x, "block-split")
                q = mt_enumerate(a, x, "subset-filter")
                assert p.values == q.values and p.multiplicity == q.multiplicity, (a, x)
                checked += 1
        assert checked > 400


# -- 3 -----------------------------------------------------------------------

def _schur_certificates(workers):
    bound = compactness_bound(SCHUR, 2, 10, workers=workers)
    refutation = find_avoiding_coloring(SCHUR, 2, 4, workers=workers)
    return bound, refutation


def test_criterion_3_schur_compactness(criterion):
    with criterion(3, "compactness_bound(schur, 2, 10) = 5 with verified certificates", 5.0):
        bound, refutation = _schur_certificates(1)
        assert bound.payload["N"] == 5
        assert refutation is not None
        assert verify_certificate(refutation).ok
        assert verify_certificate(bound).ok
        assert find_avoiding_coloring(SCHUR, 2, 5) is None


# -- 4 -----------------------------------------------------------------------

def _rand_q(rng, lo, hi, den=97):
    return F(rng.randint(lo, hi), rng.randint(1, den))


def test_criterion_4_example_identities(criterion):
    with criterion(4, "ex16/ex17 witnesses satisfy M x = y on 1000 inputs; obstruction within bound", 5.0):
        rng = random.Random(4)
        for _ in range(1000):
            n = rng.randint(1, 10)
            y0 = F(rng.randint(1, 50), rng.randint(1, 50))
            y = [y0] + [2 ** k * y0 + F(rng.randint(1, 50), rng.randint(1, 50)) for k in range(1, n)]
            x = ex16_witness(y)
            assert build_family("ex16", n).apply(x) == y
        for _ in range(1000):
            n = rng.randint(1, 10)
            y = [F(1, 2 * k + 1) * F(rng.randint(1, 99), 100) for k in range(n)]
            x = ex17_witness(y)
            assert build_family("ex17", n).apply(x) == y
        for _ in range(1000):
            x0 = F(rng.randint(1, 999), rng.choice([1000, 1024, 4096, 10 ** 6]))
            limit = ceil(log2(1 / x0))
            assert F(2) ** limit >= 1 / x0 > F(2) ** (limit - 1)
            x = [x0] + [F(rng.randint(1, 10 ** 4), 10 ** 6) for _ in range(limit)]
            k = ex16_obstruction(x, 1)
            assert 0 <= k <= limit


# -- 5 -----------------------------------------------------------------------

def _pipeline(workers):
    phi = random_coloring(DyadicWindow(-12, 0), 2, seed=7)
    return phi, extension_pipeline(SCHUR, phi, F(1, 16), workers=workers)


def test_criterion_5_extension_pipeline(criterion):
    with criterion(5, "extension pipeline: schur x identity, dyadic 2-coloring, epsilon 1/16", 60.0):
        phi, cert = _pipeline(1)
        x = [F(v) for v in cert.payload["x"]]
        image = cert.matrix.apply(x)
        assert len({phi.color(v) for v in image}) == 1
        assert all(0 < v < F(1, 16) for v in image)
        assert cert.matrix.shape == (6, 5)
        assert verify_certificate(cert.to_json()).ok


# -- 6 -----------------------------------------------------------------------

def _greedy_digits(v, gens):
    """Greedy base-4 digit decomposition; the leftover must vanish."""
    used = []
    for i, g in enumerate(gens):
        if v >= g:
            v -= g
            used.append(i)
    return used if v == 0 else None


def _segmented_spec():
    blocks = [SCHUR, build_family("fs", 2), build_family("fs", 3)]
    m = blocks[0]
    for b in blocks[1:]:
        m = diagonal_sum(m, b)
    # rows crossing blocks: block n+1 adds increments to sums already in the set
    m = m.stack([[(0, 1), (2, 1)], [(1, 1), (3, 1), (6, 1)], [(0, 1), (4, 1), (5, 1)]])
    return SegmentedSpec(m, (0, 2, 4))


def _segmented():
    return segmented_solve(_segmented_spec(), IPTailOracle.base4(12), 2)


def test_criterion_6_segmented_solver(criterion):
    with criterion(6, "segmented solver on three monic blocks with a 12-generator base-4 oracle", 60.0):
        spec = _segmented_spec()
        report = classify_matrix(spec.matrix, spec.breakpoints, segmented=True)
        assert report["segmented"]["monic_segmented"]
        assert len(spec.blocks) == 3
        cert = _segmented()
        gens = [F(1, 4 ** e) for e in range(1, 13)]
        x = [F(v) for v in cert.payload["x"]]
        assert len(x) == spec.matrix.ncols
        image = spec.matrix.apply(x)
        nonzero = [i for i, r in enumerate(spec.matrix.rows) if r]
        assert nonzero
        for i in nonzero:
            assert _greedy_digits(image[i], gens) is not None, (i, image[i])
        assert verify_certificate(cert).ok


# -- 7 -----------------------------------------------------------------------

def _separation(workers):
    return dumps(separation_depth_search((-10, 0), 3, [1], [1, 2], workers=workers))


def test_criterion_7_separation_golden(criterion):
    with criterion(7, "separation depth report over [-10, 0], maxlen 3 matches golden file", None):
        first = _separation(1)
        report = __import__("json").loads(first)
        assert all(c["status"] == "exact" for c in report["colors"])
        assert first == GOLDEN.read_text()
        assert _separation(1) == first
        assert _separation(8) == first


# -- 8 -----------------------------------------------------------------------

def _random_matrix(rng):
    v = rng.randint(1, 3)
    rows = []
    for _ in range(rng.randint(1, 3)):
        row = [rng.randint(0, 2) for _ in range(v)]
        if not any(row):
            row[rng.randrange(v)] = 1
        rows.append(row)
    return SparseMatrix.from_dense(rows)


def test_criterion_8_witness_concatenation(criterion):
    with criterion(8, "diagonal_sum witness stitching on 200 random instances", None):
        rng = random.Random(8)
        stitched = 0
        for trial in range(200):
            m, n = _random_matrix(rng), _random_matrix(rng)
            c = random_coloring(IntRange(1, 14), rng.randint(1, 3), seed=trial)
            grid = SearchBounds(range(1, 8))
            wm, wn = find_witness(m, c, grid), find_witness(n, c, grid)
            xs = [F(rng.randint(1, 9)) for _ in range(m.ncols)]
            ys = [F(rng.randint(1, 9)) for _ in range(n.ncols)]
            d = diagonal_sum(m, n)
            assert d.shape == (m.nrows + n.nrows, m.ncols + n.ncols)
            assert d.apply(xs + ys) == m.apply(xs) + n.apply(ys)
            if wm is None or wn is None or wm.payload["color"] != wn.payload["color"]:
                continue
            x = [F(v) for v in wm.payload["x"]] + [F(v) for v in wn.payload["x"]]
            assert d.apply(x) == m.apply(x[: m.ncols]) + n.apply(x[m.ncols:])
            payload = {"x": wm.payload["x"] + wn.payload["x"], "image": image_entries(d, c, x),
                       "color": wm.payload["color"]}
            assert verify_certificate(Certificate("witness", d, c, payload)).ok
            stitched += 1
        assert stitched > 20


# -- 9 -----------------------------------------------------------------------

def test_criterion_9_determinism(criterion):
    with criterion(9, "search certificates identical with 1 and 8 workers", None):
        one = [c.dumps() for c in _schur_certificates(1)]
        eight = [c.dumps() for c in _schur_certificates(8)]
        assert one == eight
        assert _pipeline(1)[1].dumps() == _pipeline(8)[1].dumps()
        assert _segmented().dumps() == _segmented().dumps()
        assert _separation(1) == _separation(8)
        c = random_coloring(IntRange(1, 30), 2, seed=9)
        w1 = find_witness(SCHUR, c, SearchBounds(range(1, 31)), workers=1)
        w8 = find_witness(SCHUR, c, SearchBounds(range(1, 31)), workers=8)
        assert w1.dumps() == w8.dumps()
