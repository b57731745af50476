"""Finite-sums and Milliken-Taylor value sets of finite term sequences.

For a compressed tuple ``a = <a_1..a_m>`` and terms ``x_0..x_{n-1}`` the
Milliken-Taylor set collects ``sum_i a_i * sum_{t in F_i} x_t`` over block
sequences ``F_1 < F_2 < ... < F_m`` of nonempty index sets (every index of
``F_i`` below every index of ``F_{i+1}``). ``a = <1>`` gives FS(x).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import lcm
from typing import Sequence

from .errors import InvalidInput, TupleTooLong
from .matrix import CompressedTuple, as_tuple, mt_row_count
from .numeric import parse_rational

STRATEGIES = ("block-split", "subset-filter")


@dataclass(frozen=True)
class MTResult:
    values: tuple[Fraction, ...]
    multiplicity: dict

    @property
    def total(self) -> int:
        return sum(self.multiplicity.values())

    def __contains__(self, v):
        return v in self.multiplicity


def _terms(x: Sequence) -> list[Fraction]:
    terms = [parse_rational(t) if not hasattr(t, "value") else t.value for t in x]
    if not terms:
        raise InvalidInput("term sequence must be nonempty")
    if any(t <= 0 for t in terms):
        raise InvalidInput("terms must be positive")
    return terms


def _block_split(a: tuple, x: list) -> Counter:
    """Choose F_1 by its largest index j, then recurse on indices after j."""
    n, m = len(x), len(a)
    out: Counter = Counter()

    def subset_sums_ending_at(lo: int, j: int):
        # sums of subsets of x[lo..j] that contain j
        sums = [x[j]]
        for t in range(lo, j):
            sums += [s + x[t] for s in sums]
        return sums

    def rec(lo: int, k: int, acc: int):
        if k == m:
            out[acc] += 1
            return
        for j in range(lo, n - (m - k - 1)):
            for s in subset_sums_ending_at(lo, j):
                rec(j + 1, k + 1, acc + a[k] * s)

    rec(0, 0, 0)
    return out


def _subset_filter(a: tuple, x: list) -> Counter:
    """Pick the union of the blocks as a bitmask, then cut it into m runs."""
    n, m = len(x), len(a)
    out: Counter = Counter()
    for mask in range(1, 1 << n):
        idx = [t for t in range(n) if mask >> t & 1]
        if len(idx) < m:
            continue
        pre = [0]
        for t in idx:
            pre.append(pre[-1] + x[t])
        for cuts in combinations(range(1, len(idx)), m - 1):
            bounds = (0,) + cuts + (len(idx),)
            val = sum(coef * (pre[hi] - pre[lo]) for coef, lo, hi in zip(a, bounds, bounds[1:]))
            out[val] += 1
    return out


def mt_enumerate(a, x: Sequence, strategy: str = "block-split") -> MTResult:
    """All MT(a, x) values, sorted ascending, with per-value multiplicity."""
    a = as_tuple(a)
    terms = _terms(x)
    if len(a) > len(terms):
        raise TupleTooLong(f"tuple of length {len(a)} needs at least that many terms, got {len(terms)}")
    if strategy == "block-split":
        run = _block_split
    elif strategy == "subset-filter":
        run = _subset_filter
    else:
        raise InvalidInput(f"unknown strategy {strategy!r}")
    # both strategies run on integers scaled by one common denominator
    dx = lcm(*(t.denominator for t in terms))
    da = lcm(*(c.denominator for c in a.entries))
    raw = run(tuple(int(c * da) for c in a.entries), [int(t * dx) for t in terms])
    counts = {Fraction(v, da * dx): n for v, n in raw.items()}
    return MTResult(tuple(sorted(counts)), counts)


def fs_enumerate(x: Sequence) -> MTResult:
    return mt_enumerate(CompressedTuple((Fraction(1),)), x)


def mt_count(n: int, m: int) -> int:
    """Block-sequence count; equals the total multiplicity of MT over n terms."""
    return mt_row_count(n, m)
