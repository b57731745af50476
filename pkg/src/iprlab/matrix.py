"""Sparse exact matrices, the concrete matrix families and structural classifiers."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .errors import AllZero, InvalidInput, MissingBreakpoints, SizeTooLarge, UnknownFamily
from .numeric import format_rational, parse_rational

Row = tuple[tuple[int, Fraction], ...]

DEFAULT_ROW_CAP = 1 << 16
FAMILIES = ("fs", "mt", "ex16", "ex17", "schur", "identity")


def _canon_row(entries) -> Row:
    if isinstance(entries, Mapping):
        entries = entries.items()
    acc: dict[int, Fraction] = {}
    for col, val in entries:
        col = int(col)
        if col < 0:
            raise InvalidInput(f"negative column index {col}")
        acc[col] = acc.get(col, Fraction(0)) + parse_rational(val)
    return tuple(sorted((c, v) for c, v in acc.items() if v != 0))


@dataclass(frozen=True)
class SparseMatrix:
    """Row-sparse rational matrix.

    ``truncation`` is ``None`` for a genuinely finite matrix and otherwise the
    depth at which an omega x omega matrix was cut.
    """

    rows: tuple[Row, ...]
    ncols: int
    truncation: int | None = None
    family: str | None = None
    breakpoints: tuple[int, ...] | None = None

    def __post_init__(self):
        rows = tuple(_canon_row(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        for r in rows:
            if r and r[-1][0] >= self.ncols:
                raise InvalidInput(f"column {r[-1][0]} outside declared width {self.ncols}")
        if self.breakpoints is not None:
            object.__setattr__(self, "breakpoints", tuple(int(b) for b in self.breakpoints))

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence], **kw) -> "SparseMatrix":
        ncols = max((len(r) for r in dense), default=0)
        rows = [tuple((j, v) for j, v in enumerate(r)) for r in dense]
        return cls(tuple(rows), kw.pop("ncols", ncols), **kw)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), self.ncols)

    def dense(self) -> list[list[Fraction]]:
        out = []
        for r in self.rows:
            line = [Fraction(0)] * self.ncols
            for c, v in r:
                line[c] = v
            out.append(line)
        return out

    def apply(self, x: Sequence) -> list[Fraction]:
        if len(x) != self.ncols:
            raise InvalidInput(f"vector length {len(x)} != {self.ncols} columns")
        return [sum((v * x[c] for c, v in r), Fraction(0)) for r in self.rows]

    def columns(self, lo: int, hi: int) -> "SparseMatrix":
        """Sub-matrix of columns lo..hi-1 (all rows kept, reindexed from 0)."""
        rows = tuple(tuple((c - lo, v) for c, v in r if lo <= c < hi) for r in self.rows)
        return SparseMatrix(rows, hi - lo)

    def stack(self, extra_rows: Iterable) -> "SparseMatrix":
        return SparseMatrix(self.rows + tuple(_canon_row(r) for r in extra_rows), self.ncols,
                            self.truncation, self.family)

    def nonzero_rows(self) -> list[int]:
        return [i for i, r in enumerate(self.rows) if r]

    def to_json(self) -> dict:
        out = {
            "shape": [self.nrows, self.ncols],
            "rows": [[[c, format_rational(v)] for c, v in r] for r in self.rows],
            "family": self.family,
            "truncation": self.truncation,
        }
        if self.breakpoints is not None:
            out["breakpoints"] = list(self.breakpoints)
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "SparseMatrix":
        try:
            nrows, ncols = data["shape"]
            rows = tuple(tuple((int(c), parse_rational(v)) for c, v in r) for r in data["rows"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed matrix JSON: {exc}") from None
        if len(rows) != nrows:
            raise InvalidInput(f"shape declares {nrows} rows, found {len(rows)}")
        bps = data.get("breakpoints")
        return cls(rows, int(ncols), data.get("truncation"), data.get("family"),
                   tuple(bps) if bps is not None else None)


# ---------------------------------------------------------------------------
# compressed tuples

@dataclass(frozen=True)
class CompressedTuple:
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        ents = tuple(parse_rational(e) for e in self.entries)
        object.__setattr__(self, "entries", ents)
        if not ents:
            raise InvalidInput("compressed tuple must be nonempty")
        if any(e == 0 for e in ents):
            raise InvalidInput("compressed tuple has a zero entry")
        if any(a == b for a, b in zip(ents, ents[1:])):
            raise InvalidInput("compressed tuple has adjacent equal entries")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __str__(self):
        return "<" + ",".join(format_rational(e) for e in self.entries) + ">"


def compress(row: Iterable) -> CompressedTuple:
    """Delete zeros, then collapse runs of equal adjacent entries."""
    out: list[Fraction] = []
    for v in row:
        v = parse_rational(v)
        if v == 0:
            continue
        if not out or out[-1] != v:
            out.append(v)
    if not out:
        raise AllZero("row has no nonzero entry")
    return CompressedTuple(tuple(out))


def as_tuple(a) -> CompressedTuple:
    return a if isinstance(a, CompressedTuple) else CompressedTuple(tuple(a))


# ---------------------------------------------------------------------------
# families

def ordered_blocks(n: int, m: int) -> list[tuple[tuple[int, ...], ...]]:
    """All block sequences F_1 < ... < F_m of nonempty subsets of range(n),
    lexicographic in the tuple-of-sorted-tuples order."""
    out = []

    def rec(lo: int, k: int, acc: list):
        if k == 0:
            out.append(tuple(acc))
            return
        # F must start at >= lo and leave room for k-1 more blocks
        for size in range(1, n - lo + 1):
            for block in combinations(range(lo, n), size):
                if n - (block[-1] + 1) < k - 1:
                    continue
                acc.append(block)
                rec(block[-1] + 1, k - 1, acc)
                acc.pop()

    rec(0, m, [])
    out.sort()
    return out


def mt_row_count(n: int, m: int) -> int:
    """Number of ordered block sequences of length m in range(n)."""
    # ways[k]: labellings of a prefix using blocks 1..k, block k already nonempty
    ways = [1] + [0] * m
    for _ in range(n):
        nxt = ways[:]  # index left unused
        for k in range(1, m + 1):
            nxt[k] += ways[k] + ways[k - 1]  # join block k, or open it
        ways = nxt
    return ways[m]


def build_family(family: str, size: int, params=None, row_cap: int = DEFAULT_ROW_CAP) -> SparseMatrix:
    """Build the named matrix family truncated at ``size``.

    ``fs``: finite sums matrix on ``size`` columns, rows ordered by subset bitmask.
    ``mt``: Milliken-Taylor matrix of the tuple ``params`` (default <1,2>).
    ``ex16``: row k is 2^k in column 0 plus 1 in column k (row 0 is just 1).
    ``ex17``: row n is 1/(2n+1) in column 0 and -1 in column n+1.
    ``schur``: rows x, y, x+y (size is ignored).
    ``identity``: size x size identity.
    """
    if family not in FAMILIES:
        raise UnknownFamily(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    size = int(size)
    if size < 1:
        raise InvalidInput("size must be positive")

    if family == "fs":
        if (1 << size) - 1 > row_cap:
            raise SizeTooLarge(f"fs({size}) has {(1 << size) - 1} rows, cap is {row_cap}")
        rows = tuple(tuple((j, Fraction(1)) for j in range(size) if mask >> j & 1)
                     for mask in range(1, 1 << size))
        return SparseMatrix(rows, size, truncation=size, family="fs")

    if family == "mt":
        a = as_tuple(params if params else (1, 2))
        count = mt_row_count(size, len(a))
        if count > row_cap:
            raise SizeTooLarge(f"mt{a}({size}) has {count} rows, cap is {row_cap}")
        rows = []
        for blocks in ordered_blocks(size, len(a)):
            rows.append(tuple((t, coef) for coef, block in zip(a.entries, blocks) for t in block))
        return SparseMatrix(tuple(rows), size, truncation=size, family=f"mt{a}")

    if family == "ex16":
        rows = [((0, Fraction(1)),)]
        for k in range(1, size):
            rows.append(((0, Fraction(2) ** k), (k, Fraction(1))))
        return SparseMatrix(tuple(rows), size, truncation=size, family="ex16")

    if family == "ex17":
        rows = tuple(((0, Fraction(1, 2 * n + 1)), (n + 1, Fraction(-1))) for n in range(size))
        return SparseMatrix(rows, size + 1, truncation=size, family="ex17")

    if family == "schur":
        return SparseMatrix.from_dense([[1, 0], [0, 1], [1, 1]], family="schur")

    rows = tuple(((j, Fraction(1)),) for j in range(size))
    return SparseMatrix(rows, size, family="identity")


def diagonal_sum(m: SparseMatrix, n: SparseMatrix) -> SparseMatrix:
    """Block-diagonal matrix (M O; O N)."""
    shifted = tuple(tuple((c + m.ncols, v) for c, v in r) for r in n.rows)
    trunc = None
    if m.truncation is not None or n.truncation is not None:
        trunc = max(m.truncation or 0, n.truncation or 0)
    fam = None
    if m.family or n.family:
        fam = f"diag({m.family or '?'},{n.family or '?'})"
    return SparseMatrix(m.rows + shifted, m.ncols + n.ncols, trunc, fam)


# ---------------------------------------------------------------------------
# classification

def leading(row: Row):
    return row[0] if row else None


def first_entries_report(m: SparseMatrix) -> dict:
    """First-entries test: every row nonzero, and rows sharing a leading column
    share one positive leading coefficient."""
    lead: dict[int, Fraction] = {}
    problems = []
    for i, r in enumerate(m.rows):
        if not r:
            problems.append(f"row {i} is zero")
            continue
        c, v = r[0]
        if v <= 0:
            problems.append(f"row {i} leads with nonpositive {format_rational(v)}")
        if c in lead and lead[c] != v:
            problems.append(f"column {c}: leading entries {format_rational(lead[c])} and "
                            f"{format_rational(v)} differ (row {i})")
        lead.setdefault(c, v)
    first = not problems
    return {
        "first_entries": first,
        "monic": first and all(v == 1 for v in lead.values()),
        "leading": {str(c): format_rational(v) for c, v in sorted(lead.items())},
        "problems": problems,
    }


@dataclass(frozen=True)
class SegmentedSpec:
    """Column breakpoints 0 = a_0 < a_1 < ... cutting a matrix into blocks."""

    matrix: SparseMatrix
    breakpoints: tuple[int, ...]
    blocks: tuple[SparseMatrix, ...] = field(init=False)

    def __post_init__(self):
        bps = tuple(int(b) for b in self.breakpoints)
        object.__setattr__(self, "breakpoints", bps)
        if not bps or bps[0] != 0:
            raise InvalidInput("breakpoints must start at 0")
        if any(b <= a for a, b in zip(bps, bps[1:])):
            raise InvalidInput("breakpoints must be strictly increasing")
        ends = list(bps[1:])
        if bps[-1] < self.matrix.ncols:
            ends.append(self.matrix.ncols)
        elif bps[-1] > self.matrix.ncols:
            raise InvalidInput(f"breakpoint {bps[-1]} beyond {self.matrix.ncols} columns")
        blocks = tuple(self.matrix.columns(lo, hi) for lo, hi in zip(bps, ends))
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_matrix(cls, m: SparseMatrix, breakpoints=None) -> "SegmentedSpec":
        bps = breakpoints if breakpoints is not None else m.breakpoints
        if bps is None:
            raise MissingBreakpoints("segmented spec needs a breakpoint sequence")
        return cls(m, tuple(bps))

    def offsets(self) -> list[int]:
        return list(self.breakpoints[: len(self.blocks)])

    def block_rowset(self, n: int) -> SparseMatrix:
        """Distinct nonzero rows of block n as a finite matrix."""
        b = self.blocks[n]
        seen = []
        for r in b.rows:
            if r and r not in seen:
                seen.append(r)
        return SparseMatrix(tuple(seen), b.ncols)

    def to_json(self) -> dict:
        return {"matrix": self.matrix.to_json(), "breakpoints": list(self.breakpoints)}

    @classmethod
    def from_json(cls, data: Mapping) -> "SegmentedSpec":
        m = SparseMatrix.from_json(data["matrix"])
        return cls.from_matrix(m, data.get("breakpoints"))


def classify_matrix(m: SparseMatrix, breakpoints=None, segmented: bool = False) -> dict:
    """Structure report: first-entries, monic, and segmented validity.

    The segmented decomposition is checked whenever breakpoints are known;
    asking for it (``segmented=True``) on a truncated matrix without
    breakpoints raises MissingBreakpoints.
    """
    bps = breakpoints if breakpoints is not None else m.breakpoints
    if segmented and bps is None:
        raise MissingBreakpoints("segmented classification needs a breakpoint sequence")
    report = first_entries_report(m)
    report["shape"] = list(m.shape)
    report["truncation"] = m.truncation
    if bps is not None:
        spec = SegmentedSpec.from_matrix(m, bps)
        blocks = []
        ok = all(r for r in m.rows)
        for n in range(len(spec.blocks)):
            rowset = spec.block_rowset(n)
            if rowset.nrows == 0:
                blocks.append({"block": n, "empty": True})
                continue
            fe = first_entries_report(rowset)
            blocks.append({"block": n, "empty": False, "rows": rowset.nrows,
                           "first_entries": fe["first_entries"], "monic": fe["monic"]})
            ok = ok and fe["first_entries"]
        report["segmented"] = {
            "valid": ok,
            "no_zero_row": all(r for r in m.rows),
            "breakpoints": list(spec.breakpoints),
            "blocks": blocks,
            "segmented_first_entries": ok,
            "monic_segmented": ok and all(b.get("monic", True) for b in blocks),
        }
    return report
