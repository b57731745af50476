"""Executable versions of the constructive arguments.

* witnesses and the obstruction for the two infinite example matrices;
* the finite-by-infinite extension pipeline (compactness bound, small z,
  signature coloring, scaling a finite solution by an entry a);
* block-by-block solving of segmented matrices and of countable diagonal
  sums against finite-sums tail oracles.

Central sets (near zero) are not computable. Wherever an argument picks
members of such a set, an :class:`IPTailOracle` stands in: FS sets of a
sequence decreasing to 0 are members of idempotent ultrafilters near 0, and
moving to a tail past the generators already used gives the shift property
``-y + C* in p`` the argument relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterator, Sequence

from .certificates import Certificate
from .colorings import Coloring, IntRange, TableColoring, product_coloring
from .errors import (BlockFailure, BlockUnsolvable, BudgetExhausted, DisjointnessViolation,
                     DomainNotClosed, GrowthViolation, InvalidInput, NoZError, OracleExhausted,
                     PipelineError, PremiseViolation, PrefixTooShort)
from .matrix import SegmentedSpec, SparseMatrix, build_family, diagonal_sum
from .numeric import ceil_log2, format_rational, parse_rational
from .search import DEFAULT_BUDGET, SearchBounds, compactness_bound, find_witness, image_entries

SURROGATE_NOTE = "finite-sums tail oracle used in place of a central set near zero"


def _positive_vector(values, name) -> list[Fraction]:
    vec = [parse_rational(v) for v in values]
    if not vec:
        raise InvalidInput(f"{name} must be nonempty")
    bad = [i for i, v in enumerate(vec) if v <= 0]
    if bad:
        raise InvalidInput(f"{name}[{bad[0]}] is not positive")
    return vec


# ---------------------------------------------------------------------------
# the two example matrices

def ex16_witness(y: Sequence) -> list[Fraction]:
    """x with x_0 = y_0 and x_n = y_n - 2^n y_0, so that ex16 * x = y."""
    y = _positive_vector(y, "y")
    for n in range(1, len(y)):
        if not y[n] > 2 ** n * y[0]:
            raise GrowthViolation(n)
    return [y[0]] + [y[n] - 2 ** n * y[0] for n in range(1, len(y))]


def ex16_guaranteed_index(x0: Fraction, bound: Fraction) -> int:
    """Row index at which ex16 * x must exceed ``bound``.

    ceil(log2(bound/x0)) when that is at least 1 (then 2^k x0 >= bound and
    x_k > 0); row 0 when x0 > bound; row 1 when x0 == bound.
    """
    k = ceil_log2(Fraction(bound) / x0)
    if k >= 1:
        return k
    return 0 if x0 > bound else 1


def ex16_obstruction(x: Sequence, bound=1) -> int:
    """Least k with (ex16 * x)_k > bound; the image cannot stay in (0, bound)."""
    x = _positive_vector(x, "x")
    bound = parse_rational(bound)
    if bound <= 0:
        raise InvalidInput("bound must be positive")
    for k in range(len(x)):
        value = x[0] if k == 0 else 2 ** k * x[0] + x[k]
        if value > bound:
            return k
    raise PrefixTooShort(f"guaranteed index {ex16_guaranteed_index(x[0], bound)} "
                         f"is beyond the prefix of length {len(x)}")


def ex17_witness(y: Sequence) -> list[Fraction]:
    """x_0 = 1 and x_n = 1/(2n-1) - y_{n-1}; row n-1 of ex17 then gives y_{n-1}."""
    y = _positive_vector(y, "y")
    x = [Fraction(1)]
    for n in range(1, len(y) + 1):
        cap = Fraction(1, 2 * n - 1)
        if not y[n - 1] < cap:
            raise PremiseViolation(n)
        x.append(cap - y[n - 1])
    return x


# ---------------------------------------------------------------------------
# finite-sums tail oracle

@dataclass(frozen=True)
class IPTailOracle:
    """FS set of ``generators[tail:]``; generators strictly decrease to 0."""

    generators: tuple[Fraction, ...]
    tail: int = 0

    def __post_init__(self):
        gens = tuple(parse_rational(g) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        if not gens:
            raise InvalidInput("oracle needs at least one generator")
        if gens[-1] <= 0 or any(b >= a for a, b in zip(gens, gens[1:])):
            raise InvalidInput("generators must be positive and strictly decreasing")
        if not 0 <= self.tail <= len(gens):
            raise InvalidInput("tail index out of range")

    @classmethod
    def base4(cls, count: int, first: int = 1) -> "IPTailOracle":
        """Generators 4^-first, ..., 4^-(first+count-1)."""
        return cls(tuple(Fraction(1, 4 ** e) for e in range(first, first + count)))

    @classmethod
    def parse(cls, text: str) -> "IPTailOracle":
        """``base4:12``, ``base4:6@7`` (6 generators from 4^-7) or ``list:1/2,1/8,...``."""
        kind, _, rest = text.partition(":")
        try:
            if kind == "base4":
                count, _, first = rest.partition("@")
                return cls.base4(int(count), int(first) if first else 1)
            if kind == "list":
                return cls(tuple(parse_rational(p) for p in rest.split(",")))
        except ValueError:
            pass
        raise InvalidInput(f"cannot parse generators {text!r}")

    @property
    def remaining(self) -> int:
        return len(self.generators) - self.tail

    @property
    def superdecreasing(self) -> bool:
        g = self.generators
        return all(g[i] > sum(g[i + 1:]) for i in range(len(g)))

    def decompose(self, v) -> tuple[int, ...] | None:
        """Indices F (all >= tail) with v = sum of generators[F], or None."""
        v = Fraction(v)
        if v <= 0:
            return None
        g = self.generators
        if self.superdecreasing:
            rest, used = v, []
            for i in range(self.tail, len(g)):
                if g[i] <= rest:
                    rest -= g[i]
                    used.append(i)
            return tuple(used) if rest == 0 else None
        idx = range(self.tail, len(g))
        for size in range(1, len(idx) + 1):
            for combo in combinations(idx, size):
                if sum(g[i] for i in combo) == v:
                    return combo
        return None

    def contains(self, v) -> bool:
        return self.decompose(v) is not None

    __contains__ = contains

    def advance(self, index: int) -> "IPTailOracle":
        """Oracle restricted to generators with index >= ``index``."""
        return replace(self, tail=max(self.tail, min(index, len(self.generators))))

    def tail_after(self, y) -> "IPTailOracle":
        """Tail past the generators of y: every member b of the result has y + b
        in the current set."""
        used = self.decompose(y)
        if used is None:
            raise InvalidInput(f"{format_rational(Fraction(y))} is not a member")
        return self.advance(used[-1] + 1)

    def members(self, limit: int | None = None) -> Iterator[Fraction]:
        """Members ordered by their largest generator index, then by subset."""
        g = self.generators
        produced = 0
        for top in range(self.tail, len(g)):
            below = range(self.tail, top)
            for mask in range(1 << len(below)):
                if limit is not None and produced >= limit:
                    return
                yield g[top] + sum((g[below[b]] for b in range(len(below)) if mask >> b & 1),
                                   Fraction(0))
                produced += 1

    def to_json(self) -> dict:
        return {"generators": [format_rational(v) for v in self.generators[self.tail:]]}


# ---------------------------------------------------------------------------
# block solving against a tail oracle

def solve_block(block: SparseMatrix, oracle: IPTailOracle, *, budget: int = DEFAULT_BUDGET,
                block_index: int = 0) -> tuple[list[Fraction], dict[int, Fraction], IPTailOracle]:
    """Positive x with every nonzero row of ``block * x`` in the oracle's set.

    Variables are fixed from the last column back to the first, each taken
    from the oracle's members in their natural order (fewest generators used
    first), and a row is checked once its leading variable is fixed.
    Returns (x, row values, oracle advanced past every generator used).
    """
    rows = [(i, r) for i, r in enumerate(block.rows) if r]
    if not rows:
        return [oracle.generators[-1]] * block.ncols, {}, oracle
    if oracle.remaining == 0:
        raise OracleExhausted(block_index)
    ready: dict[int, list] = {}
    for i, r in rows:
        ready.setdefault(r[0][0], []).append((i, r))
    candidates = list(oracle.members())
    x: list = [None] * block.ncols
    nodes = 0

    def rec(col):
        nonlocal nodes
        if col < 0:
            return True
        for cand in candidates:
            nodes += 1
            if nodes > budget:
                raise BudgetExhausted(budget)
            x[col] = cand
            if all(oracle.contains(sum((v * x[c] for c, v in r), Fraction(0)))
                   for _, r in ready.get(col, ())):
                if rec(col - 1):
                    return True
        x[col] = None
        return False

    if not rec(block.ncols - 1):
        if oracle.remaining < block.ncols:
            raise OracleExhausted(block_index, f"{oracle.remaining} generators left for "
                                               f"{block.ncols} variables")
        raise BlockUnsolvable(block_index)
    values = {i: sum((v * x[c] for c, v in r), Fraction(0)) for i, r in rows}
    top = max(oracle.decompose(v)[-1] for v in values.values())
    return list(x), values, oracle.advance(top + 1)


def segmented_solve(spec: SegmentedSpec, oracle: IPTailOracle, depth: int, *,
                    budget: int = DEFAULT_BUDGET, seed: int = 0) -> Certificate:
    """Solve blocks 0..depth in turn so that every nonzero row of B_depth x lies
    in the oracle's original set.

    After block n the oracle moves past every generator used so far; rows
    already carrying a finite sum then receive increments built from later
    generators only, so the running sums stay finite sums of distinct
    generators.
    """
    depth = int(depth)
    if depth < 0 or depth >= len(spec.blocks):
        raise InvalidInput(f"depth {depth} outside 0..{len(spec.blocks) - 1}")
    original = oracle
    y = [Fraction(0)] * spec.matrix.nrows
    xs: list[Fraction] = []
    log = []
    for n in range(depth + 1):
        block = spec.blocks[n]
        before = oracle.tail
        x, values, oracle = solve_block(block, oracle, budget=budget, block_index=n)
        for i, v in values.items():
            y[i] += v
        xs += x
        log.append({"block": n, "columns": [spec.breakpoints[n], spec.breakpoints[n] + block.ncols],
                    "empty": not values, "tail_before": before, "tail_after": oracle.tail})
    width = spec.breakpoints[depth] + spec.blocks[depth].ncols
    prefix = spec.matrix.columns(0, width)
    prefix = SparseMatrix(prefix.rows, width, truncation=spec.matrix.truncation or depth + 1,
                          family=spec.matrix.family)
    image = prefix.apply(xs)
    assert image == y
    for i, r in enumerate(prefix.rows):
        if r and not original.contains(image[i]):
            raise BlockUnsolvable(depth, f"row {i} left the oracle set")
    payload = {
        "x": [format_rational(v) for v in xs],
        "image": image_entries(prefix, None, xs),
        "nonzero_rows_only": True,
        "target": {"type": "fs", **original.to_json()},
        "breakpoints": list(spec.breakpoints[: depth + 1]),
        "blocks": log,
        "surrogate": SURROGATE_NOTE,
    }
    return Certificate("witness", prefix, None, payload, seed=seed)


def countable_diagonal_solve(solvers: Sequence, targets: Sequence[IPTailOracle], prefix: int, *,
                             budget: int = DEFAULT_BUDGET, seed: int = 0) -> Certificate:
    """Stack per-block solutions of M_1, M_2, ... into one vector for their
    diagonal sum, block n landing in target n.

    A solver is a finite SparseMatrix (solved with :func:`solve_block`) or a
    callable ``oracle -> x``. Targets must be pairwise disjoint; this is
    checked on every produced member.
    """
    prefix = int(prefix)
    if prefix < 1 or prefix > len(solvers) or prefix > len(targets):
        raise InvalidInput(f"prefix {prefix} needs that many solvers and targets")
    mats, xs, produced = [], [], []
    for n in range(prefix):
        solver, target = solvers[n], targets[n]
        try:
            if isinstance(solver, SparseMatrix):
                mat = solver
                x, _, _ = solve_block(mat, target, budget=budget, block_index=n)
            else:
                mat, x = solver(target)
        except (BlockUnsolvable, OracleExhausted, BudgetExhausted) as exc:
            raise BlockFailure(n, str(exc)) from exc
        values = mat.apply(x)
        for i, v in enumerate(values):
            if mat.rows[i] and not target.contains(v):
                raise BlockFailure(n, f"row {i} value {format_rational(v)} misses its target")
        mats.append(mat)
        xs += x
        produced.append([v for i, v in enumerate(values) if mat.rows[i]])
    for n, members in enumerate(produced):
        for v in members:
            hits = [m for m in range(prefix) if targets[m].contains(v)]
            if len(hits) > 1:
                raise DisjointnessViolation(format_rational(v), hits)
    stacked = mats[0]
    for mat in mats[1:]:
        stacked = diagonal_sum(stacked, mat)
    parts, row = [], 0
    for mat, target in zip(mats, targets):
        parts.append({"rows": [row, row + mat.nrows], **target.to_json()})
        row += mat.nrows
    payload = {
        "x": [format_rational(v) for v in xs],
        "image": image_entries(stacked, None, xs),
        "nonzero_rows_only": True,
        "target": {"type": "fs", "parts": parts, "disjoint": True},
        "surrogate": SURROGATE_NOTE,
    }
    return Certificate("witness", stacked, None, payload, seed=seed)


# ---------------------------------------------------------------------------
# extension of an infinite near-zero matrix by a finite one

def default_n_solver(n_matrix: SparseMatrix, psi: Coloring, z: Fraction, budget: int):
    """Least y over psi's domain below z with N y one psi-color inside (0, z)."""
    grid = [p for p in psi.domain if p < z]
    if not grid:
        return None
    cert = find_witness(n_matrix, psi, SearchBounds(grid, epsilon=z, node_budget=budget))
    if cert is None:
        return None
    return [parse_rational(v) for v in cert.payload["x"]]


def extension_pipeline(m: SparseMatrix, phi: Coloring, epsilon, *, n_matrix: SparseMatrix | None = None,
                       n_solver: Callable | None = None, max_k: int = 12,
                       budget: int = DEFAULT_BUDGET, workers: int = 1, seed: int = 0) -> Certificate:
    """Witness for diag(M, N) that is phi-monochromatic inside (0, epsilon).

    Stages: compactness bound k for M with phi.r colors; z below epsilon/k;
    signature coloring psi of phi over multiples 1..k; an N-witness y for
    psi below z with entry a; the induced coloring t -> phi(t a) of [1..k];
    a solution u of M for it; the combined vector (a u, i y) for an entry i
    of M u.
    """
    epsilon = parse_rational(epsilon)
    if epsilon <= 0:
        raise InvalidInput("epsilon must be positive")
    n_matrix = n_matrix if n_matrix is not None else build_family("identity", 3)
    r = phi.r

    bound = compactness_bound(m, r, max_k, budget=budget, workers=workers)
    if bound is None:
        raise PipelineError("compactness", f"no bound found up to {max_k} for {r} colors")
    k = bound.payload["N"]

    below = [p for p in phi.domain if p < epsilon / k]
    if not below:
        raise NoZError("pick-z", f"no grid point below epsilon/k = {format_rational(epsilon / k)}")
    z = below[-1]

    try:
        psi = product_coloring(phi, k)
    except DomainNotClosed as exc:
        raise PipelineError("signature-coloring", str(exc)) from exc

    solver = n_solver or default_n_solver
    try:
        y = solver(n_matrix, psi, z, budget)
    except BudgetExhausted as exc:
        raise PipelineError("n-witness", str(exc)) from exc
    if y is None:
        raise PipelineError("n-witness", "no N-witness inside one signature class below z")
    ny = n_matrix.apply(y)
    if not all(0 < v < z for v in ny) or len({psi.get(v) for v in ny}) != 1 or psi.get(ny[0]) is None:
        raise PipelineError("n-witness", "solver output is not one signature class inside (0, z)")
    a = ny[0]
    gamma = TableColoring(IntRange(1, k), r, {t: phi.color(t * a) for t in range(1, k + 1)})

    cert_u = find_witness(m, gamma, SearchBounds(range(1, k + 1), node_budget=budget), workers=workers)
    if cert_u is None:
        raise PipelineError("finite-solve", f"no monochromatic image of M in [1..{k}]")
    u = [parse_rational(v) for v in cert_u.payload["x"]]
    mu = m.apply(u)
    i = mu[0]
    j = gamma.color(i)

    combined = diagonal_sum(m, n_matrix)
    zvec = [a * v for v in u] + [i * v for v in y]
    image = image_entries(combined, phi, zvec)
    bad = [e for e in image if e["color"] != j or not 0 < parse_rational(e["value"]) < epsilon]
    if bad:
        raise PipelineError("assemble", f"entry {bad[0]['row']} breaks the claimed color {j}")
    payload = {
        "x": [format_rational(v) for v in zvec],
        "image": image,
        "color": j,
        "stages": {
            "k": k,
            "z": format_rational(z),
            "psi_classes": psi.r,
            "a": format_rational(a),
            "y": [format_rational(v) for v in y],
            "gamma": [gamma.color(t) for t in range(1, k + 1)],
            "u": [format_rational(v) for v in u],
            "i": format_rational(i),
        },
    }
    return Certificate("witness", combined, phi, payload, epsilon=format_rational(epsilon), seed=seed)
