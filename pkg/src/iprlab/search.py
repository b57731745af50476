"""Deterministic exhaustive search over vectors, colorings and term sequences.

Every search is a depth-first scan in a fixed value order, so the first hit
is the lexicographically least one. Work can be split into top-level
branches and run on a process pool; branch results are merged in branch
order with sequential node accounting, which makes the outcome (including
budget exhaustion) independent of the worker count.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from itertools import product, repeat
from typing import Callable, Iterable, Sequence

from .certificates import Certificate
from .colorings import Coloring, Domain, ExplicitDomain, IntRange, TableColoring
from .errors import BudgetExhausted, ImageOutsideDomain, InvalidInput
from .matrix import SparseMatrix, as_tuple
from .numeric import format_rational, is_power_of_two, parse_rational, phi_of_int

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 10_000_000


def default_budget() -> int:
    env = os.environ.get("IPR_BUDGET")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise InvalidInput(f"IPR_BUDGET must be an integer, got {env!r}") from None
        if value < 1:
            raise InvalidInput("IPR_BUDGET must be positive")
        return value
    return DEFAULT_BUDGET


@dataclass(frozen=True)
class SearchBounds:
    """Per-column candidate values, optional near-zero cap and node budget.

    ``grid`` is either one shared sequence of values or one sequence per
    column. With ``epsilon`` set every image entry must lie in (0, epsilon).
    """

    grid: tuple
    epsilon: Fraction | None = None
    node_budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        grid = tuple(self.grid)
        if grid and isinstance(grid[0], (list, tuple, Domain)):
            grid = tuple(tuple(sorted({parse_rational(v) for v in g})) for g in grid)
            if any(not g for g in grid):
                raise InvalidInput("every column grid must be nonempty")
        else:
            grid = tuple(sorted({parse_rational(v) for v in grid}))
            if not grid:
                raise InvalidInput("grid must be nonempty")
        object.__setattr__(self, "grid", grid)
        if self.epsilon is not None:
            eps = parse_rational(self.epsilon)
            if eps <= 0:
                raise InvalidInput("epsilon must be positive")
            object.__setattr__(self, "epsilon", eps)
        if self.node_budget < 1:
            raise InvalidInput("node budget must be positive")

    @property
    def shared(self) -> bool:
        return not self.grid or not isinstance(self.grid[0], tuple)

    def column_grids(self, ncols: int) -> list[tuple]:
        if self.shared:
            return [self.grid] * ncols
        if len(self.grid) != ncols:
            raise InvalidInput(f"{len(self.grid)} column grids for {ncols} columns")
        return list(self.grid)


# ---------------------------------------------------------------------------
# ordered merge of branch results

def run_branches(fn: Callable, tasks: Sequence, budget: int, workers: int = 1, spent: int = 0):
    """Run ``fn(task, cap) -> (result | None, nodes)`` over tasks in order.

    Returns ``(first non-None result, nodes spent)``; raises BudgetExhausted
    once the running node total exceeds ``budget``.
    """
    if workers <= 1 or len(tasks) <= 1:
        for task in tasks:
            res, nodes = fn(task, budget - spent)
            spent += nodes
            if spent > budget:
                raise BudgetExhausted(budget)
            if res is not None:
                return res, spent
        return None, spent
    cap = budget - spent
    with ProcessPoolExecutor(max_workers=workers) as pool:
        try:
            for res, nodes in pool.map(fn, tasks, repeat(cap)):
                spent += nodes
                if spent > budget:
                    raise BudgetExhausted(budget)
                if res is not None:
                    return res, spent
        finally:
            pool.shutdown(wait=True, cancel_futures=True)
    return None, spent


class _Stop(Exception):
    pass


# ---------------------------------------------------------------------------
# monochromatic images

def _witness_branch(problem, first, cap):
    nrows, contrib, ready, grids, coloring, eps, strict = problem
    sums = [Fraction(0)] * nrows
    x: list = []
    nodes = 0

    def ready_ok(j, color):
        for i in ready[j]:
            v = sums[i]
            if v <= 0 or (eps is not None and v >= eps):
                return False, color
            c = coloring.get(v)
            if c is None:
                if strict:
                    raise ImageOutsideDomain(
                        f"row {i} value {format_rational(v)} is outside the coloring domain")
                return False, color
            if color is None:
                color = c
            elif c != color:
                return False, color
        return True, color

    def visit(j, val, color):
        nonlocal nodes
        nodes += 1
        if nodes > cap:
            raise _Stop
        for i, coef in contrib[j]:
            sums[i] += coef * val
        x.append(val)
        ok, color = ready_ok(j, color)
        if ok:
            if j + 1 == len(grids):
                return True
            for nxt in grids[j + 1]:
                if visit(j + 1, nxt, color):
                    return True
        x.pop()
        for i, coef in contrib[j]:
            sums[i] -= coef * val
        return False

    try:
        found = visit(0, first, None)
    except _Stop:
        return None, cap + 1
    return (tuple(x) if found else None), nodes


def _witness_problem(m: SparseMatrix, coloring: Coloring, bounds: SearchBounds, strict: bool):
    grids = bounds.column_grids(m.ncols)
    contrib = [[] for _ in range(m.ncols)]
    ready = [[] for _ in range(m.ncols)]
    for i, row in enumerate(m.rows):
        for c, v in row:
            contrib[c].append((i, v))
        ready[row[-1][0]].append(i)
    return (m.nrows, contrib, ready, grids, coloring, bounds.epsilon, strict), grids


def image_entries(m: SparseMatrix, coloring: Coloring | None, x: Sequence) -> list[dict]:
    out = []
    for i, v in enumerate(m.apply(list(x))):
        entry = {"row": i, "value": format_rational(v)}
        if coloring is not None:
            entry["color"] = coloring.get(v)
        out.append(entry)
    return out


def find_witness(m: SparseMatrix, coloring: Coloring, bounds: SearchBounds, *,
                 workers: int = 1, strict: bool = False, seed: int = 0) -> Certificate | None:
    """Lexicographically least x over the grid with M x monochromatic.

    Image entries outside the coloring domain disqualify a vector (or raise
    ImageOutsideDomain when ``strict``). Returns None after a complete scan;
    raises BudgetExhausted if the scan could not complete.
    """
    if m.ncols == 0:
        raise InvalidInput("matrix has no columns")
    if any(not r for r in m.rows):
        # a zero row maps every x to 0, which is never a color class member
        return None
    problem, grids = _witness_problem(m, coloring, bounds, strict)
    fn = partial(_witness_branch, problem)
    x, nodes = run_branches(fn, list(grids[0]), bounds.node_budget, workers)
    if x is None:
        log.info("find_witness: exhausted after %d nodes", nodes)
        return None
    image = image_entries(m, coloring, x)
    payload = {
        "x": [format_rational(v) for v in x],
        "image": image,
        "color": image[0]["color"] if image else None,
        "grid_sizes": [len(g) for g in grids],
    }
    eps = format_rational(bounds.epsilon) if bounds.epsilon is not None else None
    return Certificate("witness", m, coloring, payload, epsilon=eps, seed=seed)


# ---------------------------------------------------------------------------
# avoiding colorings

def as_domain(domain) -> Domain:
    if isinstance(domain, Domain):
        return domain
    if isinstance(domain, int):
        return IntRange(1, domain)
    return ExplicitDomain(domain)


def image_sets(m: SparseMatrix, points: Sequence[Fraction]) -> list[tuple[int, ...]]:
    """Distinct index sets {y_1..y_u} of images M x, x in points^v, that land
    entirely inside ``points``. Sorted; each set as an ascending tuple."""
    index = {p: i for i, p in enumerate(points)}
    found = set()
    for x in product(points, repeat=m.ncols):
        ids = []
        for row in m.rows:
            v = sum((coef * x[c] for c, coef in row), Fraction(0))
            i = index.get(v)
            if i is None:
                break
            ids.append(i)
        else:
            found.add(tuple(sorted(set(ids))))
    return sorted(found)


def _canonical_prefixes(n, r, by_max, depth):
    """Consistent canonical colorings of the first ``depth`` points, in DFS order."""
    out = []
    colors: list[int] = []

    def rec(i, used):
        if i == depth:
            out.append(tuple(colors))
            return
        for c in range(min(r, used + 1)):
            if _conflict(i, c, colors, by_max):
                continue
            colors.append(c)
            rec(i + 1, max(used, c + 1))
            colors.pop()

    rec(0, 0)
    return out


def _conflict(i, c, colors, by_max):
    for others in by_max[i]:
        if all(colors[j] == c for j in others):
            return True
    return False


def _avoid_branch(problem, prefix, cap):
    n, r, by_max = problem
    colors = list(prefix)
    nodes = 0

    def rec(i, used):
        nonlocal nodes
        if i == n:
            return True
        for c in range(min(r, used + 1)):
            nodes += 1
            if nodes > cap:
                raise _Stop
            if _conflict(i, c, colors, by_max):
                continue
            colors.append(c)
            if rec(i + 1, max(used, c + 1)):
                return True
            colors.pop()
        return False

    try:
        found = rec(len(colors), max(colors, default=-1) + 1)
    except _Stop:
        return None, cap + 1
    return (tuple(colors) if found else None), nodes


def find_avoiding_coloring(m: SparseMatrix, r: int, domain, *, budget: int = DEFAULT_BUDGET,
                           workers: int = 1, split: int = 3, seed: int = 0) -> Certificate | None:
    """An r-coloring of ``domain`` admitting no monochromatic image of M.

    Only images landing inside the domain are constraints. The least domain
    point gets color 0 and each later point may open at most one new color,
    which loses nothing up to renaming the palette. Returns None when every
    r-coloring admits a monochromatic image.
    """
    r = int(r)
    if r < 1:
        raise InvalidInput("r must be positive")
    dom = as_domain(domain)
    points = dom.points
    n = len(points)
    sets = image_sets(m, points)
    if any(len(s) == 1 for s in sets):
        return None
    by_max: list[list[tuple[int, ...]]] = [[] for _ in range(n)]
    for s in sets:
        by_max[s[-1]].append(s[:-1])
    problem = (n, r, by_max)
    depth = min(split, n)
    prefixes = _canonical_prefixes(n, r, by_max, depth)
    spent = len(prefixes)
    colors, nodes = run_branches(partial(_avoid_branch, problem), prefixes, budget, workers, spent)
    if colors is None:
        log.info("find_avoiding_coloring: none for r=%d on %d points (%d nodes)", r, n, nodes)
        return None
    table = {p: c for p, c in zip(points, colors)}
    coloring = TableColoring(dom, r, table)
    payload = {"r": r, "domain_rule": dom.rule, "constraints": len(sets)}
    return Certificate("refutation", m, coloring, payload, seed=seed)


def compactness_bound(m: SparseMatrix, r: int, max_n: int, *, budget: int = DEFAULT_BUDGET,
                      workers: int = 1, seed: int = 0) -> Certificate | None:
    """Least N <= max_n such that every r-coloring of [1..N] has a
    monochromatic image of M; None when max_n is not enough."""
    previous: Certificate | None = None
    for n in range(1, int(max_n) + 1):
        cert = find_avoiding_coloring(m, r, IntRange(1, n), budget=budget, workers=workers)
        if cert is None:
            payload = {"N": n, "r": int(r), "max": int(max_n)}
            coloring = previous.coloring if previous is not None else None
            return Certificate("bound", m, coloring, payload, seed=seed)
        previous = cert
    return None


def extend_with_row(m: SparseMatrix, rvec: Sequence, candidates: Iterable, r: int, domain, *,
                    budget: int = DEFAULT_BUDGET, workers: int = 1) -> Fraction | None:
    """First candidate b such that M with the extra row b*rvec still has no
    avoiding r-coloring on ``domain``. None is not a proof that no b exists."""
    rvec = [parse_rational(v) for v in rvec]
    if len(rvec) != m.ncols:
        raise InvalidInput(f"row vector has {len(rvec)} entries, matrix has {m.ncols} columns")
    if all(v == 0 for v in rvec):
        raise InvalidInput("row vector must be nonzero")
    dom = as_domain(domain)
    if find_avoiding_coloring(m, r, dom, budget=budget, workers=workers) is not None:
        raise InvalidInput("the matrix itself has an avoiding coloring on this domain")
    for b in candidates:
        b = parse_rational(b)
        if b == 0:
            raise InvalidInput("candidate multipliers must be nonzero")
        extended = m.stack([[(j, b * v) for j, v in enumerate(rvec)]])
        if find_avoiding_coloring(extended, r, dom, budget=budget, workers=workers) is None:
            return b
    return None


# ---------------------------------------------------------------------------
# Milliken-Taylor separation depth

class _DyadicColors:
    """Even-zero-block 3-coloring of values given as multiples of 2**low."""

    def __init__(self, low: int, modulus: int = 3):
        self.low = low
        self.limit = 1 << (1 - low)  # scaled value must stay below 2
        self.modulus = modulus
        self.cache: dict = {}

    def __call__(self, v):
        c = self.cache.get(v)
        if c is None and v not in self.cache:
            c = self._compute(v)
            self.cache[v] = c
        return c

    def _compute(self, v):
        if v <= 0 or v >= self.limit:
            return None
        if isinstance(v, Fraction):
            if not is_power_of_two(v.denominator):
                return None
            v = v.numerator
        return phi_of_int(v) % self.modulus


def _new_mt_values(coefs, layers, term):
    """Extend the block-state layers by one term; return (layers, new MT values).

    layers[k] holds values of sequences of k blocks whose last block may
    still absorb later terms; layers[0] = {0}.
    """
    m = len(coefs)
    new = [set(layers[0])]
    for k in range(1, m + 1):
        add = coefs[k - 1] * term
        new.append(layers[k] | {v + add for v in layers[k]} | {v + add for v in layers[k - 1]})
    add = coefs[m - 1] * term
    fresh = {v + add for v in layers[m]} | {v + add for v in layers[m - 1]}
    return new, fresh


def _sequence_branch(problem, first, cap):
    coefs, length, color, terms, low = problem
    colors = _DyadicColors(low)
    m = len(coefs)
    nodes = 0
    seq: list = []

    def rec(layers):
        nonlocal nodes
        for t in (terms if seq else (first,)):
            nodes += 1
            if nodes > cap:
                raise _Stop
            new, fresh = _new_mt_values(coefs, layers, t)
            if all(colors(v) == color for v in fresh):
                seq.append(t)
                if len(seq) == length or rec(new):
                    return True
                seq.pop()
        return False

    start = [{0}] + [set() for _ in range(m)]
    try:
        found = rec(start)
    except _Stop:
        return None, cap + 1
    return (tuple(seq) if found else None), nodes


def _depth_for(task, cap):
    coefs, color, maxlen, low, high, budget = task
    terms = list(range(1, 1 << (high - low + 1)))
    arity = len(coefs)
    depth = min(arity - 1, maxlen)
    witnesses = {}
    status = "exact"
    spent = 0
    for length in range(arity, maxlen + 1):
        problem = (coefs, length, color, terms, low)
        fn = partial(_sequence_branch, problem)
        try:
            seq, spent = run_branches(fn, terms, budget, 1, spent)
        except BudgetExhausted:
            status = "budget-exhausted"
            break
        if seq is None:
            break
        depth = length
        witnesses[length] = seq
    return (depth, witnesses, status), 0


def _scaled_str(v, low):
    return format_rational(Fraction(v) * Fraction(2) ** low)


def separation_depth_search(window: tuple[int, int], maxlen: int, tuple_a, tuple_b, *,
                            budget: int = DEFAULT_BUDGET, workers: int = 1) -> dict:
    """For each class C_i of the even-zero-block 3-coloring, the largest L <= maxlen
    such that some length-L term sequences x, y with supports in ``window`` have
    MT(tuple_a, x) and MT(tuple_b, y) inside C_i.

    The two conditions are independent, so each tuple is searched on its own
    and the depth for a color is the smaller of the two (0 when that is below
    the longer tuple's length). ``status`` per color is ``exact`` when every
    search behind the depth ran to completion, ``budget-exhausted`` when the
    depth is only a lower bound.
    """
    low, high = int(window[0]), int(window[1])
    if high > 0 or low > high:
        raise InvalidInput("window must satisfy low <= high <= 0")
    if high - low > 20:
        raise InvalidInput("window wider than 21 exponents is not supported")
    maxlen = int(maxlen)
    if maxlen < 1:
        raise InvalidInput("maxlen must be at least 1")
    tuples = [as_tuple(tuple_a), as_tuple(tuple_b)]
    tasks = [(tuple(t.entries), color, maxlen, low, high, budget)
             for color in range(3) for t in tuples]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [res for res, _ in pool.map(_depth_for, tasks, repeat(0))]
    else:
        results = [_depth_for(t, 0)[0] for t in tasks]
    arity = max(len(t) for t in tuples)
    colors = []
    for color in range(3):
        (da, wa, sa), (db, wb, sb) = results[2 * color], results[2 * color + 1]
        depth = min(da, db)
        if depth < arity:
            depth = 0
        status = "budget-exhausted" if "budget-exhausted" in (sa, sb) else "exact"
        entry = {
            "color": color,
            "depth": depth,
            "depth_a": da,
            "depth_b": db,
            "status": status,
            "witness": None,
        }
        if depth:
            entry["witness"] = {
                "x": [_scaled_str(v, low) for v in wa[depth]],
                "y": [_scaled_str(v, low) for v in wb[depth]],
            }
        colors.append(entry)
    return {
        "window": [low, high],
        "maxlen": maxlen,
        "tuples": [[format_rational(e) for e in t.entries] for t in tuples],
        "colors": colors,
    }
