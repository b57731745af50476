"""Finite colorings of explicit number grids.

Every coloring lives on a finite domain with a declared generation rule.
Kinds: ``table`` (explicit assignment), ``interval`` (cut points),
``dyadic-phi`` (even-zero-block count mod r, computed on demand) and
``product`` (signature coloring x -> (c(x), c(2x), ..., c(kx))).
"""

from __future__ import annotations

import random
from bisect import bisect_right
from collections import Counter
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

from .errors import DomainNotClosed, InvalidInput, OutOfDomain
from .numeric import (dyadic_from_rational, format_rational, is_power_of_two, parse_rational,
                      phi_even_zero_blocks)


# ---------------------------------------------------------------------------
# domains

class Domain:
    rule: dict

    @cached_property
    def points(self) -> tuple[Fraction, ...]:
        return tuple(sorted(self._generate()))

    @cached_property
    def _index(self) -> dict:
        return {p: i for i, p in enumerate(self.points)}

    def index(self, x) -> int:
        return self._index[x]

    def __contains__(self, x) -> bool:
        return x in self._index

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __eq__(self, other):
        return isinstance(other, Domain) and self.rule == other.rule

    def __hash__(self):
        return hash(repr(self.rule))

    def __repr__(self):
        return f"{type(self).__name__}({self.rule})"

    @staticmethod
    def from_rule(rule: Mapping) -> "Domain":
        kind = rule.get("type")
        try:
            if kind == "int":
                return IntRange(rule["low"], rule["high"])
            if kind == "dyadic":
                return DyadicWindow(rule["low"], rule["high"])
            if kind == "rational":
                return RationalGrid(rule["max_numerator"], rule["max_denominator"])
            if kind == "explicit":
                return ExplicitDomain(parse_rational(p) for p in rule["points"])
        except KeyError as exc:
            raise InvalidInput(f"domain rule {rule} lacks {exc}") from None
        raise InvalidInput(f"unknown domain rule {rule!r}")

    @staticmethod
    def parse(text: str) -> "Domain":
        """CLI syntax: ``1..20``, ``dyadic:-12..0``, ``rational:P,Q``, ``points:1,2,5/2``."""
        kind, sep, rest = text.partition(":")
        if not sep:
            kind, rest = "int", text
        try:
            if kind in ("int", "dyadic"):
                lo, hi = rest.split("..")
                cls = IntRange if kind == "int" else DyadicWindow
                return cls(int(lo), int(hi))
            if kind == "rational":
                p, q = rest.split(",")
                return RationalGrid(int(p), int(q))
            if kind == "points":
                return ExplicitDomain(parse_rational(p) for p in rest.split(","))
        except ValueError:
            pass
        raise InvalidInput(f"cannot parse domain {text!r}")


class IntRange(Domain):
    def __init__(self, low: int, high: int):
        self.low, self.high = int(low), int(high)
        if self.low < 1 or self.high < self.low:
            raise InvalidInput(f"integer range {low}..{high} must satisfy 1 <= low <= high")
        self.rule = {"type": "int", "low": self.low, "high": self.high}

    def _generate(self):
        return (Fraction(i) for i in range(self.low, self.high + 1))

    def __contains__(self, x) -> bool:
        return isinstance(x, (int, Fraction)) and Fraction(x).denominator == 1 \
            and self.low <= x <= self.high


class DyadicWindow(Domain):
    """Dyadics whose support is a nonempty subset of [low, high]."""

    def __init__(self, low: int, high: int):
        self.low, self.high = int(low), int(high)
        if self.high < self.low:
            raise InvalidInput(f"empty exponent window [{low}, {high}]")
        if self.high - self.low > 24:
            raise InvalidInput("dyadic window wider than 25 exponents is not supported")
        self.rule = {"type": "dyadic", "low": self.low, "high": self.high}

    @property
    def scale(self) -> int:
        """Points are m * 2**low for m in 1 .. 2**(high-low+1) - 1."""
        return self.high - self.low + 1

    def _generate(self):
        unit = Fraction(2) ** self.low
        return (m * unit for m in range(1, 1 << self.scale))

    def __contains__(self, x) -> bool:
        x = Fraction(x)
        if x <= 0 or not is_power_of_two(x.denominator):
            return False
        m = x / Fraction(2) ** self.low
        return m.denominator == 1 and m.numerator < (1 << self.scale)


class RationalGrid(Domain):
    """All p/q with 1 <= p <= P and 1 <= q <= Q."""

    def __init__(self, max_numerator: int, max_denominator: int):
        self.P, self.Q = int(max_numerator), int(max_denominator)
        if self.P < 1 or self.Q < 1:
            raise InvalidInput("rational grid bounds must be positive")
        self.rule = {"type": "rational", "max_numerator": self.P, "max_denominator": self.Q}

    def _generate(self):
        return {Fraction(p, q) for p in range(1, self.P + 1) for q in range(1, self.Q + 1)}

    def __contains__(self, x) -> bool:
        x = Fraction(x)
        return x > 0 and x.numerator <= self.P and x.denominator <= self.Q


class ExplicitDomain(Domain):
    def __init__(self, points: Iterable):
        pts = sorted({parse_rational(p) for p in points})
        if not pts:
            raise InvalidInput("explicit domain must be nonempty")
        if pts[0] <= 0:
            raise InvalidInput("domain points must be positive")
        self.__dict__["points"] = tuple(pts)
        self.rule = {"type": "explicit", "points": [format_rational(p) for p in pts]}

    def _generate(self):
        return self.points


# ---------------------------------------------------------------------------
# colorings

class Coloring:
    kind: str = "abstract"

    def __init__(self, domain: Domain, r: int):
        if int(r) < 1:
            raise InvalidInput("palette size must be positive")
        self.domain = domain
        self.r = int(r)

    def _raw(self, x: Fraction) -> int:
        raise NotImplementedError

    def color(self, x) -> int:
        x = parse_rational(x) if not isinstance(x, Fraction) else x
        if x not in self.domain:
            raise OutOfDomain(f"{format_rational(x)} is outside the coloring domain {self.domain.rule}")
        return self._raw(x)

    __call__ = color

    def get(self, x, default=None):
        """Color of x, or ``default`` when x is outside the domain."""
        try:
            return self.color(x)
        except OutOfDomain:
            return default

    def classes(self) -> dict[int, list[Fraction]]:
        out: dict[int, list[Fraction]] = {}
        for p in self.domain:
            out.setdefault(self.color(p), []).append(p)
        return dict(sorted(out.items()))

    def table(self) -> dict[Fraction, int]:
        return {p: self.color(p) for p in self.domain}

    def to_json(self) -> dict:
        return {"kind": self.kind, "domain_rule": self.domain.rule, "r": self.r}

    def materialize(self) -> "TableColoring":
        return TableColoring(self.domain, self.r, self.table())

    @staticmethod
    def from_json(data: Mapping) -> "Coloring":
        try:
            kind = data["kind"]
            domain = Domain.from_rule(data["domain_rule"])
            r = int(data["r"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed coloring JSON: {exc}") from None
        if kind == "table":
            table = {parse_rational(p): int(c) for p, c in data.get("assignment", [])}
            return TableColoring(domain, r, table)
        if kind == "interval":
            return IntervalColoring(domain, [parse_rational(c) for c in data["cuts"]])
        if kind == "dyadic-phi":
            return DyadicPhiColoring(domain, r)
        if kind == "product":
            base = Coloring.from_json(data["base"])
            closed = "closed_under" in data["domain_rule"]
            return product_coloring(base, int(data["k"]), domain=None if closed else domain)
        raise InvalidInput(f"unknown coloring kind {kind!r}")

    def __repr__(self):
        return f"{type(self).__name__}(r={self.r}, domain={self.domain.rule})"


class TableColoring(Coloring):
    kind = "table"

    def __init__(self, domain: Domain, r: int, table: Mapping):
        super().__init__(domain, r)
        self.assignment = {parse_rational(k): int(v) for k, v in table.items()}

    def _raw(self, x):
        try:
            return self.assignment[x]
        except KeyError:
            raise OutOfDomain(f"{format_rational(x)} has no assigned color") from None

    def to_json(self) -> dict:
        out = super().to_json()
        out["assignment"] = [[format_rational(p), c] for p, c in sorted(self.assignment.items())]
        return out

    @classmethod
    def from_classes(cls, classes: Iterable[Iterable], domain: Domain | None = None) -> "TableColoring":
        """``from_classes([[1, 4], [2, 3]])`` colors 1,4 with 0 and 2,3 with 1."""
        table = {}
        for c, members in enumerate(classes):
            for p in members:
                table[parse_rational(p)] = c
        if domain is None:
            domain = ExplicitDomain(table)
        return cls(domain, len(set(table.values())) or 1, table)


class IntervalColoring(Coloring):
    """Color = number of cut points <= x; ``cuts=[1]`` separates (0,1) from the rest."""

    kind = "interval"

    def __init__(self, domain: Domain, cuts: Iterable):
        self.cuts = tuple(sorted(parse_rational(c) for c in cuts))
        super().__init__(domain, len(self.cuts) + 1)

    def _raw(self, x):
        return bisect_right(self.cuts, x)

    def to_json(self) -> dict:
        out = super().to_json()
        out["cuts"] = [format_rational(c) for c in self.cuts]
        return out


class DyadicPhiColoring(Coloring):
    """x -> phi(x) mod r on a dyadic window inside (0, 2); r = 3 is the
    separating coloring, other moduli are allowed as auxiliary colorings."""

    kind = "dyadic-phi"

    def __init__(self, domain: Domain, r: int = 3):
        if not isinstance(domain, DyadicWindow) or domain.high > 0:
            raise InvalidInput("dyadic-phi colorings need a dyadic window with high <= 0")
        super().__init__(domain, r)

    def _raw(self, x):
        return phi_even_zero_blocks(dyadic_from_rational(x)) % self.r


class ProductColoring(TableColoring):
    """Classes of x -> (c(1x), ..., c(kx)); class indices follow sorted signatures."""

    kind = "product"

    def __init__(self, base: Coloring, k: int, domain: Domain, signatures: Mapping):
        ranks = {s: i for i, s in enumerate(sorted(set(signatures.values())))}
        table = {x: ranks[s] for x, s in signatures.items()}
        super().__init__(domain, max(len(ranks), 1), table)
        self.base = base
        self.k = k
        self.signatures = dict(signatures)

    def to_json(self) -> dict:
        out = super().to_json()
        out["base"] = self.base.to_json()
        out["k"] = self.k
        return out


def dyadic_three_coloring(low: int = -12, high: int = 0) -> DyadicPhiColoring:
    return DyadicPhiColoring(DyadicWindow(low, high), 3)


def random_coloring(domain: Domain, r: int, seed: int = 0) -> TableColoring:
    rng = random.Random(seed)
    return TableColoring(domain, r, {p: rng.randrange(r) for p in domain})


def product_coloring(base: Coloring, k: int, domain: Domain | None = None) -> ProductColoring:
    """Signature coloring psi with psi(x) = psi(y) iff base(t x) = base(t y) for t = 1..k.

    Without an explicit domain, psi lives on the points x of the base domain
    whose multiples 2x..kx stay inside it. An explicit domain that is not
    closed this way raises DomainNotClosed.
    """
    k = int(k)
    if k < 1:
        raise InvalidInput("k must be positive")
    signatures = {}
    if domain is None:
        for x in base.domain:
            sig = tuple(base.get(t * x) for t in range(1, k + 1))
            if None not in sig:
                signatures[x] = sig
        if not signatures:
            raise DomainNotClosed([(base.domain.points[0], k)])
        domain = ExplicitDomain(signatures)
        domain.rule = {"type": "explicit", "points": domain.rule["points"],
                       "closed_under": k, "of": base.domain.rule}
    else:
        bad = []
        for x in domain:
            sig = tuple(base.get(t * x) for t in range(1, k + 1))
            bad += [(x, t) for t, c in zip(range(1, k + 1), sig) if c is None]
            signatures[x] = sig
        if bad:
            raise DomainNotClosed(bad)
    return ProductColoring(base, k, domain, signatures)


def coloring_validate(c: Coloring) -> dict:
    """Check totality, palette bound and the partition property. Never raises."""
    violations = []
    sizes: Counter = Counter()
    try:
        points = c.domain.points
    except Exception as exc:  # noqa: BLE001 - report, never raise
        return {"valid": False, "kind": c.kind, "violations": [f"domain: {exc}"]}
    missing = 0
    for p in points:
        try:
            col = c.color(p)
        except Exception as exc:  # noqa: BLE001
            missing += 1
            if missing <= 5:
                violations.append(f"not total: {format_rational(p)} ({exc})")
            continue
        if not isinstance(col, int) or not 0 <= col < c.r:
            violations.append(f"color {col!r} of {format_rational(p)} outside palette 0..{c.r - 1}")
        sizes[col] += 1
    if missing > 5:
        violations.append(f"not total: {missing} points uncolored in all")
    if isinstance(c, TableColoring):
        stray = [p for p in c.assignment if p not in c.domain]
        if stray:
            violations.append(f"{len(stray)} assigned points outside the domain, e.g. "
                              f"{format_rational(stray[0])}")
    covered = sum(sizes.values())
    if covered + missing != len(points):
        violations.append("classes do not partition the domain")
    return {
        "valid": not violations,
        "kind": c.kind,
        "r": c.r,
        "domain_size": len(points),
        "classes_realized": len(sizes),
        "class_sizes": {str(k): v for k, v in sorted(sizes.items(), key=lambda kv: str(kv[0]))},
        "violations": violations,
    }
