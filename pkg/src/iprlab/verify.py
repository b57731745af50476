"""Independent certificate checker.

Works from the JSON form only and deliberately reimplements what it needs
(rational parsing, domain rules, colorings, image enumeration, finite-sum
membership) instead of importing the search or construction code.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .errors import MalformedCertificate

MAX_BRUTE_COLORINGS = 1 << 22
_EVEN_GAP = re.compile(r"1(0+)(?=1)")


@dataclass
class VerifyReport:
    ok: bool = True
    problems: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    def fail(self, msg):
        self.ok = False
        self.problems.append(msg)

    def note(self, msg):
        self.checks.append(msg)

    def to_json(self):
        return {"ok": self.ok, "problems": self.problems, "checks": self.checks}

    def __bool__(self):
        return self.ok


def _q(text) -> Fraction:
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise MalformedCertificate(f"expected a rational string, got {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise MalformedCertificate(f"bad rational {text!r}") from None


def _bit_scan_phi(v: Fraction) -> int:
    """Even zero runs strictly inside the binary expansion (naive string scan)."""
    bits = bin(v.numerator)[2:].strip("0")
    return sum(1 for run in _EVEN_GAP.findall(bits) if len(run) % 2 == 0)


def _dyadic_ok(v: Fraction) -> bool:
    d = v.denominator
    return v > 0 and d & (d - 1) == 0


class _Domain:
    def __init__(self, rule):
        if not isinstance(rule, dict):
            raise MalformedCertificate(f"domain rule must be an object, got {rule!r}")
        self.rule = rule
        kind = rule.get("type")
        try:
            if kind == "int":
                lo, hi = int(rule["low"]), int(rule["high"])
                self.member = lambda v: v.denominator == 1 and lo <= v <= hi
                self.points = lambda: [Fraction(i) for i in range(lo, hi + 1)]
            elif kind == "dyadic":
                lo, hi = int(rule["low"]), int(rule["high"])
                unit = Fraction(1, 2 ** -lo) if lo < 0 else Fraction(2 ** lo)

                def member(v, unit=unit, top=2 ** (hi - lo + 1)):
                    if not _dyadic_ok(v):
                        return False
                    m = v / unit
                    return m.denominator == 1 and 0 < m < top

                self.member = member
                self.points = lambda: [m * unit for m in range(1, 2 ** (hi - lo + 1))]
            elif kind == "rational":
                P, Q = int(rule["max_numerator"]), int(rule["max_denominator"])
                self.member = lambda v: v > 0 and v.numerator <= P and v.denominator <= Q
                self.points = lambda: sorted({Fraction(p, q) for p in range(1, P + 1)
                                              for q in range(1, Q + 1)})
            elif kind == "explicit":
                pts = sorted({_q(p) for p in rule["points"]})
                s = set(pts)
                self.member = lambda v: v in s
                self.points = lambda: pts
            else:
                raise MalformedCertificate(f"unknown domain rule {rule!r}")
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedCertificate(f"bad domain rule {rule!r}: {exc}") from None


def _coloring(data):
    """Return (color function or None-for-outside, r, domain) for a coloring JSON."""
    if not isinstance(data, dict):
        raise MalformedCertificate("coloring must be an object")
    try:
        kind = data["kind"]
        r = int(data["r"])
        dom = _Domain(data["domain_rule"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedCertificate(f"bad coloring: {exc}") from None
    if kind in ("table", "product"):
        table = {_q(p): int(c) for p, c in data.get("assignment", [])}

        def color(v):
            return table.get(v) if dom.member(v) else None
    elif kind == "interval":
        cuts = sorted(_q(c) for c in data["cuts"])

        def color(v):
            return sum(1 for c in cuts if c <= v) if dom.member(v) else None
    elif kind == "dyadic-phi":
        def color(v):
            if not dom.member(v) or v >= 2:
                return None
            return _bit_scan_phi(v) % r
    else:
        raise MalformedCertificate(f"unknown coloring kind {kind!r}")
    return color, r, dom


def _rows(matrix):
    try:
        nrows, ncols = matrix["shape"]
        rows = [[(int(c), _q(v)) for c, v in row] for row in matrix["rows"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedCertificate(f"bad matrix: {exc}") from None
    if len(rows) != nrows:
        raise MalformedCertificate("matrix shape does not match its rows")
    for row in rows:
        for c, _ in row:
            if not 0 <= c < ncols:
                raise MalformedCertificate(f"column {c} outside matrix width {ncols}")
    return rows, int(ncols)


def _evaluate(rows, x):
    return [sum((v * x[c] for c, v in row), Fraction(0)) for row in rows]


def _fs_member(v: Fraction, gens: list[Fraction]) -> bool:
    """v is a sum of distinct generators. Generators that are distinct powers
    of 1/4 are decided by base-4 digits; otherwise by subset-sum closure."""
    if v <= 0:
        return False
    quarter_powers = all(g.numerator == 1 and _is_power_of(g.denominator, 4) for g in gens)
    if quarter_powers and len(set(gens)) == len(gens):
        exps = {g.denominator.bit_length() // 2 for g in gens}
        top = max(exps)
        scaled = v * 4 ** top
        if scaled.denominator != 1:
            return False
        n = scaled.numerator
        pos = 0
        while n:
            digit = n % 4
            if digit > 1 or (digit == 1 and top - pos not in exps):
                return False
            n //= 4
            pos += 1
        return True
    sums = {Fraction(0)}
    for g in gens:
        sums |= {s + g for s in sums if s + g <= v}
    return v in sums


def _is_power_of(n: int, base: int) -> bool:
    while n > 1 and n % base == 0:
        n //= base
    return n == 1


def _check_witness(cert, rep: VerifyReport):
    rows, ncols = _rows(cert["matrix"])
    pay = cert["payload"]
    try:
        x = [_q(v) for v in pay["x"]]
    except (KeyError, TypeError):
        raise MalformedCertificate("witness payload needs x") from None
    if len(x) != ncols:
        rep.fail(f"x has {len(x)} entries, matrix has {ncols} columns")
        return
    if any(v <= 0 for v in x):
        rep.fail("x has a nonpositive entry")
    y = _evaluate(rows, x)
    stored = pay.get("image")
    if stored is not None:
        if len(stored) != len(y):
            rep.fail(f"stored image has {len(stored)} entries, recomputed {len(y)}")
            return
        for i, (entry, val) in enumerate(zip(stored, y)):
            if _q(entry["value"]) != val:
                rep.fail(f"image entry {i}: stored value {entry['value']}, recomputed {val}")
    eps = _q(cert["epsilon"]) if cert.get("epsilon") is not None else None
    rows_to_check = [i for i, row in enumerate(rows) if row] if pay.get("nonzero_rows_only") \
        else range(len(rows))
    for i in rows_to_check:
        if y[i] <= 0:
            rep.fail(f"image entry {i} = {y[i]} is not positive")
        if eps is not None and not y[i] < eps:
            rep.fail(f"image entry {i} = {y[i]} is not below epsilon {eps}")
    if cert.get("coloring"):
        color, _, _ = _coloring(cert["coloring"])
        target = pay.get("color")
        for i in rows_to_check:
            c = color(y[i])
            if c is None:
                rep.fail(f"image entry {i} = {y[i]} is outside the coloring domain")
                continue
            if stored is not None and stored[i].get("color") is not None and stored[i]["color"] != c:
                rep.fail(f"image entry {i}: stored color {stored[i]['color']}, actual color {c}")
            if c != target:
                rep.fail(f"image entry {i} has color {c}, certificate claims {target}")
        rep.note(f"{len(rows_to_check)} image entries recolored")
    target_set = pay.get("target")
    if target_set is not None:
        _check_targets(target_set, y, rows_to_check, rep)
    if not cert.get("coloring") and target_set is None:
        rep.fail("witness names neither a coloring nor a target set")


def _check_targets(spec, y, rows_to_check, rep):
    """Finite-sums targets (one generator list or per-row-range parts), or an
    explicit list of required image values."""
    if spec.get("type") == "values":
        want = [_q(v) for v in spec["values"]]
        if len(want) != len(y):
            rep.fail(f"target lists {len(want)} values for {len(y)} image entries")
            return
        for i in rows_to_check:
            if y[i] != want[i]:
                rep.fail(f"image entry {i} = {y[i]}, target value {want[i]}")
        rep.note(f"{len(want)} image entries matched exactly")
        return
    parts = spec.get("parts") or [{"rows": None, "generators": spec["generators"]}]
    allowed_union = spec.get("union", False)
    gens_all = [[_q(g) for g in part["generators"]] for part in parts]
    for i in rows_to_check:
        options = range(len(parts))
        if not allowed_union:
            options = [k for k, part in enumerate(parts)
                       if part["rows"] is None or part["rows"][0] <= i < part["rows"][1]]
        if not any(_fs_member(y[i], gens_all[k]) for k in options):
            rep.fail(f"image entry {i} = {y[i]} is not a finite sum of its target generators")
    if len(parts) > 1 and spec.get("disjoint"):
        for i in rows_to_check:
            hits = [k for k in range(len(parts)) if _fs_member(y[i], gens_all[k])]
            if len(hits) > 1:
                rep.fail(f"image entry {i} = {y[i]} lies in targets {hits}")
    rep.note(f"{len(rows_to_check)} image entries checked for finite-sum membership")


def _images_in(rows, ncols, points, member):
    out = []
    for x in product(points, repeat=ncols):
        y = _evaluate(rows, x)
        if all(member(v) for v in y):
            out.append((x, y))
    return out


def _check_refutation(cert, rep: VerifyReport):
    rows, ncols = _rows(cert["matrix"])
    if not cert.get("coloring"):
        raise MalformedCertificate("refutation needs the avoiding coloring")
    color, r, dom = _coloring(cert["coloring"])
    pts = dom.points()
    for p in pts:
        c = color(p)
        if c is None:
            rep.fail(f"avoiding coloring leaves {p} uncolored")
        elif not 0 <= c < r:
            rep.fail(f"point {p} has color {c} outside 0..{r - 1}")
    claimed_r = cert["payload"].get("r", r)
    if claimed_r != r:
        rep.fail(f"payload r={claimed_r} but coloring has r={r}")
    count = 0
    for x, y in _images_in(rows, ncols, pts, dom.member):
        count += 1
        cols = {color(v) for v in y}
        if len(cols) == 1:
            rep.fail(f"x={[str(v) for v in x]} has monochromatic image {[str(v) for v in y]}")
            break
    rep.note(f"rescanned {len(pts) ** ncols} vectors, {count} images inside the domain")


def _check_bound(cert, rep: VerifyReport):
    rows, ncols = _rows(cert["matrix"])
    pay = cert["payload"]
    n, r = int(pay["N"]), int(pay["r"])
    if n > 1:
        if not cert.get("coloring"):
            rep.fail(f"bound N={n} lacks an avoiding coloring of [1..{n - 1}]")
        else:
            color, cr, dom = _coloring(cert["coloring"])
            if [int(p) for p in dom.points()] != list(range(1, n)) or cr != r:
                rep.fail(f"avoiding coloring is not an {r}-coloring of [1..{n - 1}]")
            else:
                sub = VerifyReport()
                _check_refutation({**cert, "payload": {"r": r}}, sub)
                if not sub.ok:
                    rep.fail(f"coloring of [1..{n - 1}] is not avoiding: {sub.problems[0]}")
                else:
                    rep.note(f"[1..{n - 1}] avoiding coloring confirmed")
    pts = [Fraction(i) for i in range(1, n + 1)]
    images = {tuple(sorted({int(v) for v in y}))
              for _, y in _images_in(rows, ncols, pts, lambda v: v.denominator == 1 and 1 <= v <= n)}
    if r ** (n - 1) > MAX_BRUTE_COLORINGS:
        rep.fail(f"{r}^{n - 1} colorings of [1..{n}] exceed the brute-force limit")
        return
    for tail in product(range(r), repeat=n - 1):
        colors = (0,) + tail
        if not any(len({colors[v - 1] for v in img}) == 1 for img in images):
            rep.fail(f"coloring {list(colors)} of [1..{n}] avoids every image")
            return
    rep.note(f"all {r ** (n - 1)} normalized {r}-colorings of [1..{n}] have a monochromatic image")


def verify_certificate(cert) -> VerifyReport:
    """Re-check a certificate (dict or object with ``to_json``)."""
    if hasattr(cert, "to_json"):
        cert = cert.to_json()
    if not isinstance(cert, dict) or "kind" not in cert or "matrix" not in cert \
            or "payload" not in cert:
        raise MalformedCertificate("certificate needs kind, matrix and payload")
    rep = VerifyReport()
    kind = cert["kind"]
    try:
        if kind == "witness":
            _check_witness(cert, rep)
        elif kind == "refutation":
            _check_refutation(cert, rep)
        elif kind == "bound":
            _check_bound(cert, rep)
        else:
            raise MalformedCertificate(f"unknown certificate kind {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedCertificate(f"malformed {kind} certificate: {exc!r}") from None
    return rep
