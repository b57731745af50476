"""Command-line front end.

Results go to stdout (or ``-o FILE``, written atomically); progress goes to
stderr. Exit codes: 0 found/verified, 1 none (search exhausted), 2 node
budget exhausted, 3 invalid input or failed verification.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .certificates import Certificate, dumps, write_atomic
from .colorings import (Coloring, DyadicPhiColoring, Domain, IntervalColoring,
                        coloring_validate, product_coloring, random_coloring)
from .constructions import (IPTailOracle, countable_diagonal_solve, ex16_obstruction, ex16_witness,
                            ex17_witness, extension_pipeline, segmented_solve)
from .errors import BudgetExhausted, InvalidInput, IPRError
from .matrix import SegmentedSpec, SparseMatrix, build_family, classify_matrix, diagonal_sum
from .mtsets import mt_enumerate
from .numeric import (dyadic_from_rational, dyadic_three_color, format_rational,
                      parse_rational_list, phi_even_zero_blocks)
from .search import (SearchBounds, compactness_bound, default_budget, extend_with_row,
                     find_avoiding_coloring, find_witness, image_entries,
                     separation_depth_search)
from .verify import verify_certificate

log = logging.getLogger("iprlab")

EXIT_FOUND, EXIT_NONE, EXIT_BUDGET, EXIT_INVALID = 0, 1, 2, 3


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path} is not valid JSON: {exc}") from None


def _emit(args, obj) -> None:
    text = obj if isinstance(obj, str) else dumps(obj)
    if not text.endswith("\n"):
        text += "\n"
    if getattr(args, "output", None):
        write_atomic(args.output, text)
    else:
        sys.stdout.write(text)


def _matrix(args) -> SparseMatrix:
    if getattr(args, "matrix", None):
        return SparseMatrix.from_json(_load_json(args.matrix))
    if getattr(args, "family", None):
        params = parse_rational_list(args.params) if args.params else None
        return build_family(args.family, args.size, params)
    raise InvalidInput("give --matrix FILE or --family NAME")


def _window(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split("..")
        return int(lo), int(hi)
    except ValueError:
        raise InvalidInput(f"window must look like -10..0, got {text!r}") from None


def _none(args, what: str) -> int:
    _emit(args, {"result": "none", "exhausted": True, "what": what})
    return EXIT_NONE


# ---------------------------------------------------------------------------
# handlers

def cmd_families_build(args):
    _emit(args, _matrix(args).to_json())
    return EXIT_FOUND


def cmd_classify(args):
    m = _matrix(args)
    bps = [int(b) for b in args.breakpoints.split(",")] if args.breakpoints else None
    _emit(args, classify_matrix(m, bps, segmented=args.segmented))
    return EXIT_FOUND


def cmd_diag(args):
    left = SparseMatrix.from_json(_load_json(args.left))
    right = SparseMatrix.from_json(_load_json(args.right))
    _emit(args, diagonal_sum(left, right).to_json())
    return EXIT_FOUND


def cmd_mt_enum(args):
    res = mt_enumerate(parse_rational_list(args.coeffs), parse_rational_list(args.terms),
                       strategy=args.strategy)
    if args.multiplicity:
        _emit(args, {"values": [format_rational(v) for v in res.values],
                     "multiplicity": {format_rational(v): res.multiplicity[v] for v in res.values},
                     "total": res.total})
    else:
        _emit(args, [format_rational(v) for v in res.values])
    return EXIT_FOUND


def cmd_dyadic(args):
    x = dyadic_from_rational(args.value)
    out = phi_even_zero_blocks(x) if args.what == "phi" else dyadic_three_color(x)
    _emit(args, str(out))
    return EXIT_FOUND


def cmd_coloring_build(args):
    domain = Domain.parse(args.domain)
    if args.kind == "dyadic-phi":
        c = DyadicPhiColoring(domain, args.colors)
    elif args.kind == "interval":
        c = IntervalColoring(domain, parse_rational_list(args.cuts or "1"))
    else:
        c = random_coloring(domain, args.colors, args.seed)
    _emit(args, c.to_json())
    return EXIT_FOUND


def cmd_coloring_validate(args):
    rep = coloring_validate(Coloring.from_json(_load_json(args.coloring)))
    _emit(args, rep)
    return EXIT_FOUND if rep["valid"] else EXIT_INVALID


def cmd_coloring_product(args):
    base = Coloring.from_json(_load_json(args.coloring))
    _emit(args, product_coloring(base, args.k).to_json())
    return EXIT_FOUND


def cmd_search_witness(args):
    m = _matrix(args)
    coloring = Coloring.from_json(_load_json(args.coloring))
    grid = Domain.parse(args.grid).points if args.grid else coloring.domain.points
    bounds = SearchBounds(grid, epsilon=args.epsilon, node_budget=args.budget)
    cert = find_witness(m, coloring, bounds, workers=args.workers, strict=args.strict, seed=args.seed)
    if cert is None:
        return _none(args, "witness")
    _emit(args, cert.to_json())
    return EXIT_FOUND


def cmd_search_avoid(args):
    cert = find_avoiding_coloring(_matrix(args), args.colors, Domain.parse(args.domain),
                                  budget=args.budget, workers=args.workers, seed=args.seed)
    if cert is None:
        return _none(args, "avoiding coloring")
    _emit(args, cert.to_json())
    return EXIT_FOUND


def cmd_bound(args):
    cert = compactness_bound(_matrix(args), args.colors, args.max, budget=args.budget,
                             workers=args.workers, seed=args.seed)
    if cert is None:
        print(f"unresolved up to {args.max}", file=sys.stderr)
        return EXIT_NONE
    if args.output:
        write_atomic(args.output, cert.dumps())
    print(cert.payload["N"])
    return EXIT_FOUND


def cmd_extend_row(args):
    b = extend_with_row(_matrix(args), parse_rational_list(args.row),
                        parse_rational_list(args.candidates), args.colors, Domain.parse(args.domain),
                        budget=args.budget, workers=args.workers)
    if b is None:
        print("none")
        return EXIT_NONE
    print(format_rational(b))
    return EXIT_FOUND


def cmd_separation(args):
    rep = separation_depth_search(_window(args.window), args.maxlen,
                                  parse_rational_list(args.tuple_a), parse_rational_list(args.tuple_b),
                                  budget=args.budget, workers=args.workers)
    _emit(args, rep)
    if any(c["status"] == "budget-exhausted" for c in rep["colors"]):
        return EXIT_BUDGET
    return EXIT_FOUND


def cmd_construct(args):
    if args.example == "ex16-obstruction":
        xs = parse_rational_list(args.x)
        k = ex16_obstruction(xs, args.bound)
        row = build_family("ex16", len(xs)).apply(xs)[k]
        _emit(args, {"k": k, "value": format_rational(row), "bound": args.bound})
        return EXIT_FOUND
    y = parse_rational_list(args.y)
    if args.example == "ex16":
        x, m = ex16_witness(y), build_family("ex16", len(y))
    else:
        x, m = ex17_witness(y), build_family("ex17", len(y))
    payload = {"x": [format_rational(v) for v in x], "image": image_entries(m, None, x),
               "target": {"type": "values", "values": [format_rational(v) for v in y]}}
    _emit(args, Certificate("witness", m, None, payload, seed=args.seed).to_json())
    return EXIT_FOUND


def cmd_pipeline(args):
    m = SparseMatrix.from_json(_load_json(args.finite))
    phi = Coloring.from_json(_load_json(args.coloring))
    n = SparseMatrix.from_json(_load_json(args.n_matrix)) if args.n_matrix else None
    cert = extension_pipeline(m, phi, args.epsilon, n_matrix=n, max_k=args.max_k,
                              budget=args.budget, workers=args.workers, seed=args.seed)
    _emit(args, cert.to_json())
    return EXIT_FOUND


def cmd_segmented(args):
    spec = SegmentedSpec.from_json(_load_json(args.spec))
    cert = segmented_solve(spec, IPTailOracle.parse(args.generators), args.depth,
                           budget=args.budget, seed=args.seed)
    _emit(args, cert.to_json())
    return EXIT_FOUND


def cmd_diagonal(args):
    mats = [SparseMatrix.from_json(_load_json(p)) for p in args.blocks]
    targets = [IPTailOracle.parse(t) for t in args.targets]
    cert = countable_diagonal_solve(mats, targets, args.prefix or len(mats), budget=args.budget,
                                    seed=args.seed)
    _emit(args, cert.to_json())
    return EXIT_FOUND


def cmd_verify(args):
    rep = verify_certificate(_load_json(args.certificate))
    _emit(args, rep.to_json())
    if not rep.ok:
        for p in rep.problems:
            print(f"violation: {p}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_FOUND


# ---------------------------------------------------------------------------
# parser

class _Parser(argparse.ArgumentParser):
    # usage errors are invalid input, not a budget outcome
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _matrix_opts(p):
    g = p.add_argument_group("matrix input")
    g.add_argument("--matrix", help="matrix JSON file")
    g.add_argument("--family", help="fs, mt, ex16, ex17, schur or identity")
    g.add_argument("--size", type=int, default=3)
    g.add_argument("--params", help="comma-separated rationals (mt tuple)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="write the result here instead of stdout")
    common.add_argument("--budget", type=int, default=None,
                        help="node budget (default: $IPR_BUDGET or 10^7)")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="iprlab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def leaf(subparsers, name, func, **kw):
        p = subparsers.add_parser(name, parents=[common], **kw)
        p.set_defaults(func=func)
        return p

    fam = sub.add_parser("families").add_subparsers(dest="action", required=True)
    _matrix_opts(leaf(fam, "build", cmd_families_build, help="build a family matrix"))

    p = leaf(sub, "classify", cmd_classify, help="first-entries / segmented report")
    _matrix_opts(p)
    p.add_argument("--breakpoints", help="comma-separated column breakpoints starting at 0")
    p.add_argument("--segmented", action="store_true", help="require the segmented check")

    p = leaf(sub, "diag", cmd_diag, help="diagonal sum of two matrices")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)

    mt = sub.add_parser("mt").add_subparsers(dest="action", required=True)
    p = leaf(mt, "enum", cmd_mt_enum, help="enumerate MT(coeffs, terms)")
    p.add_argument("--coeffs", required=True)
    p.add_argument("--terms", required=True)
    p.add_argument("--strategy", default="block-split", choices=["block-split", "subset-filter"])
    p.add_argument("--multiplicity", action="store_true")

    p = leaf(sub, "dyadic", cmd_dyadic, help="phi or 3-color of a dyadic rational")
    p.add_argument("what", choices=["phi", "color"])
    p.add_argument("value")

    col = sub.add_parser("coloring").add_subparsers(dest="action", required=True)
    p = leaf(col, "build", cmd_coloring_build, help="make a coloring JSON")
    p.add_argument("--kind", choices=["dyadic-phi", "interval", "random"], required=True)
    p.add_argument("--domain", required=True, help="1..20, dyadic:-12..0, rational:P,Q, points:...")
    p.add_argument("--colors", type=int, default=3)
    p.add_argument("--cuts")
    p = leaf(col, "validate", cmd_coloring_validate)
    p.add_argument("--coloring", required=True)
    p = leaf(col, "product", cmd_coloring_product)
    p.add_argument("--coloring", required=True)
    p.add_argument("--k", type=int, required=True)

    se = sub.add_parser("search").add_subparsers(dest="action", required=True)
    p = leaf(se, "witness", cmd_search_witness, help="least monochromatic image")
    _matrix_opts(p)
    p.add_argument("--coloring", required=True)
    p.add_argument("--grid", help="variable grid (default: the coloring domain)")
    p.add_argument("--epsilon")
    p.add_argument("--strict", action="store_true", help="fail on images outside the domain")
    p = leaf(se, "avoid", cmd_search_avoid, help="coloring with no monochromatic image")
    _matrix_opts(p)
    p.add_argument("--colors", type=int, required=True)
    p.add_argument("--domain", required=True)

    bd = sub.add_parser("bound").add_subparsers(dest="action", required=True)
    p = leaf(bd, "compactness", cmd_bound, help="least N forcing a monochromatic image")
    _matrix_opts(p)
    p.add_argument("--colors", type=int, required=True)
    p.add_argument("--max", type=int, required=True)

    p = leaf(sub, "extend-row", cmd_extend_row, help="find b keeping M plus b*row regular")
    _matrix_opts(p)
    p.add_argument("--row", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--colors", type=int, required=True)
    p.add_argument("--domain", required=True)

    sep = sub.add_parser("separation").add_subparsers(dest="action", required=True)
    p = leaf(sep, "depth", cmd_separation, help="MT separation depth per color")
    p.add_argument("--window", required=True, help="exponent window such as -10..0")
    p.add_argument("--maxlen", type=int, required=True)
    p.add_argument("--tuple-a", default="1")
    p.add_argument("--tuple-b", default="1,2")

    con = sub.add_parser("construct").add_subparsers(dest="example", required=True)
    for name in ("ex16", "ex17"):
        p = leaf(con, name, cmd_construct, help=f"witness x for the {name} matrix")
        p.add_argument("--y", required=True)
    p = leaf(con, "ex16-obstruction", cmd_construct, help="row of ex16*x exceeding the bound")
    p.add_argument("--x", required=True)
    p.add_argument("--bound", default="1")

    pl = sub.add_parser("pipeline").add_subparsers(dest="action", required=True)
    p = leaf(pl, "extend", cmd_pipeline, help="finite-by-infinite extension witness")
    p.add_argument("--finite", required=True)
    p.add_argument("--coloring", required=True)
    p.add_argument("--epsilon", required=True)
    p.add_argument("--n-matrix")
    p.add_argument("--max-k", type=int, default=12)

    sg = sub.add_parser("segmented").add_subparsers(dest="action", required=True)
    p = leaf(sg, "solve", cmd_segmented, help="block-by-block segmented solve")
    p.add_argument("--spec", required=True)
    p.add_argument("--generators", default="base4:12")
    p.add_argument("--depth", type=int, required=True)

    dg = sub.add_parser("diagonal").add_subparsers(dest="action", required=True)
    p = leaf(dg, "solve", cmd_diagonal, help="stacked solve of a diagonal sum")
    p.add_argument("--blocks", nargs="+", required=True)
    p.add_argument("--targets", nargs="+", required=True)
    p.add_argument("--prefix", type=int)

    p = leaf(sub, "verify", cmd_verify, help="independently re-check a certificate")
    p.add_argument("certificate")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.budget is None:
            args.budget = default_budget()
        return args.func(args)
    except BudgetExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except IPRError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONE
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
