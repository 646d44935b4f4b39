"""Command-line entry points ``ffdot`` and ``pidot``.

Exit status is 0 unless some check is VIOLATED or FAIL (status 1); usage
and input errors exit with status 2.
"""
from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path


from . import charsums as cs
from .errors import FFDotError
from .field import FieldElement, FieldVector, FiniteField, PointSet, make_field
from .graphs import count_realizations, graph_image, random_product_subset
from .lab import (coverage_experiment, fourier_selftest, make_rng, parse_graph_spec, resolve_set_spec,
                  threshold_sweep, verify_avg_image_bound, verify_fourier_fiber_identity,
                  verify_lemma_moment_bound)
from .report import Check, Report, Verdict

_BOUND = {cs.BoundVerdict.CONFIRMED: Verdict.CONFIRMED, cs.BoundVerdict.VIOLATED: Verdict.VIOLATED,
          cs.BoundVerdict.INDETERMINATE: Verdict.INDETERMINATE}


# -- argument helpers ---------------------------------------------------------

def _field_args(p: argparse.ArgumentParser, d_default: int = 2):
    p.add_argument("--p", type=int, default=3, help="characteristic")
    p.add_argument("--n", type=int, default=1, help="extension degree")
    p.add_argument("--d", type=int, default=d_default, help="dimension of F_q^d")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--out", help="write the report (.json) or table (.csv) here")


def _set_args(p: argparse.ArgumentParser):
    p.add_argument("--set", dest="sets", action="append", default=None,
                   help="FULL, random:SIZE or a point-set file; repeat per component")


def parse_element(field: FiniteField, token: str) -> FieldElement:
    """A code (residue for prime fields) or a comma-joined coefficient list."""
    token = token.strip()
    if "," in token:
        return FieldElement(field, field.from_coeffs([int(c) for c in token.split(",")]))
    return FieldElement(field, field(int(token)).code if field.n == 1 else int(token) % field.q)


def parse_vector(field: FiniteField, token: str) -> FieldVector:
    """Coordinates separated by spaces or colons, each as in :func:`parse_element`."""
    parts = token.replace(":", " ").split()
    return FieldVector(field, tuple(parse_element(field, t).code for t in parts))


def _sets(args, field: FiniteField, count: int, seed: int) -> list[PointSet]:
    specs = args.sets or ["FULL"]
    if len(specs) == 1:
        specs = specs * count
    if len(specs) != count:
        raise ValueError(f"expected {count} --set values, got {len(specs)}")
    return [resolve_set_spec(s, field, args.d, seed + i) for i, s in enumerate(specs)]


def _merge(command: str, config: dict, reports: list[Report]) -> Report:
    out = Report(command, config)
    t = 0.0
    for i, rep in enumerate(reports):
        for c in rep.checks:
            prefix = f"trial{i}/" if len(reports) > 1 else ""
            out.checks.append(Check(prefix + c.name, c.verdict, c.values, c.note))
        for k, v in rep.counters.items():
            out.counters[k] = out.counters.get(k, 0) + v
        t += rep.wall_time or 0.0
    out.wall_time = t
    return out


def _emit(report: Report, out: str | None) -> int:
    text = report.to_json()
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)
    return 0 if report.ok else 1


def _bound_check(rep: Report, name: str, bc: cs.BoundCheck, **extra):
    values = dict(lhs_squared=bc.lhs, rhs_squared=bc.rhs, precision_used=bc.precision_used,
                  tight=bc.tight, **extra)
    if bc.value is not None:
        values["value"] = bc.value
    rep.add(name, _BOUND[bc.verdict], **values)


# -- command handlers -----------------------------------------------------------

def cmd_fourier(args) -> int:
    field = make_field(args.p, args.n)
    return _emit(fourier_selftest(field, args.d, args.trials, args.seed), args.out)


def cmd_lemma31(args) -> int:
    field = make_field(args.p, args.n)
    reports = []
    for t in range(args.trials):
        sets = _sets(args, field, args.ell + 1, args.seed + t * (args.ell + 2))
        reports.append(verify_lemma_moment_bound(sets[:-1], sets[-1]))
    cfg = {"p": args.p, "n": args.n, "d": args.d, "l": args.ell, "trials": args.trials, "seed": args.seed}
    return _emit(_merge("verify lemma31", cfg, reports), args.out)


def cmd_eq3(args) -> int:
    field = make_field(args.p, args.n)
    reports = []
    for t in range(args.trials):
        base = args.seed + t * 2
        A = _sets(args, field, 1, base)[0]
        rng = make_rng(base + 1)
        xs = [FieldVector.from_index(field, args.d, int(i))
              for i in rng.integers(0, field.q ** args.d, size=args.ell)]
        reports.append(verify_fourier_fiber_identity(A, xs))
    cfg = {"p": args.p, "n": args.n, "d": args.d, "l": args.ell, "trials": args.trials, "seed": args.seed}
    return _emit(_merge("verify eq3", cfg, reports), args.out)


def cmd_thm32(args) -> int:
    field = make_field(args.p, args.n)
    reports = []
    for t in range(args.trials):
        base = args.seed + t * (args.ell + 2)
        sets = _sets(args, field, args.ell + 1, base)
        S = random_product_subset(sets, Fraction(args.density), base + args.ell + 1)
        reports.append(verify_avg_image_bound(S, args.ell, constant=args.constant, tau=Fraction(args.tau)))
    cfg = {"p": args.p, "n": args.n, "d": args.d, "l": args.ell, "density": Fraction(args.density),
           "trials": args.trials, "seed": args.seed}
    return _emit(_merge("verify thm32", cfg, reports), args.out)


def cmd_cover(args) -> int:
    field = make_field(args.p, args.n)
    G = parse_graph_spec(args.graph)
    reports = []
    for t in range(args.trials):
        base = args.seed + t * (G.k + 1)
        sets = _sets(args, field, G.k, base)
        reports.append(coverage_experiment(G, sets, Fraction(args.density), base, constant=args.constant,
                                           count=args.count, workers=args.workers))
    cfg = {"p": args.p, "n": args.n, "d": args.d, "graph": args.graph, "density": Fraction(args.density),
           "trials": args.trials, "seed": args.seed}
    return _emit(_merge("cover", cfg, reports), args.out)


def cmd_sweep(args) -> int:
    field = make_field(args.p, args.n)
    G = parse_graph_spec(args.graph)
    sizes = [int(s) for s in args.sizes.split(",")]
    rep, table = threshold_sweep(G, field, args.d, sizes, args.trials, args.seed, Fraction(args.density))
    if args.out:
        Path(args.out).write_text(table)
    else:
        sys.stdout.write(table)
    if args.report:
        Path(args.report).write_text(rep.to_json() + "\n")
    return 0 if rep.ok else 1


def cmd_charsum(args) -> int:
    field = make_field(args.p, args.n)
    kind = args.kind
    rep = Report(f"charsum {kind}", {"p": args.p, "n": args.n, "d": args.d, "seed": args.seed})
    t0 = time.perf_counter()
    cap = args.precision_cap
    if kind == "ssum":
        A = _sets(args, field, 1, args.seed)[0]
        x = parse_vector(field, args.x) if args.x else FieldVector.from_index(field, args.d, 0)
        rep.add("s_sum", Verdict.INFO, value=cs.s_sum(A, parse_element(field, args.alpha), x))
    elif kind == "vsum":
        A, B = _sets(args, field, 2, args.seed)
        v, bc = cs.v_sum(A, B, parse_element(field, args.alpha), precision_cap=cap)
        _bound_check(rep, "aggregate_bound", bc)
    elif kind == "energy":
        A = _sets(args, field, 1, args.seed)[0]
        v, bc = cs.dilate_energy(A, parse_element(field, args.alpha), precision_cap=cap)
        _bound_check(rep, "dilate_energy_bound", bc)
    elif kind == "rdecomp":
        G = parse_graph_spec(args.graph)
        sets = _sets(args, field, G.k, args.seed)
        labels = [parse_element(field, a) for a in args.alpha.split("/")]
        dec = cs.r_decomposition(G, sets, labels)
        count = count_realizations(G, sets, labels)
        rep.add("r_terms", Verdict.INFO, terms=dec.terms, total=dec.total)
        rep.add("total_matches_count", Verdict.PASS if dec.total == count else Verdict.FAIL,
                total=dec.total, realizations=count)
    elif kind == "schur":
        rng = make_rng(args.seed)
        m, n = (int(v) for v in args.shape.split("x"))
        for t in range(args.trials):
            c = [[Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))) for _ in range(n)] for _ in range(m)]
            z = [Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))) for _ in range(m)]
            y = [Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))) for _ in range(n)]
            _bound_check(rep, f"schur_{t}", cs.schur_bound_check(c, z, y, precision_cap=cap))
    rep.wall_time = time.perf_counter() - t0
    return _emit(rep, args.out)


def cmd_image(args) -> int:
    field = make_field(args.p, args.n)
    G = parse_graph_spec(args.graph)
    sets = _sets(args, field, G.k, args.seed)
    S = random_product_subset(sets, Fraction(args.density), args.seed + G.k)
    labels = graph_image(G, S, workers=args.workers)
    if args.labels_out:
        Path(args.labels_out).write_text(labels.to_text())
    rep = Report("image", {"graph": args.graph, "p": args.p, "n": args.n, "d": args.d,
                           "density": Fraction(args.density), "seed": args.seed})
    rep.add("image", Verdict.INFO, popcount=labels.popcount(),
            fraction=Fraction(labels.popcount(), labels.size), nonzero_coverage=labels.nonzero_coverage(),
            S_size=len(S))
    return _emit(rep, args.out)


def cmd_count(args) -> int:
    field = make_field(args.p, args.n)
    G = parse_graph_spec(args.graph)
    sets = _sets(args, field, G.k, args.seed)
    S = random_product_subset(sets, Fraction(args.density), args.seed + G.k)
    labels = [parse_element(field, a) for a in args.alpha.split("/")]
    n = count_realizations(G, S, labels)
    rep = Report("count", {"graph": args.graph, "p": args.p, "n": args.n, "d": args.d,
                           "alpha": [lab.code for lab in labels], "density": Fraction(args.density),
                           "seed": args.seed})
    rep.add("realizations", Verdict.INFO, realizations=n)
    return _emit(rep, args.out)


# -- parsers --------------------------------------------------------------------

def _add_pidot(sub):
    for name, fn in (("image", cmd_image), ("count", cmd_count)):
        p = sub.add_parser(name, help=f"graph {name} over a product subset")
        _field_args(p)
        _common(p)
        p.add_argument("--graph", required=True, help="preset (P3, K3, paw, ...), path:N, or a graph file")
        p.add_argument("--sets", dest="sets", nargs="+", default=None, help="one set spec per vertex")
        p.add_argument("--density", default="1/2")
        p.add_argument("--workers", type=int, default=1)
        if name == "image":
            p.add_argument("--labels-out", help="write the label set in hex form")
        else:
            p.add_argument("--alpha", required=True, help="edge labels separated by '/'")
        p.set_defaults(func=fn)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ffdot", description="Exact dot-product graph laboratory over F_q")
    sub = parser.add_subparsers(dest="command", required=True)

    four = sub.add_parser("fourier", help="transform self-test")
    four_sub = four.add_subparsers(dest="action", required=True)
    st = four_sub.add_parser("selftest")
    _field_args(st)
    _common(st)
    st.set_defaults(func=cmd_fourier, trials=20)

    ver = sub.add_parser("verify", help="identity and inequality suites")
    ver_sub = ver.add_subparsers(dest="suite", required=True)
    for name, fn in (("fourier", cmd_fourier), ("lemma31", cmd_lemma31), ("eq3", cmd_eq3), ("thm32", cmd_thm32)):
        p = ver_sub.add_parser(name)
        _field_args(p)
        _common(p)
        _set_args(p)
        p.add_argument("--ell", type=int, default=1)
        p.add_argument("--density", default="1/2")
        p.add_argument("--constant", type=Fraction, default=None)
        p.add_argument("--tau", default="1/2")
        p.add_argument("--precision-cap", type=int, default=512)
        p.set_defaults(func=fn)

    cov = sub.add_parser("cover", help="coverage of Pi_G(S)")
    _field_args(cov)
    _common(cov)
    _set_args(cov)
    cov.add_argument("--graph", default="P3")
    cov.add_argument("--density", default="1/2")
    cov.add_argument("--constant", type=Fraction, default=None)
    cov.add_argument("--count", action="store_true", help="cross-check realization counts")
    cov.add_argument("--workers", type=int, default=1)
    cov.add_argument("--precision-cap", type=int, default=512)
    cov.set_defaults(func=cmd_cover)

    sw = sub.add_parser("sweep", help="coverage versus set size, as CSV")
    _field_args(sw)
    _common(sw)
    sw.add_argument("--graph", default="P3")
    sw.add_argument("--sizes", default="3,5,7,9", help="comma-separated set sizes")
    sw.add_argument("--density", default="1")
    sw.add_argument("--report", help="also write the JSON report here")
    sw.set_defaults(func=cmd_sweep)

    ch = sub.add_parser("charsum", help="character sums and their bounds")
    ch.add_argument("kind", choices=["ssum", "vsum", "energy", "rdecomp", "schur"])
    _field_args(ch)
    _common(ch)
    _set_args(ch)
    ch.add_argument("--alpha", default="1", help="label; for rdecomp one per edge separated by '/'")
    ch.add_argument("--x", help="vector for ssum, coordinates separated by ':'")
    ch.add_argument("--graph", default="P3")
    ch.add_argument("--shape", default="3x3", help="matrix shape for schur, e.g. 4x5")
    ch.add_argument("--precision-cap", type=int, default=512)
    ch.set_defaults(func=cmd_charsum)

    _add_pidot(sub)
    return parser


def build_pidot_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pidot", description="Dot-product graph images and realization counts")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_pidot(sub)
    return parser


def _run(parser: argparse.ArgumentParser, argv) -> int:
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FFDotError, ValueError, KeyError, OSError) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    return _run(build_parser(), argv)


def pidot_main(argv=None) -> int:
    return _run(build_pidot_parser(), argv)


if __name__ == "__main__":
    raise SystemExit(main())
