"""Command-line front end.

Subcommands (tab-separated output, 12 significant digits, header rows):

    spectrum  <graph> --kmax <r>                 eigenvalues with k <= kmax
    modes     <graph> --n <N> [--samples <s>]    sampled eigenfunctions
    interlace <graph> --vertex <id> --alphas <list>   interlacing margins
    generic   <graph> --trials <t> --eps <e> --n <N> --seed <s>
    manifold  <graph> --res <r> [--mesh <path>] [--field <path>]
    trace     <graph> --leaf <id> --start <n> --turns <even>

Exit codes: 0 success, 1 validation/usage error, 2 numerical-check failure.
`inf` is accepted as an alpha literal (Dirichlet).  Identical argv and input
produce byte-identical output; randomness is seeded.
"""

from __future__ import annotations

import argparse
import math
import sys
from contextlib import nullcontext

from .errors import NumericalCheckError, ValidationError
from .eigenmode import eigenfunctions_at, sample_on_edges
from .genericity import (
    genericity_report,
    randomized_genericity_trial,
    trace_theta_path,
    verify_interlacing,
)
from .graphs import load_graph
from .manifold import (
    component_sign,
    connected_components,
    export_field,
    export_mesh,
    sample_field,
    two_coloring_consistent,
)
from .spectral import scan_spectrum, scan_up_to_count


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.12g}"
    return str(x)


def _emit(out, rows, header) -> None:
    out.write("\t".join(header) + "\n")
    for row in rows:
        out.write("\t".join(_fmt(v) for v in row) + "\n")


def _parse_alpha(tok: str) -> float:
    if tok.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    return float(tok)


def _open_out(path):
    if path is None:
        return nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8")


def _cmd_spectrum(args, out) -> int:
    g = load_graph(args.graph)
    records = scan_spectrum(g, args.kmax)
    rows = [
        (("-" if r.negative else "") + _fmt(r.k), r.lam, r.multiplicity,
         r.index_start, r.residual)
        for r in records
    ]
    _emit(out, rows, ["k", "lambda", "multiplicity", "index", "residual"])
    return 0


def _cmd_modes(args, out) -> int:
    g = load_graph(args.graph)
    records = scan_up_to_count(g, args.n)
    rows = []
    count = 0
    for r in records:
        for f in eigenfunctions_at(g, r):
            if count >= args.n:
                break
            for eid, x, val in sample_on_edges(f, args.samples):
                rows.append((count, r.lam, eid, x, val))
            count += 1
        if count >= args.n:
            break
    _emit(out, rows, ["n", "lambda", "edge", "x", "value"])
    return 0


def _cmd_interlace(args, out) -> int:
    g = load_graph(args.graph)
    alphas = [_parse_alpha(t) for t in args.alphas.split(",")]
    if len(alphas) < 2:
        raise ValidationError("--alphas needs at least two comma-separated values")
    pairs = list(zip(alphas[:-1], alphas[1:]))
    reports = verify_interlacing(g, args.vertex, pairs, n_eigs=args.n)
    rows = [
        (r.alpha, r.alpha_prime, int(r.reversed_form), r.n_checked, r.margin,
         r.strict_checked, r.strict_margin,
         ",".join(map(str, r.strict_violations)) or "-")
        for r in reports
    ]
    _emit(out, rows, ["alpha", "alpha_prime", "reversed", "n_checked",
                      "margin", "strict_checked", "strict_margin",
                      "strict_violations"])
    return 0


def _cmd_generic(args, out) -> int:
    g = load_graph(args.graph)
    if args.trials == 0:
        out.write("trial\tseed\tsimple\tnonvanishing\tloops\tpass\n")
        out.write("# pass_fraction: nan (no trials)\n")
        return 0
    if args.trials < 0:
        rep = genericity_report(g, args.n)
        _emit(out, rep.to_rows(),
              ["index", "lambda", "multiplicity", "classification", "detail"])
        out.write("# " + rep.to_text().replace("\n", "\n# ") + "\n")
        return 0
    summary = randomized_genericity_trial(g, args.trials, args.eps, args.n, args.seed)
    rows = [
        (o.trial, o.seed, int(o.verdict_simple), int(o.verdict_nonvanishing),
         int(o.verdict_loops), int(o.passed))
        for o in summary.outcomes
    ]
    _emit(out, rows, ["trial", "seed", "simple", "nonvanishing", "loops", "pass"])
    out.write(f"# pass_fraction: {_fmt(summary.pass_fraction)}\n")
    return 0


def _cmd_manifold(args, out) -> int:
    g = load_graph(args.graph)
    fld = sample_field(g, args.res)
    connected_components(fld)
    consistent, bad = two_coloring_consistent(fld)
    out.write(f"components: {fld.n_components}\n")
    rows = [
        (i + 1, fld.component_sizes[i], component_sign(fld, i + 1))
        for i in range(fld.n_components)
    ]
    _emit(out, rows, ["component", "cells", "gradient_sign"])
    out.write(f"# zero_cells: {int(fld.zero_cells.sum())}\t"
              f"singular: {int(fld.singular.sum())}\t"
              f"two_coloring_consistent: {consistent}\n")
    if args.mesh:
        export_mesh(fld, args.mesh)
        out.write(f"# mesh written to {args.mesh}\n")
    if args.field:
        export_field(fld, args.field)
        out.write(f"# field written to {args.field}\n")
    if not consistent:
        raise NumericalCheckError(f"{bad} cells violate the two-coloring")
    return 0


def _cmd_trace(args, out) -> int:
    g = load_graph(args.graph)
    path = trace_theta_path(g, args.leaf, args.start, args.turns,
                            steps_per_turn=args.steps)
    E = len(g.edges)
    header = (["theta", "lambda", "extended_length"]
              + [f"kappa_{i + 1}" for i in range(E)] + ["phi_residual"])
    rows = [
        (s.theta, s.lam, s.extended_length, *s.torus_point, s.phi_residual)
        for s in path.samples
    ]
    _emit(out, rows, header)
    out.write(f"# max_phi_residual: {_fmt(path.max_phi_residual)}\n")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="graphspectra",
                description="spectra of metric graphs with delta-type conditions")
    p.add_argument("--threads", type=int, default=None,
                   help="bound internal linear-algebra threads (best effort)")
    p.add_argument("--out", default=None, help="write the table here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="eigenvalues up to kmax")
    sp.add_argument("graph")
    sp.add_argument("--kmax", type=float, default=10.0)

    mo = sub.add_parser("modes", help="sampled eigenfunctions")
    mo.add_argument("graph")
    mo.add_argument("--n", type=int, default=6)
    mo.add_argument("--samples", type=int, default=50)

    il = sub.add_parser("interlace", help="interlacing margins over alpha pairs")
    il.add_argument("graph")
    il.add_argument("--vertex", required=True)
    il.add_argument("--alphas", required=True,
                    help="comma list; consecutive entries form pairs; inf allowed")
    il.add_argument("--n", type=int, default=20)

    ge = sub.add_parser("generic", help="randomized genericity trials")
    ge.add_argument("graph")
    ge.add_argument("--trials", type=int, default=100,
                    help="0: empty report; negative: single unperturbed report")
    ge.add_argument("--eps", type=float, default=0.01)
    ge.add_argument("--n", type=int, default=12)
    ge.add_argument("--seed", type=int, default=7)

    ma = sub.add_parser("manifold", help="torus field components")
    ma.add_argument("graph")
    ma.add_argument("--res", type=int, default=64)
    ma.add_argument("--mesh", default=None)
    ma.add_argument("--field", default=None)

    tr = sub.add_parser("trace", help="theta continuation path")
    tr.add_argument("graph")
    tr.add_argument("--leaf", required=True)
    tr.add_argument("--start", type=int, default=4)
    tr.add_argument("--turns", type=int, default=2)
    tr.add_argument("--steps", type=int, default=200,
                    help="theta steps per full turn")
    return p


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "modes": _cmd_modes,
    "interlace": _cmd_interlace,
    "generic": _cmd_generic,
    "manifold": _cmd_manifold,
    "trace": _cmd_trace,
}


def _thread_limit(n):
    if n is None:
        return nullcontext()
    try:
        from threadpoolctl import threadpool_limits

        return threadpool_limits(limits=n)
    except ImportError:
        return nullcontext()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with _thread_limit(args.threads), _open_out(args.out) as out:
            return _COMMANDS[args.command](args, out)
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except NumericalCheckError as exc:
        sys.stderr.write(f"numerical check failed: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"io error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
