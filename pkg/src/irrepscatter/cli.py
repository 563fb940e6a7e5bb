"""Command line front end: ``irrep-scatter <subcommand> ...``.

Exit codes: 0 on success, 1 for input, schema and I/O problems, 2 when a
numerical certificate fails (for instance an operator outside the algebra).
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import logging
import sys

import numpy as np

from . import io
from .bipartition import decompose, transpose, verify_membership, wedderburn_from_bpt
from .coarse import pull_back, probability_distortion, skl_from_partial_bpt, trace_out_partial
from .errors import CertificationError, InputError, NotInSpan
from .lattice import LatticeConfig, ScanRow, curve_grid, diagonal_grid, divisor_pairs, regime_scan
from .reduction import StateReductionMap, purity_timeseries, reduce_hamiltonian, reduce_state

log = logging.getLogger("irrepscatter")


def _emit(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _problem(args) -> io.ProblemFile:
    problem = io.load_problem(args.input)
    problem.tolerances = problem.tolerances.replace(tol_eig_cluster=args.tol_eig, tol_zero=args.tol_zero)
    if args.include_identity:
        problem.include_identity = True
    return problem


def _random_block_check(dec, gens, n: int, seed: int) -> tuple[float, float]:
    """Largest off-block mass and multiplicity-row spread over random algebra elements."""
    rng = np.random.default_rng(seed)
    wd = dec.wedderburn
    off = rep = 0.0
    for _ in range(n):
        a = np.zeros_like(gens[0])
        for _ in range(3):
            word = [gens[j] for j in rng.integers(0, len(gens), rng.integers(1, 4))]
            a = a + (rng.normal() + 1j * rng.normal()) * np.linalg.multi_dot(word + [np.eye(len(a))])
        off = max(off, wd.off_block_mass(a) / max(np.linalg.norm(a), 1e-300))
        for stack in wd.irrep_blocks(a):
            rep = max(rep, float(np.max(np.abs(stack - stack[0]))))
    return off, rep


def cmd_decompose(args) -> int:
    problem = _problem(args)
    gens = problem.generator_matrices
    dec = decompose(gens, problem.include_identity, problem.tolerances)
    extra = {}
    if args.random_checks:
        off, rep = _random_block_check(dec, gens, args.random_checks, args.seed)
        extra = {"random_checks": args.random_checks, "seed": args.seed,
                 "max_off_block": off, "max_row_spread": rep}
    report = io.decomposition_report(dec, gens, extra)
    _emit(io.dumps(report), args.output)
    shapes = ", ".join(f"{b.rows}x{b.cols}" for b in dec.bpt.blocks)
    print(f"decompose: dim={dec.bpt.dim} blocks=[{shapes}] complement={dec.bpt.complement_dim} "
          f"scatterings={report['diagnostics']['scatter_count']} "
          f"max_residual={report['diagnostics']['max_residual']:.3e}", file=sys.stderr)
    return 0


def cmd_reduce(args) -> int:
    problem = _problem(args)
    bpt, _ = io.load_report(args.decomposition)
    if bpt.dim != problem.dim:
        raise InputError(f"decomposition has dim {bpt.dim}, problem has dim {problem.dim}")
    if args.mode == "commutant":
        com = transpose(bpt)
        out = io.bpt_to_dict(com)
        out["isometry_count"] = sum(b.cols * b.cols for b in com.blocks)
        print(f"reduce: commutant with {out['isometry_count']} isometries", file=sys.stderr)
    elif args.mode == "hamiltonian":
        h = problem.lookup(args.target)
        wd = wedderburn_from_bpt(bpt)
        rep = verify_membership(bpt, h)
        if rep.residual > 1e-6:
            print(f"reduce: {args.target} is not in the algebra, residual {rep.residual:.3e}", file=sys.stderr)
        red = reduce_hamiltonian(h, wd)
        out = {"target": args.target, "residual": red.residual, "row_deviation": red.row_deviation,
               "blocks": [{"q": q, "mult_dim": n, "matrix": io.encode_complex(b)}
                          for q, (b, n) in enumerate(zip(red.blocks, red.mult_dims))],
               "spectrum": red.spectrum().tolist()}
        print(f"reduce: {args.target} residual={red.residual:.3e}", file=sys.stderr)
    else:
        rho = problem.lookup(args.target)
        r = reduce_state(rho, StateReductionMap.from_bpt(bpt))
        out = {"target": args.target, "reduced_dim": r.dim, "rho": io.encode_complex(r.matrix)}
        print(f"reduce: state {args.target} -> dim {r.dim}", file=sys.stderr)
    _emit(io.dumps(out), args.output)
    return 0


def cmd_coarse_grain(args) -> int:
    rho = io.state_from_dict(io.read_json(args.state))
    pbpt, observables = io.pbpt_from_dict(io.read_json(args.pbpt))
    reduced = trace_out_partial(rho, pbpt, args.side)
    out = {"side": args.side, "rho": io.encode_complex(reduced.matrix)}
    if observables:
        basis = skl_from_partial_bpt(pbpt if args.side == "B" else pbpt.transpose())
        report = {}
        for name, o in observables.items():
            o_b, res = pull_back(o, basis)
            entry = {"O_B": io.encode_complex(o_b), "residual": res,
                     "ambient_expectation": float(np.real(np.trace(o @ rho))),
                     "reduced_expectation": float(np.real(np.trace(o_b @ reduced.matrix)))}
            try:
                entry["distortion"] = [{"eigenvalue": d.eigenvalue, "ambient": d.ambient,
                                        "reduced": d.reduced, "difference": d.difference}
                                       for d in probability_distortion(o, basis, rho)]
            except NotInSpan:
                entry["distortion"] = None
            report[name] = entry
        out["observables"] = report
    _emit(io.dumps(out), args.output)
    print(f"coarse-grain: side {args.side}, reduced dim {reduced.dim}", file=sys.stderr)
    return 0


def _csv_field(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    return repr(v)


def cmd_uncertainty(args) -> int:
    if args.scan:
        grid = {"diagonal": diagonal_grid, "curve": curve_grid, "full": divisor_pairs}[args.scan](args.d)
    else:
        if args.wx is None or args.wp is None:
            raise InputError("give --wx and --wp, or --scan")
        LatticeConfig(args.d, args.wx, args.wp)
        grid = [(args.wx, args.wp)]
    rows = regime_scan(args.d, grid, direct=args.direct_oracle)
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ScanRow.FIELDS)
    for r in rows:
        writer.writerow([_csv_field(v) for v in r.as_tuple()])
    if args.csv:
        _emit(buf.getvalue(), args.csv)
    if args.output or not args.csv:
        if args.output:
            _emit(io.dumps({"rows": [dict(zip(ScanRow.FIELDS, r.as_tuple())) for r in rows]}), args.output)
        else:
            sys.stdout.write(buf.getvalue())
    print(f"uncertainty: d={args.d}, {len(rows)} rows", file=sys.stderr)
    return 0


def _times(spec: str) -> np.ndarray:
    try:
        start, stop, num = spec.split(":")
        return np.linspace(float(start), float(stop), int(num))
    except ValueError as exc:
        raise InputError(f"--times expects start:stop:count, got {spec!r}") from exc


def cmd_purity(args) -> int:
    problem = _problem(args)
    bpt, _ = io.load_report(args.decomposition)
    if args.commutant:
        bpt = transpose(bpt)
    h = problem.lookup(args.hamiltonian)
    rho = problem.lookup(args.state)
    series = purity_timeseries(h, rho, StateReductionMap.from_bpt(bpt), _times(args.times))
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "purity"])
    for t, p in series:
        writer.writerow([repr(t), repr(p)])
    _emit(buf.getvalue(), args.csv or args.output)
    print(f"purity: {len(series)} points, min {series.purity.min():.6f}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="output file (default: standard output)")
    common.add_argument("--tol-eig", type=float, default=None, help="eigenvalue clustering tolerance")
    common.add_argument("--tol-zero", type=float, default=None, help="zero-operator tolerance")
    common.add_argument("--include-identity", action="store_true", help="add the identity as a generator")
    common.add_argument("--verbose", "-v", action="store_true", help="log the scattering trace to stderr")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized verification passes")

    p = argparse.ArgumentParser(prog="irrep-scatter", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decompose", parents=[common], help="irreps structure of a generated algebra")
    d.add_argument("--input", "-i", required=True)
    d.add_argument("--random-checks", type=int, default=0, metavar="N",
                   help="verify block form on N random algebra elements")
    d.set_defaults(func=cmd_decompose)

    r = sub.add_parser("reduce", parents=[common], help="reduce an operator or a state")
    r.add_argument("--input", "-i", required=True)
    r.add_argument("--decomposition", "-d", required=True)
    r.add_argument("--target", "-t", help="name of a generator or operator in the input file")
    r.add_argument("--mode", choices=["hamiltonian", "state", "commutant"], default="hamiltonian")
    r.set_defaults(func=cmd_reduce)

    c = sub.add_parser("coarse-grain", parents=[common], help="trace out over a partial table")
    c.add_argument("--state", required=True)
    c.add_argument("--pbpt", required=True)
    c.add_argument("--side", choices=["A", "B"], default="B", help="subsystem to keep")
    c.add_argument("--input", help=argparse.SUPPRESS)
    c.set_defaults(func=cmd_coarse_grain)

    u = sub.add_parser("uncertainty", parents=[common], help="lattice position/momentum agreement")
    u.add_argument("--d", type=int, required=True)
    u.add_argument("--wx", type=int)
    u.add_argument("--wp", type=int)
    u.add_argument("--scan", choices=["diagonal", "curve", "full"])
    u.add_argument("--direct-oracle", action="store_true", help="add the brute-force column (d <= 256)")
    u.add_argument("--csv", help="CSV output file")
    u.set_defaults(func=cmd_uncertainty)

    t = sub.add_parser("purity", parents=[common], help="purity of the reduced state over time")
    t.add_argument("--input", "-i", required=True)
    t.add_argument("--decomposition", "-d", required=True)
    t.add_argument("--hamiltonian", required=True)
    t.add_argument("--state", required=True)
    t.add_argument("--times", default="0:10:101", help="start:stop:count")
    t.add_argument("--commutant", action="store_true", help="reduce with the transposed table")
    t.add_argument("--csv", help="CSV output file")
    t.set_defaults(func=cmd_purity)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.command == "reduce" and args.mode != "commutant" and not args.target:
            raise InputError("--target is required for hamiltonian and state reductions")
        return args.func(args)
    except CertificationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (InputError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    finally:
        log.removeHandler(handler)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
