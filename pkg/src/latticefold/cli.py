"""Command-line entry point: ``latticefold <subcommand> ...``.

Exit codes: 0 success, 2 invalid input or solver precondition, 3 I/O error.
A JSON config file (``--config``) supplies defaults; explicit flags win.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .energy import Penalties, evaluate, realized_contacts
from .hamiltonian import DEFAULT_CONTACT_PENALTY, build_hamiltonian
from .model import load_contact_table, parse_sequence
from .polynomial import PseudoBooleanPoly
from .quadratize import quadratize
from .resources import DEFAULT_EPSILONS, estimate, fit_quadratic, levinthal, scaling_csv
from .screener import parse_alignment, screen
from .solvers import (
    AnnealSchedule,
    VqeConfig,
    solve_anneal,
    solve_cvar_vqe,
    solve_exhaustive,
    solve_qubo_bruteforce,
)
from .structio import (
    DEFAULT_SCALE,
    parse_pdb,
    radius_of_gyration,
    rmsd_kabsch,
    to_trace,
    write_pdb,
    write_xyz,
)

log = logging.getLogger("latticefold")

THREADS_ENV = "LATTICEFOLD_THREADS"


class UsageError(ValueError):
    pass


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _write(path: str | Path, text: str):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


def _sequence(args):
    if getattr(args, "fasta", None):
        return parse_sequence(_read(args.fasta))
    if getattr(args, "seq", None):
        return parse_sequence(args.seq)
    raise UsageError("give --seq or --fasta")


def _table(args):
    return load_contact_table(getattr(args, "table", None))


def _emit(args, name: str, text: str):
    """Write under the --out prefix, or to stdout when no prefix is set."""
    if getattr(args, "out", None):
        _write(f"{args.out}{name}", text)
    else:
        sys.stdout.write(text)


def _add_seq_args(p):
    p.add_argument("--seq", help="one-letter sequence")
    p.add_argument("--fasta", help="single-record FASTA file")
    p.add_argument("--table", help="contact-energy CSV (default: embedded MJ table)")


def _add_penalty_args(p):
    p.add_argument("--overlap-penalty", type=float, default=Penalties.overlap)
    p.add_argument("--backturn-penalty", type=float, default=Penalties.backturn)


# ---- subcommands -------------------------------------------------------------


def cmd_fold(args) -> int:
    seq = _sequence(args)
    table = _table(args)
    pen = Penalties(args.overlap_penalty, args.backturn_penalty)
    if args.solver == "exhaustive":
        res = solve_exhaustive(seq, table, args.mode, pen, cap=args.exhaustive_cap)
    elif args.solver == "anneal":
        sched = AnnealSchedule(args.t_start, args.t_end, args.sweeps, args.restarts, args.seed)
        res = solve_anneal(seq, table, sched, args.mode, pen, workers=args.threads)
    else:
        cfg = VqeConfig(
            layers=args.layers, alpha=args.alpha,
            shots=None if args.shots == 0 else args.shots,
            budget=args.budget, restarts=args.vqe_restarts, rng_seed=args.seed,
            entangler=args.entangler, full_ancilla=args.full_ancilla,
            qubit_cap=args.qubit_cap,
        )
        res = solve_cvar_vqe(seq, table, cfg, pen)

    conf = res.best_conformation
    breakdown = evaluate(conf, table, args.mode, pen)
    trace = to_trace(conf, args.scale)
    manifest = {
        "tool": "latticefold",
        "version": __version__,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "sequence": seq.codes,
        "N": len(seq),
        "solver": res.solver_id,
        "best_energy": res.best_energy,
        "energy": {
            "contact_energy": breakdown.contact_energy,
            "overlap_count": breakdown.overlap_count,
            "backturn_count": breakdown.backturn_count,
            "total": breakdown.total,
            "valid": breakdown.valid,
        },
        "turns": list(conf.turns),
        "contacts": [[c.i, c.j, c.e_ij] for c in realized_contacts(conf, table)],
        "evaluations": res.evaluations,
        "rng_seed": res.rng_seed,
        "radius_of_gyration": radius_of_gyration(trace),
        "extras": {k: v for k, v in res.extras.items() if k != "spectrum"},
        "parameters": _echo(args),
    }
    if args.reference:
        ref = parse_pdb(_read(args.reference))
        if len(ref) != len(trace):
            raise UsageError(
                f"reference has {len(ref)} CA atoms, prediction has {len(trace)}"
            )
        manifest["reference"] = {
            "path": args.reference,
            "rmsd": rmsd_kabsch(trace, ref),
            "radius_of_gyration": radius_of_gyration(ref),
        }

    out = args.out
    _write(f"{out}.pdb", write_pdb(trace))
    _write(f"{out}.xyz", write_xyz(trace, comment=seq.codes))
    _write(f"{out}.trace.csv", res.trace_csv())
    _write(f"{out}.manifest.json", json.dumps(manifest, indent=2, default=_jsonable) + "\n")
    print(
        f"{seq.codes}: {res.solver_id} best energy {res.best_energy:.3f} "
        f"turns {''.join(map(str, conf.turns))} Rg {manifest['radius_of_gyration']:.3f} A"
    )
    if args.reference:
        print(f"RMSD vs reference {manifest['reference']['rmsd']:.3f} A")
    return 0


def cmd_hamiltonian(args) -> int:
    seq = _sequence(args)
    ham = build_hamiltonian(seq, _table(args), args.backturn_penalty, args.contact_penalty)
    if args.out:
        _write(f"{args.out}.poly.txt", ham.poly.to_text())
        _write(f"{args.out}.poly.json", ham.metadata_json() + "\n")
    print(ham.metadata_json() if not args.out else json.dumps(
        {k: v for k, v in ham.metadata().items() if k != "layout"}))
    return 0


def cmd_qubo(args) -> int:
    if args.poly:
        poly = PseudoBooleanPoly.from_text(_read(args.poly))
        meta_in = {}
        if args.poly.endswith(".txt") and os.path.exists(args.poly[:-4] + ".json"):
            meta_in = json.loads(_read(args.poly[:-4] + ".json"))
    else:
        seq = _sequence(args)
        ham = build_hamiltonian(seq, _table(args), args.backturn_penalty, args.contact_penalty)
        poly, meta_in = ham.poly, ham.metadata()
    penalty = "auto" if args.penalty == "auto" else float(args.penalty)
    q = quadratize(poly, penalty)
    meta = q.metadata()
    meta["source"] = {k: meta_in[k] for k in ("N", "sequence") if k in meta_in}
    if args.solve:
        m, argmin = solve_qubo_bruteforce(q)
        meta["bruteforce_min"] = m
        meta["bruteforce_argmin"] = [list(a) for a in argmin[:16]]
    if args.out:
        _write(f"{args.out}.qubo.txt", q.to_text())
        _write(f"{args.out}.qubo.json", json.dumps(meta, indent=2) + "\n")
    print(json.dumps({k: v for k, v in meta.items() if k != "ancillas"}, indent=2))
    return 0


def cmd_resources(args) -> int:
    spin = None
    if args.seq or args.fasta:
        seq = _sequence(args)
        n = len(seq)
        spin = build_hamiltonian(seq, _table(args)).spin()
    elif args.n is not None:
        n = args.n
    else:
        raise UsageError("give --n or --seq")
    est = estimate(n, spin, args.eps)
    doc = est.to_dict()
    if args.scan:
        lo, hi = args.scan
        pts = [(k, estimate(k).total_qubits) for k in range(lo, hi + 1)]
        fit = fit_quadratic(pts)
        doc["fit"] = {"range": [lo, hi], "a": fit.a, "b": fit.b, "c": fit.c,
                      "residual_norm": fit.residual_norm}
        if args.out:
            _write(f"{args.out}.scaling.csv", scaling_csv(range(lo, hi + 1)))
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        _write(f"{args.out}.resources.json", text)
    sys.stdout.write(text)
    print(f"total qubits: {est.total_qubits}")
    return 0


def cmd_screen(args) -> int:
    seq = _sequence(args)
    ref = parse_sequence(args.reference) if args.reference else None
    aln = parse_alignment(_read(args.msa), args.msa_format) if args.msa else None
    rep = screen(
        seq, ref, aln, n_eff=args.n_eff, identity_threshold=args.identity,
        orphan_threshold=args.orphan_threshold, target_threshold=args.target_threshold,
    )
    if args.tsv:
        _emit(args, ".screen.tsv", rep.tsv_header() + "\n" + rep.tsv_line() + "\n")
    else:
        _emit(args, ".screen.json", rep.to_json() + "\n")
    return 0


def cmd_metrics(args) -> int:
    if args.metric == "rmsd":
        if len(args.files) != 2:
            raise UsageError("rmsd needs two PDB files")
        a, b = (parse_pdb(_read(f)) for f in args.files)
        print(f"{rmsd_kabsch(a, b):.3f}")
    else:
        if len(args.files) != 1:
            raise UsageError("rg needs one PDB file")
        print(f"{radius_of_gyration(parse_pdb(_read(args.files[0]))):.3f}")
    return 0


def cmd_levinthal(args) -> int:
    est = levinthal(args.n)
    doc = est.to_dict()
    _emit(args, ".levinthal.json", json.dumps(doc, indent=2) + "\n")
    return 0


# ---- parser ------------------------------------------------------------------


def _jsonable(o):
    if hasattr(o, "tolist"):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    return str(o)


def _echo(args) -> dict:
    skip = {"func", "config", "out", "threads"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latticefold", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="JSON file of default option values")
        p.set_defaults(func=func)
        return p

    p = add("fold", cmd_fold, "fold a sequence and write PDB/XYZ/trace/manifest")
    _add_seq_args(p)
    _add_penalty_args(p)
    p.add_argument("--solver", choices=["exhaustive", "anneal", "vqe"], default="exhaustive")
    p.add_argument("--mode", choices=["physical", "clamped"], default="physical")
    p.add_argument("--out", default="fold")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=float, default=DEFAULT_SCALE,
                   help="Angstrom per lattice unit")
    p.add_argument("--reference", help="C-alpha PDB of the experimental structure")
    p.add_argument("--threads", type=int, default=int(os.environ.get(THREADS_ENV, "1")))
    p.add_argument("--exhaustive-cap", type=int, default=14)
    p.add_argument("--t-start", type=float, default=AnnealSchedule.T_start)
    p.add_argument("--t-end", type=float, default=AnnealSchedule.T_end)
    p.add_argument("--sweeps", type=int, default=AnnealSchedule.sweeps)
    p.add_argument("--restarts", type=int, default=AnnealSchedule.restarts)
    p.add_argument("--layers", type=int, default=VqeConfig.layers)
    p.add_argument("--alpha", type=float, default=VqeConfig.alpha)
    p.add_argument("--shots", type=int, default=VqeConfig.shots,
                   help="0 = exact distribution")
    p.add_argument("--budget", type=int, default=VqeConfig.budget)
    p.add_argument("--vqe-restarts", type=int, default=VqeConfig.restarts)
    p.add_argument("--entangler", choices=["linear", "ring"], default="linear")
    p.add_argument("--full-ancilla", action="store_true")
    p.add_argument("--qubit-cap", type=int, default=VqeConfig.qubit_cap)

    p = add("hamiltonian", cmd_hamiltonian, "build the folding Hamiltonian")
    _add_seq_args(p)
    p.add_argument("--backturn-penalty", type=float, default=Penalties.backturn)
    p.add_argument("--contact-penalty", type=float, default=DEFAULT_CONTACT_PENALTY)
    p.add_argument("--out")

    p = add("qubo", cmd_qubo, "quadratize a Hamiltonian to QUBO")
    _add_seq_args(p)
    p.add_argument("--poly", help="polynomial text file written by 'hamiltonian'")
    p.add_argument("--backturn-penalty", type=float, default=Penalties.backturn)
    p.add_argument("--contact-penalty", type=float, default=DEFAULT_CONTACT_PENALTY)
    p.add_argument("--penalty", default="auto", help="'auto' or a positive number")
    p.add_argument("--solve", action="store_true", help="brute-force the QUBO (<= 24 vars)")
    p.add_argument("--out")

    p = add("resources", cmd_resources, "qubit counts and measurement bounds")
    _add_seq_args(p)
    p.add_argument("--n", type=int)
    p.add_argument("--eps", type=float, nargs="+", default=list(DEFAULT_EPSILONS))
    p.add_argument("--scan", type=int, nargs=2, metavar=("NMIN", "NMAX"))
    p.add_argument("--out")

    p = add("screen", cmd_screen, "problem-selection report")
    _add_seq_args(p)
    p.add_argument("--reference", help="equal-length reference sequence")
    p.add_argument("--msa", help="aligned FASTA or A3M file")
    p.add_argument("--msa-format", choices=["auto", "fasta", "a3m"], default="auto")
    p.add_argument("--n-eff", type=float)
    p.add_argument("--identity", type=float, default=0.62)
    p.add_argument("--orphan-threshold", type=float, default=30.0)
    p.add_argument("--target-threshold", type=float, default=60.0)
    p.add_argument("--tsv", action="store_true")
    p.add_argument("--out")

    p = add("metrics", cmd_metrics, "RMSD / radius of gyration of PDB files")
    p.add_argument("metric", choices=["rmsd", "rg"])
    p.add_argument("files", nargs="+")

    p = add("levinthal", cmd_levinthal, "Levinthal search-space size")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    return parser


def parse_args(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        cfg = {k.replace("-", "_"): v for k, v in json.loads(_read(args.config)).items()}
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
