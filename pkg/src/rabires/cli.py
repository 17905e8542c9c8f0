"""Command-line interface.

All physical inputs are in natural units: hbar = 1 and the trap frequency
unit is 1 (omega_T for the harmonic trap, E_1/hbar for the hard wall).
Data goes to stdout (or --out); diagnostics go to stderr.

Exit codes: 0 success, 2 bad arguments or inputs, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from typing import Any, Sequence

import numpy as np

from rabires import report
from rabires.basis import DriveParams, TrapModel
from rabires.coupling import coupling_exact, coupling_leading
from rabires.dynamics import FRAMES, evolve, extract_frequency, initial_state
from rabires.errors import DomainError, NumericalError
from rabires.hamiltonian import build_full_hamiltonian
from rabires.resonance import (
    ResonanceSpec,
    enumerate_resonances,
    isolation_check,
    perturbative_splitting_general,
    weakfield_splitting,
)
from rabires.spectrum import convergence_probe, find_avoided_crossings, scan

log = logging.getLogger("rabires")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    return lo, hi


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--quiet", action="store_true", help="suppress diagnostics below error level")


def _trap_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trap", choices=("harmonic", "hardwall"), default="harmonic")


def _drive_args(p: argparse.ArgumentParser, rabi_default: float | None = 0.0) -> None:
    p.add_argument("--omega-r", type=float, default=rabi_default, help="on-resonance Rabi frequency")
    p.add_argument("--delta", type=float, default=0.0, help="detuning")
    p.add_argument("--eta", type=float, required=True, help="Lamb-Dicke parameter")


def _scan_args(p: argparse.ArgumentParser) -> None:
    _trap_arg(p)
    p.add_argument("--axis", choices=("detuning", "rabi", "radius"), required=True)
    _drive_args(p)
    p.add_argument("--angle", type=float, default=None, help="polar angle in degrees for --axis radius")
    p.add_argument("--range", type=_range, required=True, dest="value_range", help="lo:hi")
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--nmax", type=int, default=40, help="number of motional levels kept")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="rabires", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("couplings", help="coupling strengths <n|exp(ikx)|n'>")
    _common(p)
    _trap_arg(p)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--nmax", type=int, default=5, help="largest motional quantum number")

    p = sub.add_parser("scan", help="tracked dressed levels along a parameter axis")
    _common(p)
    _scan_args(p)
    p.add_argument("--branches", type=int, default=None, help="only emit the lowest B branches")

    p = sub.add_parser("crossings", help="avoided crossings found along a scan")
    _common(p)
    _scan_args(p)
    p.add_argument("--no-refine", action="store_true")
    p.add_argument("--threshold", type=float, default=1e-9, help="true-crossing gap threshold")
    p.add_argument("--max-gap", type=float, default=None)
    p.add_argument("--xtol", type=float, default=1e-8)

    p = sub.add_parser("resonances", help="enumerate Rabi resonances")
    _common(p)
    _trap_arg(p)
    p.add_argument("--nmax", type=int, default=3)
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--delta", type=float, default=0.0, help="detuning used to name sidebands")
    p.add_argument("--no-carriers", action="store_true")

    p = sub.add_parser("splitting", help="perturbative splitting of one resonance")
    _common(p)
    _trap_arg(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--nprime", type=int, required=True)
    _drive_args(p, rabi_default=None)
    p.add_argument("--threshold", type=float, default=0.1, help="isolation threshold")

    p = sub.add_parser("dynamics", help="population dynamics by spectral evolution")
    _common(p)
    _trap_arg(p)
    _drive_args(p)
    p.add_argument("--initial", required=True, help="initial state label, e.g. g,0 or 0,+")
    p.add_argument("--t-final", type=float, required=True)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--frame", choices=FRAMES, default="bare")
    p.add_argument("--nmax", type=int, default=40, help="number of motional levels kept")
    p.add_argument("--labels", default=None, help="labels to emit, separated by ';' (e.g. 'g,0;e,1')")
    p.add_argument("--min-population", type=float, default=1e-3)

    p = sub.add_parser("compare", help="harmonic vs hard-wall coupling comparison")
    _common(p)
    p.add_argument("--figure", choices=("ratios", "carrier"), required=True)
    p.add_argument("--eta", type=_float_list, required=True, help="comma-separated eta values")
    p.add_argument("--lmax", type=int, default=5)

    p = sub.add_parser("converge", help="truncation convergence of the lowest levels")
    _common(p)
    _trap_arg(p)
    _drive_args(p)
    p.add_argument("--N", type=_int_list, required=True, dest="n_list", help="comma-separated truncations")
    p.add_argument("--levels", type=int, default=10)
    p.add_argument("--tolerance", type=float, default=1e-10)
    return parser


def _label_str(ns: tuple[int, int]) -> str:
    return f"{ns[0]},{'+' if ns[1] > 0 else '-'}"


def _drive(args) -> DriveParams:
    return DriveParams(omega_r=args.omega_r, delta=args.delta, eta=args.eta)


def _cmd_couplings(args) -> tuple[list[dict], list[str], Any]:
    trap = TrapModel.from_name(args.trap)
    if not (math.isfinite(args.eta) and args.eta >= 0):
        raise DomainError(f"eta must be finite and >= 0, got {args.eta}")
    if args.nmax < trap.n_min:
        raise DomainError(f"--nmax must be >= {trap.n_min}")
    rows = []
    for n in range(trap.n_min, args.nmax + 1):
        for m in range(trap.n_min, args.nmax + 1):
            c = coupling_exact(trap, n, m, args.eta)
            try:
                lead = coupling_leading(trap, n, m, args.eta)
            except DomainError:
                lead = None
            rows.append(
                {
                    "n": n,
                    "n_prime": m,
                    "re": c.real,
                    "im": c.imag,
                    "abs": abs(c),
                    "leading_re": None if lead is None else lead.real,
                    "leading_im": None if lead is None else lead.imag,
                }
            )
    cols = ["n", "n_prime", "re", "im", "abs", "leading_re", "leading_im"]
    return rows, cols, {"trap": str(trap), "eta": args.eta, "couplings": rows}


def _track(args):
    trap = TrapModel.from_name(args.trap)
    angle = math.radians(args.angle) if args.angle is not None else None
    return scan(trap, _drive(args), args.axis, args.value_range, args.steps, args.nmax, angle=angle, workers=args.workers)


def _scan_meta(args, track) -> dict:
    return {
        "trap": str(track.trap),
        "axis": track.axis,
        "template": {"omega_r": track.template.omega_r, "delta": track.template.delta, "eta": track.template.eta},
        "n_trunc": track.n_trunc,
        "angle": track.angle,
    }


def _cmd_scan(args):
    track = _track(args)
    n_out = track.n_branches if args.branches is None else min(args.branches, track.n_branches)
    rows = [
        {"axis_value": float(x), "branch_id": b, "energy": float(track.energies[k, b]), "tail_weight": float(track.tail_weights[k, b])}
        for k, x in enumerate(track.grid)
        for b in range(n_out)
    ]
    payload = _scan_meta(args, track)
    payload["grid"] = [float(x) for x in track.grid]
    payload["branches"] = [
        {
            "branch_id": b,
            "start_label": _label_str(track.branch_labels[b][0]),
            "end_label": _label_str(track.branch_labels[b][1]),
            "energies": [float(e) for e in track.energies[:, b]],
            "tail_weights": [float(t) for t in track.tail_weights[:, b]],
        }
        for b in range(n_out)
    ]
    return rows, ["axis_value", "branch_id", "energy", "tail_weight"], payload


def _cmd_crossings(args):
    track = _track(args)
    crossings = find_avoided_crossings(
        track, refine=not args.no_refine, crossing_threshold=args.threshold, max_gap=args.max_gap, xtol=args.xtol
    )
    rows = []
    for c in crossings:
        (n, s), (n2, s2) = c.labels
        rows.append(
            {
                "n": n,
                "s": s,
                "n2": n2,
                "s2": s2,
                "param_star": c.param_star,
                "gap": c.gap,
                "predicted_general": None if c.predicted is None else c.predicted.general,
                "predicted_leading": None if c.predicted is None else c.predicted.leading,
                "is_true_crossing": c.is_true_crossing,
            }
        )
    cols = ["n", "s", "n2", "s2", "param_star", "gap", "predicted_general", "predicted_leading", "is_true_crossing"]
    payload = _scan_meta(args, track)
    payload["crossings"] = rows
    return rows, cols, payload


def _cmd_resonances(args):
    trap = TrapModel.from_name(args.trap)
    specs = enumerate_resonances(trap, args.nmax, args.kmax, include_carriers=not args.no_carriers)
    rows = [
        {"n": r.n, "n_prime": r.n_prime, "order": r.order, "radius": r.radius, "kind": r.kind(args.delta).value}
        for r in specs
    ]
    return rows, ["n", "n_prime", "order", "radius", "kind"], {"trap": str(trap), "resonances": rows}


def _cmd_splitting(args):
    trap = TrapModel.from_name(args.trap)
    spec = ResonanceSpec(trap, *sorted((args.n, args.nprime)))
    omega_r = args.omega_r
    if omega_r is None:
        # place the drive on the resonance circle at the given detuning
        r = spec.radius
        if abs(args.delta) > r:
            raise DomainError(f"|delta|={abs(args.delta)} exceeds the resonance radius {r}")
        omega_r = math.sqrt(r * r - args.delta * args.delta)
    drive = DriveParams(omega_r=omega_r, delta=args.delta, eta=args.eta)
    pred = perturbative_splitting_general(trap, args.n, args.nprime, drive)
    isolated, ratio = isolation_check(pred, trap, args.threshold)
    row = {
        "n": pred.n,
        "n_prime": pred.n_prime,
        "delta": drive.delta,
        "omega_r": drive.omega_r,
        "eta": drive.eta,
        "radius": spec.radius,
        "general": pred.general,
        "leading": pred.leading,
        "at_point": pred.at_point,
        "weakfield": weakfield_splitting(trap, args.n, args.nprime, drive),
        "isolation_ratio": ratio,
        "isolated": isolated,
    }
    return [row], list(row), dict(row, trap=str(trap))


def _cmd_dynamics(args):
    trap = TrapModel.from_name(args.trap)
    h = build_full_hamiltonian(trap, _drive(args), args.nmax)
    psi0 = initial_state(h, args.initial)
    trace = evolve(h, psi0, args.t_final, args.steps, frame=args.frame)
    if args.labels:
        labels = [x.strip() for x in args.labels.split(";") if x.strip()]
        for lab in labels:
            trace.population(lab)
    else:
        keep = trace.populations.max(axis=0) >= args.min_population
        labels = [lab for lab, k in zip(trace.labels, keep) if k]
    # labels carry commas ("g,0", "1,-"); drop them in CSV column names
    names = [f"{args.frame}:{lab.replace(',', '')}" for lab in labels]
    cols = ["time", "norm"] + names
    idx = [trace.labels.index(lab) for lab in labels]
    rows = []
    for k, t in enumerate(trace.times):
        row = {"time": float(t), "norm": float(trace.norm_history[k])}
        for name, j in zip(names, idx):
            row[name] = float(trace.populations[k, j])
        rows.append(row)
    freqs = {}
    for lab in labels:
        est = extract_frequency(trace, lab)
        freqs[lab] = {"frequency": est.frequency, "contrast": est.contrast, "oscillating": est.oscillating}
    payload = {
        "trap": str(trap),
        "frame": args.frame,
        "initial": args.initial,
        "drive": {"omega_r": args.omega_r, "delta": args.delta, "eta": args.eta},
        "n_trunc": args.nmax,
        "times": [float(t) for t in trace.times],
        "norm": [float(x) for x in trace.norm_history],
        "populations": {lab: [float(x) for x in trace.populations[:, j]] for lab, j in zip(labels, idx)},
        "frequencies": freqs,
        "max_norm_drift": trace.max_norm_drift(),
    }
    return rows, cols, payload


def _cmd_compare(args):
    if args.figure == "carrier":
        rows = [{"eta": r.eta, "harmonic": r.harmonic, "hardwall": r.hardwall} for r in report.carrier_comparison(args.eta)]
        cols = ["eta", "harmonic", "hardwall"]
    else:
        rows = [
            {"l": r.l, "eta": r.eta, "log10_ratio": r.log10_ratio, "log10_ratio_leading": r.log10_ratio_leading}
            for r in report.ratio_table(range(1, args.lmax + 1), args.eta)
        ]
        cols = ["l", "eta", "log10_ratio", "log10_ratio_leading"]
    return rows, cols, {"figure": args.figure, "rows": rows}


def _cmd_converge(args):
    trap = TrapModel.from_name(args.trap)
    rep = convergence_probe(trap, _drive(args), args.n_list, levels=args.levels, tolerance=args.tolerance)
    rows = [{"N": r.n_trunc, "N_next": r.next_n_trunc, "drift": r.drift, "recommended": r.n_trunc == rep.recommended} for r in rep.rows]
    payload = {"trap": str(trap), "levels": rep.levels, "tolerance": rep.tolerance, "recommended": rep.recommended, "rows": rows}
    return rows, ["N", "N_next", "drift", "recommended"], payload


COMMANDS = {
    "couplings": _cmd_couplings,
    "scan": _cmd_scan,
    "crossings": _cmd_crossings,
    "resonances": _cmd_resonances,
    "splitting": _cmd_splitting,
    "dynamics": _cmd_dynamics,
    "compare": _cmd_compare,
    "converge": _cmd_converge,
}


def _normalize_argv(argv: Sequence[str]) -> list[str]:
    """Glue ``--range -a:b`` into ``--range=-a:b`` so argparse accepts it."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok == "--range":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--range={nxt}")
        else:
            out.append(tok)
    return out


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_normalize_argv(argv))
    except _UsageError as exc:
        print(f"rabires: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    logging.basicConfig(
        level=logging.ERROR if args.quiet else logging.INFO,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )
    try:
        rows, cols, payload = COMMANDS[args.command](args)
    except DomainError as exc:
        print(f"rabires: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"rabires: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    text = report.to_csv(rows, cols) if args.format == "csv" else report.to_json(payload)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main() -> None:
    raise SystemExit(run())
