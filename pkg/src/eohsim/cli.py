"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical/solver
failure, 3 input-file error.
"""

from __future__ import annotations

import argparse
import io
import json
import sys

import numpy as np

from . import dsl
from .constants import MATERIALS, V_PER_CM, ConfigurationError, material_params
from .decoherence import DEFAULT_T2_MS, report as decoherence_report
from .dynamics import basis_state
from .experiment import resolve_ramp, run_experiment
from .qubit import build_qubit
from .readout import NoDiscriminationWindow, Readout, histogram, write_shots_csv
from .stark import Grid, SolverError, stark_sweep, write_sweep_csv

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_INPUT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InputFileError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--material", default=None, metavar="NAME",
                   help=f"helium isotope, one of {', '.join(MATERIALS)} (default he3; for run, the file header)")
    g.add_argument("--format", choices=("csv", "json"), default=None, help="output format")
    g.add_argument("--out", default=None, metavar="PATH", help="write output here instead of stdout")
    g.add_argument("--seed", type=int, default=None, help="readout RNG seed (default 0)")
    g.add_argument("--workers", type=int, default=1, help="worker threads for sweeps and shots (default 1)")
    return p


def _grid_args(p):
    p.add_argument("--z-max", type=float, default=None, help="grid length in nm (default 300)")
    p.add_argument("--n-points", type=int, default=None, help="grid points (default 6000)")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="eohsim", description="Electrons-on-helium qubit simulator.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("solve", parents=[common], help="bound levels and qubit parameters at one field")
    p.add_argument("--field", type=float, default=0.0, help="pressing field in V/cm (default 0)")
    _grid_args(p)

    p = sub.add_parser("sweep", parents=[common], help="Stark sweep of the two lowest levels")
    p.add_argument("--fmin", type=float, default=0.0, help="first field, V/cm (default 0)")
    p.add_argument("--fmax", type=float, default=200.0, help="last field, V/cm (default 200)")
    p.add_argument("--steps", type=int, default=10, help="number of fields, endpoints included (default 10)")
    _grid_args(p)

    p = sub.add_parser("run", parents=[common], help="execute an .eoh experiment file")
    p.add_argument("file", help="experiment description (.eoh)")
    p.add_argument("--shots", type=int, default=None, help="readout shots (overrides the readout statement)")
    p.add_argument("--open", action="store_true", help="open-system evolution with T1 and T2")
    p.add_argument("--t1-us", type=float, default=None, help="T1 in us for --open (default: ripplon estimate)")
    p.add_argument("--efficiency", type=float, default=1.0, help="stage-2 detector efficiency (default 1)")

    p = sub.add_parser("readout", parents=[common], help="tunneling readout of a basis-state superposition")
    p.add_argument("--state", required=True,
                   help="bitstring, or comma-separated bitstrings for their equal superposition")
    p.add_argument("--fpeak", default="auto", help="ramp peak in V/cm, or 'auto' (default)")
    p.add_argument("--duration", type=float, default=1.0, help="ramp duration in ns (default 1)")
    p.add_argument("--shots", type=int, default=1000, help="number of shots (default 1000)")
    p.add_argument("--efficiency", type=float, default=1.0, help="stage-2 detector efficiency (default 1)")

    p = sub.add_parser("decoherence", parents=[common], help="relaxation, field scales and operation budget")
    p.add_argument("--temperature", type=float, default=0.01, help="K (default 0.01)")
    p.add_argument("--B", type=float, default=1.5, help="magnetic field in T (default 1.5)")
    p.add_argument("--pitch", type=float, default=500.0, help="electron separation in nm (default 500)")
    p.add_argument("--t2", type=float, default=DEFAULT_T2_MS, help="T2 in ms (default 100)")
    p.add_argument("--top", type=float, default=1.0, help="single-operation time in ns (default 1)")
    p.add_argument("--delta-nu", type=float, default=None,
                   help="transition frequency in GHz (default: solved at zero field)")
    return parser


def _material(args, default="he3"):
    try:
        return material_params(args.material or default)
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from None


def _format(args, allowed, default):
    fmt = args.format or default
    if fmt not in allowed:
        raise UsageError(f"{args.command} supports --format {'|'.join(allowed)}")
    return fmt


def _grid(args):
    if args.z_max is None and args.n_points is None:
        return None
    base = Grid()
    try:
        return Grid(args.z_max or base.z_max, args.n_points or base.n_points)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _dump_json(obj, out):
    json.dump(obj, out, indent=2, sort_keys=True)
    out.write("\n")


def cmd_solve(args, out):
    material = _material(args)
    fmt = _format(args, ("csv", "json"), "csv")
    F = args.field * V_PER_CM
    grid = _grid(args)
    (row,) = stark_sweep(material, [F], grid)
    if fmt == "csv":
        write_sweep_csv([row], out)
        return
    q = build_qubit(material, F, grid)
    _dump_json({"material": material.name, "F_V_per_nm": row.F, "E1_meV": row.E1, "E2_meV": row.E2,
                "nu01_GHz": row.nu01, "z01_nm": row.z01, "z00_nm": q.z00, "z11_nm": q.z11,
                "rydberg_meV": material.rydberg, "bohr_radius_nm": material.bohr_radius}, out)


def cmd_sweep(args, out):
    material = _material(args)
    fmt = _format(args, ("csv", "json"), "csv")
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    if args.fmin < 0 or args.fmax < 0:
        raise UsageError("sweep fields must be >= 0 (pressing)")
    fields = np.linspace(args.fmin, args.fmax, args.steps) * V_PER_CM
    rows = stark_sweep(material, fields.tolist(), _grid(args), args.workers)
    if fmt == "csv":
        write_sweep_csv(rows, out)
    else:
        _dump_json([row._asdict() for row in rows], out)


def cmd_run(args, out):
    fmt = _format(args, ("json",), "json")
    try:
        with open(args.file, encoding="utf-8") as fh:
            source = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise InputFileError(f"cannot read {args.file}: {exc}") from None
    material = _material(args) if args.material else None
    try:
        report, _, _ = run_experiment(source, shots=args.shots, seed=args.seed, material=material,
                                      open_system=args.open, t1_us=args.t1_us,
                                      efficiency=args.efficiency, workers=args.workers)
    except dsl.DSLError as exc:
        raise InputFileError(str(exc)) from None
    report["file"] = args.file
    _dump_json(report, out)


def _superposition(spec: str):
    bits = [b.strip() for b in spec.split(",")]
    if not bits or any(not b or set(b) - {"0", "1"} for b in bits) or len({len(b) for b in bits}) != 1:
        raise UsageError("--state needs bitstrings of equal length, e.g. 01 or 01,10")
    if len(set(bits)) != len(bits):
        raise UsageError("--state lists a bitstring twice")
    psi = sum(basis_state(b) for b in bits)
    return psi / np.linalg.norm(psi), len(bits[0])


def cmd_readout(args, out):
    material = _material(args)
    fmt = _format(args, ("csv", "json"), "json")
    state, n = _superposition(args.state)
    if args.shots < 0:
        raise UsageError("--shots must be >= 0")
    if args.fpeak == "auto":
        fpeak = None
    else:
        try:
            fpeak = float(args.fpeak)
        except ValueError:
            raise UsageError("--fpeak must be a number in V/cm or 'auto'") from None
    try:
        ramp = resolve_ramp(material, fpeak, args.duration)
        reader = Readout(material, ramp, args.efficiency)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ids = [f"q{k}" for k in range(n)]
    seed = 0 if args.seed is None else args.seed
    results = reader.run(state, ids, seed, args.shots, args.workers)
    if fmt == "csv":
        write_shots_csv(results, out)
        return
    _dump_json({"material": material.name, "qubits": ids, "state": args.state, "seed": seed,
                "shots": args.shots, "F_peak_V_per_cm": ramp.F_peak / V_PER_CM, "duration_ns": ramp.duration,
                "p_escape": {"0": reader.p_escape[0], "1": reader.p_escape[1]},
                "misregistration": reader.misregistration(), "bits": histogram(results)}, out)


def cmd_decoherence(args, out):
    material = _material(args)
    _format(args, ("json",), "json")
    if min(args.temperature, args.B, args.pitch, args.t2, args.top) <= 0:
        raise UsageError("temperature, B, pitch, t2 and top must be positive")
    nu = args.delta_nu
    if nu is None:
        q = build_qubit(material, 0.0)
        nu = q.omega01 / (2 * np.pi) * 1e3
    rep = decoherence_report(material, args.temperature, args.B, args.pitch, nu, args.t2, args.top)
    rep.update({"material": material.name, "delta_nu_GHz": nu})
    _dump_json(rep, out)


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "run": cmd_run,
            "readout": cmd_readout, "decoherence": cmd_decoherence}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.workers < 1:
        print("eohsim: error: --workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    buf = io.StringIO()
    try:
        COMMANDS[args.command](args, buf)
    except UsageError as exc:
        print(f"eohsim {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputFileError as exc:
        print(f"eohsim {args.command}: input error:\n{exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverError, NoDiscriminationWindow, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"eohsim {args.command}: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigurationError, ValueError) as exc:
        # schedule-level problems that survive parsing (bad T1/T2 pairing, ...)
        print(f"eohsim {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT if args.command == "run" else EXIT_USAGE
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
        except OSError as exc:
            print(f"eohsim: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
