"""Command-line interface.

Subcommands: ``sweep`` (produce a phase diagram), ``ground`` (ground energy
and degeneracy), ``eigenphase`` (step-unitary diagnostics at fixed delta),
``convert`` (FCIDUMP to operator JSON).  Exit codes: 0 success, 1 usage
error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .errors import QaoalabError
from .fcidump import parse_fcidump
from .jordan_wigner import jordan_wigner
from .problems import (
    ProblemInstance,
    build_chemistry_problem,
    build_ising_problem,
    build_sat_problem,
    ising_from_json,
    parse_dimacs,
    random_3sat,
    random_ising,
)
from .eigenphase import step_unitary_eigenphases
from .evolve import instance_ground_manifold
from .schedules import DEFAULT_TANGENT_C
from .sweep import GridSpec, export_csv, export_json, run_sweep

THREADS_ENV_VAR = "QAOALAB_THREADS"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems with exit status 1."""

    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="qaoalab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run a (delta, p) phase-diagram sweep")
    _add_problem_flags(sweep)
    sweep.add_argument("--schedule", choices=("linear", "root", "tangent"),
                       default="linear")
    sweep.add_argument("--tangent-c", type=float, default=DEFAULT_TANGENT_C,
                       help="shape parameter of the tangent schedule")
    sweep.add_argument("--delta-grid", default="0.01,6,60",
                       help="lo,hi,count[,log] for the delta axis")
    sweep.add_argument("--p-grid", default="1,100",
                       help="lo,hi[,stride] for the p axis")
    sweep.add_argument("--out", required=True, help="output path")
    sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    sweep.add_argument("--threads", type=int, default=None,
                       help=f"worker threads (default ${THREADS_ENV_VAR} or 1)")

    ground = sub.add_parser("ground", help="report ground energy and degeneracy")
    _add_problem_flags(ground)

    eigen = sub.add_parser("eigenphase", help="step-unitary eigenphase diagnostics")
    _add_problem_flags(eigen)
    eigen.add_argument("--delta", type=float, required=True)
    eigen.add_argument("--f-points", type=int, default=101)
    eigen.add_argument("--schedule", choices=("linear", "root", "tangent"),
                       default="linear")
    eigen.add_argument("--tangent-c", type=float, default=DEFAULT_TANGENT_C)
    eigen.add_argument("--out", default=None, help="optional JSON output path")

    convert = sub.add_parser("convert", help="FCIDUMP to operator JSON")
    convert.add_argument("--fcidump", required=True)
    convert.add_argument("--ordering", choices=("interleaved", "blocked"),
                         default="interleaved")
    convert.add_argument("--out", required=True)
    return parser


def _add_problem_flags(sub: argparse.ArgumentParser):
    sub.add_argument("--problem", choices=("chem", "sat", "ising"), required=True)
    sub.add_argument("--fcidump", help="FCIDUMP path (chem)")
    sub.add_argument("--dimacs", help="DIMACS CNF path (sat)")
    sub.add_argument("--ising", help="Ising JSON path (ising)")
    sub.add_argument("--random-sat", metavar="N,M,SEED",
                     help="generate random 3-SAT with n vars, m clauses")
    sub.add_argument("--random-ising", metavar="N,SEED",
                     help="generate a random fully connected Ising instance")
    sub.add_argument("--mixer", choices=("hf", "x", "xy"), default=None,
                     help="default: hf for chem, x otherwise")
    sub.add_argument("--mixer-mode", choices=("diag_of_cost", "fock_orbital"),
                     default="diag_of_cost",
                     help="diagonal used by the hf mixer")
    sub.add_argument("--initial", choices=("hf", "uniform", "dicke"), default=None,
                     help="default: hf for chem, uniform otherwise")
    sub.add_argument("--dicke-n", type=int, default=None,
                     help="particle count for a dicke initial state")
    sub.add_argument("--ordering", choices=("interleaved", "blocked"),
                     default="interleaved")
    sub.add_argument("--full-space", action="store_true",
                     help="allow sector-breaking mixers on chemistry problems")


def _parse_int_tuple(text: str, count: int, flag: str) -> tuple[int, ...]:
    parts = text.split(",")
    if len(parts) != count:
        raise _UsageError(f"{flag} expects {count} comma-separated integers, got {text!r}")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise _UsageError(f"{flag} has a non-integer field in {text!r}") from None


def _parse_delta_grid(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) not in (3, 4):
        raise _UsageError(f"--delta-grid expects lo,hi,count[,log], got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError:
        raise _UsageError(f"--delta-grid has a malformed field in {text!r}") from None
    if len(parts) == 4:
        if parts[3] != "log":
            raise _UsageError(f"--delta-grid fourth field must be 'log', got {parts[3]!r}")
        return np.geomspace(lo, hi, count)
    return np.linspace(lo, hi, count)


def _parse_p_grid(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) not in (2, 3):
        raise _UsageError(f"--p-grid expects lo,hi[,stride], got {text!r}")
    try:
        lo, hi = int(parts[0]), int(parts[1])
        stride = int(parts[2]) if len(parts) == 3 else 1
    except ValueError:
        raise _UsageError(f"--p-grid has a non-integer field in {text!r}") from None
    if stride < 1:
        raise _UsageError("--p-grid stride must be >= 1")
    return np.arange(lo, hi + 1, stride, dtype=np.int64)


def _build_instance(args) -> ProblemInstance:
    if args.problem == "chem":
        if not args.fcidump:
            raise _UsageError("--problem chem requires --fcidump")
        mixer = args.mixer or "hf"
        initial = args.initial or "hf"
        if mixer == "x" and not args.full_space:
            raise _UsageError(
                "--mixer x breaks the particle-number sector on chemistry "
                "problems; pass --full-space to allow it"
            )
        if initial == "uniform" and not args.full_space:
            raise _UsageError(
                "--initial uniform leaves the chemistry sector; pass --full-space"
            )
        with open(args.fcidump) as handle:
            mol = parse_fcidump(handle)
        return build_chemistry_problem(
            mol, mixer_mode=args.mixer_mode, mixer_kind=mixer,
            initial_kind=initial, ordering=args.ordering,
            label=Path(args.fcidump).stem,
        )

    if args.problem == "sat":
        if args.dimacs:
            with open(args.dimacs) as handle:
                formula = parse_dimacs(handle)
            label = Path(args.dimacs).stem
        elif args.random_sat:
            n, m, seed = _parse_int_tuple(args.random_sat, 3, "--random-sat")
            formula = random_3sat(n, m, seed)
            label = f"3sat_n{n}_m{m}_seed{seed}"
        else:
            raise _UsageError("--problem sat requires --dimacs or --random-sat")
        instance = build_sat_problem(formula, seed_label=label)
    elif args.problem == "ising":
        if args.ising:
            model = ising_from_json(Path(args.ising).read_text())
            label = Path(args.ising).stem
        elif args.random_ising:
            n, seed = _parse_int_tuple(args.random_ising, 2, "--random-ising")
            model = random_ising(n, seed)
            label = f"ising_n{n}_seed{seed}"
        else:
            raise _UsageError("--problem ising requires --ising or --random-ising")
        instance = build_ising_problem(model, label=label)
    else:  # pragma: no cover - argparse restricts choices
        raise _UsageError(f"unknown problem {args.problem!r}")

    return _apply_overrides(instance, args)


def _apply_overrides(instance: ProblemInstance, args) -> ProblemInstance:
    """Mixer/initial overrides for the combinatorial problems."""
    from dataclasses import replace

    from .problems import MixerSpec, xy_mixer
    from .statevector import StateVector

    mixer = args.mixer
    initial = args.initial
    changed = {}
    if mixer == "xy":
        changed["mixer"] = MixerSpec(kind="xy", pauli=xy_mixer(instance.n_qubits))
    elif mixer == "hf" and args.problem != "chem":
        raise _UsageError("--mixer hf is only defined for chemistry problems")
    if initial == "dicke":
        n_particles = args.dicke_n
        if n_particles is None:
            raise _UsageError("--initial dicke needs --dicke-n for this problem")
        changed["initial"] = StateVector.dicke(instance.n_qubits, n_particles)
        if mixer == "xy":
            changed["symmetry_sector"] = (n_particles, None)
    elif initial == "hf" and args.problem != "chem":
        raise _UsageError("--initial hf is only defined for chemistry problems")
    if changed:
        instance = replace(instance, **changed)
    return instance


def _default_threads(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(THREADS_ENV_VAR, "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _cmd_sweep(args) -> int:
    instance = _build_instance(args)
    grid = GridSpec(
        delta_values=_parse_delta_grid(args.delta_grid),
        p_values=_parse_p_grid(args.p_grid),
        kind=args.schedule,
        tangent_c=args.tangent_c,
    )
    diagram = run_sweep(instance, grid, threads=_default_threads(args.threads))
    out = Path(args.out)
    if args.format == "csv":
        export_csv(diagram, out)
    else:
        export_json(diagram, out)
    failed = len(diagram.failed_cells)
    print(f"wrote {out} ({grid.delta_values.size}x{grid.p_values.size} cells"
          + (f", {failed} failed" if failed else "") + ")")
    return 0


def _cmd_ground(args) -> int:
    instance = _build_instance(args)
    manifold = instance_ground_manifold(instance)
    print(f"instance: {instance.label}")
    print(f"ground energy: {manifold.energy:.12g}")
    print(f"degeneracy: {manifold.degeneracy}")
    if instance.symmetry_sector is not None:
        print(f"sector: n={instance.symmetry_sector[0]}, "
              f"2Sz={instance.symmetry_sector[1]}")
    return 0


def _cmd_eigenphase(args) -> int:
    instance = _build_instance(args)
    track = step_unitary_eigenphases(
        instance, args.delta, np.linspace(0.0, 1.0, args.f_points),
        kind=args.schedule, tangent_c=args.tangent_c,
    )
    print(f"delta={args.delta}: {track.n_tracks} tracks, "
          f"{track.n_wrap_events} wrap events, "
          f"terminal ground overlap {track.terminal_ground_overlap:.6f}")
    if args.out:
        payload = {
            "delta": track.delta,
            "f_grid": track.f_grid.tolist(),
            "sorted_phases": track.sorted_phases.tolist(),
            "track_phases": track.track_phases.tolist(),
            "wrap_events": [[f, t] for f, t in track.wrap_events],
            "ambiguities": [[f, t] for f, t in track.ambiguities],
            "followed_track": track.followed_track,
            "terminal_cost_state": track.terminal_cost_state,
            "terminal_ground_overlap": track.terminal_ground_overlap,
        }
        Path(args.out).write_text(json.dumps(payload, indent=2))
        print(f"wrote {args.out}")
    return 0


def _cmd_convert(args) -> int:
    with open(args.fcidump) as handle:
        mol = parse_fcidump(handle)
    h = jordan_wigner(mol, ordering=args.ordering)
    Path(args.out).write_text(h.to_json())
    print(f"wrote {args.out} ({h.n_terms} terms on {h.n_qubits} qubits)")
    return 0


_COMMANDS = {
    "sweep": _cmd_sweep,
    "ground": _cmd_ground,
    "eigenphase": _cmd_eigenphase,
    "convert": _cmd_convert,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except QaoalabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
