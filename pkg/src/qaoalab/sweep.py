"""Phase-diagram production over a (delta, p) grid, plus persistence.

Grid cells are independent: each runs the full protocol at its (delta, p)
and records the squared overlap with the precomputed ground manifold.
Results land in preallocated slots, so the output is deterministic and
independent of thread count and execution order.  Individual cell failures
are recorded and skipped; the sweep only aborts when more than 5% of cells
fail.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, QaoalabError, SweepError, ValidationError
from .evolve import QaoaEvolver, instance_ground_manifold, squared_overlap
from .kernel import GroundManifold
from .problems import ProblemInstance
from .schedules import DEFAULT_TANGENT_C, SCHEDULE_KINDS, Schedule

TOOL_VERSION = "qaoalab 0.1.0"
FAILED_CELL_FRACTION_LIMIT = 0.05
_CSV_HEADER_PREFIX = "delta\\p"


def default_delta_grid() -> np.ndarray:
    return np.linspace(0.01, 6.0, 60)


def default_p_grid() -> np.ndarray:
    return np.arange(1, 101, dtype=np.int64)


@dataclass(frozen=True)
class GridSpec:
    """The (delta, p) grid and the schedule family swept over it."""

    delta_values: np.ndarray = field(default_factory=default_delta_grid)
    p_values: np.ndarray = field(default_factory=default_p_grid)
    kind: str = "linear"
    tangent_c: float = DEFAULT_TANGENT_C

    def __post_init__(self):
        deltas = np.asarray(self.delta_values, dtype=np.float64)
        ps = np.asarray(self.p_values, dtype=np.int64)
        deltas.setflags(write=False)
        ps.setflags(write=False)
        object.__setattr__(self, "delta_values", deltas)
        object.__setattr__(self, "p_values", ps)
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if deltas.size == 0 or ps.size == 0:
            raise ValueError("grid axes must be non-empty")
        if np.any(deltas <= 0) or np.any(np.diff(deltas) <= 0):
            raise ValidationError("delta grid must be strictly increasing and positive")
        if np.any(ps < 1) or np.any(np.diff(ps) <= 0):
            raise ValidationError("p grid must be strictly increasing integers >= 1")

    def schedule(self, delta: float, p: int) -> Schedule:
        return Schedule(kind=self.kind, delta=float(delta), p=int(p),
                        tangent_c=self.tangent_c)


@dataclass(frozen=True)
class PhaseDiagram:
    """Squared-overlap matrix indexed by (delta index, p index)."""

    overlaps: np.ndarray
    initial_overlap: float
    grid: GridSpec
    provenance: dict = field(default_factory=dict, compare=False)
    failed_cells: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        overlaps = np.asarray(self.overlaps, dtype=np.float64)
        overlaps.setflags(write=False)
        object.__setattr__(self, "overlaps", overlaps)
        expected = (self.grid.delta_values.size, self.grid.p_values.size)
        if overlaps.shape != expected:
            raise ValidationError(f"overlap matrix shape {overlaps.shape} != {expected}")
        finite = overlaps[np.isfinite(overlaps)]
        if finite.size and (finite.min() < -1e-9 or finite.max() > 1.0 + 1e-9):
            raise ValidationError("overlaps must lie in [0, 1] within tolerance")

    def cell(self, delta_index: int, p_index: int) -> float:
        return float(self.overlaps[delta_index, p_index])


def run_sweep(
    instance: ProblemInstance,
    grid: GridSpec | None = None,
    threads: int | None = None,
    manifold: GroundManifold | None = None,
    use_sector: bool = False,
) -> PhaseDiagram:
    """Evaluate the protocol at every grid cell against the ground manifold."""
    grid = grid if grid is not None else GridSpec()
    started = time.perf_counter()
    if manifold is None:
        manifold = instance_ground_manifold(instance)
    evolver = QaoaEvolver(instance, use_sector=use_sector)

    initial_overlap = squared_overlap(instance.initial, manifold)
    n_delta, n_p = grid.delta_values.size, grid.p_values.size
    overlaps = np.full((n_delta, n_p), np.nan)
    failures: dict[tuple[int, int], str] = {}

    def run_cell(cell: tuple[int, int]):
        i, j = cell
        schedule = grid.schedule(grid.delta_values[i], int(grid.p_values[j]))
        state = evolver.evolve(schedule)
        return i, j, squared_overlap(state, manifold)

    cells = [(i, j) for i in range(n_delta) for j in range(n_p)]
    if threads is None or threads <= 1:
        for cell in cells:
            try:
                outcome = run_cell(cell)
            except QaoalabError as exc:
                outcome = exc
            _record(outcome, cell, overlaps, failures)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {cell: pool.submit(run_cell, cell) for cell in cells}
            for cell, future in futures.items():
                try:
                    outcome = future.result()
                except QaoalabError as exc:
                    outcome = exc
                _record(outcome, cell, overlaps, failures)

    if len(failures) > FAILED_CELL_FRACTION_LIMIT * len(cells):
        raise SweepError(
            f"{len(failures)} of {len(cells)} cells failed "
            f"(> {FAILED_CELL_FRACTION_LIMIT:.0%}); first errors: "
            + "; ".join(list(failures.values())[:3])
        )

    provenance = {
        "instance": instance.label,
        "schedule_kind": grid.kind,
        "tangent_c": grid.tangent_c if grid.kind == "tangent" else None,
        "tool_version": TOOL_VERSION,
        "elapsed_seconds": time.perf_counter() - started,
        "ground_energy": manifold.energy,
        "ground_degeneracy": manifold.degeneracy,
        "total_time_convention": "T = delta * (p + 1)",
    }
    return PhaseDiagram(
        overlaps=overlaps, initial_overlap=initial_overlap, grid=grid,
        provenance=provenance, failed_cells=failures,
    )


def _record(outcome, cell, overlaps, failures):
    if isinstance(outcome, QaoalabError):
        failures[cell] = str(outcome)
        return
    i, j, value = outcome
    overlaps[i, j] = value


# -- critical delta ---------------------------------------------------------------


def delta_crit(
    pd: PhaseDiagram,
    rule: str = "first_drop_below_initial",
    threshold: float | None = None,
) -> list[float | None]:
    """Per-p critical delta: the last grid delta still at or above threshold.

    ``first_drop_below_initial`` uses the diagram's initial overlap as the
    threshold; ``first_drop_below`` uses the explicit ``threshold``.  For a
    column whose first cell is already below, or that never drops, the entry
    is None.  Failed (NaN) cells are skipped when scanning.
    """
    if rule == "first_drop_below_initial":
        cutoff = pd.initial_overlap
    elif rule == "first_drop_below":
        if threshold is None:
            raise ValueError("rule 'first_drop_below' needs a threshold")
        cutoff = threshold
    else:
        raise ValueError(f"unknown rule {rule!r}")

    result: list[float | None] = []
    for j in range(pd.grid.p_values.size):
        column = pd.overlaps[:, j]
        crit: float | None = None
        last_above: float | None = None
        for i, value in enumerate(column):
            if not np.isfinite(value):
                continue
            if value < cutoff:
                crit = last_above
                break
            last_above = float(pd.grid.delta_values[i])
        result.append(crit)
    return result


# -- persistence --------------------------------------------------------------------


def _format_overlap(value: float) -> str:
    if not np.isfinite(value):
        return "nan"
    return format(value, ".12g")


def export_csv(pd: PhaseDiagram, path: str | Path, sidecar: bool = True) -> Path:
    """Write the overlap grid as CSV plus a JSON sidecar with the metadata.

    Layout: header ``delta\\p,p1,p2,...`` then one row per delta with
    overlaps at 12 significant digits.  The sidecar lands at ``<path>.json``.
    """
    path = Path(path)
    lines = [",".join([_CSV_HEADER_PREFIX] + [str(int(p)) for p in pd.grid.p_values])]
    for i, delta in enumerate(pd.grid.delta_values):
        entries = [_format_overlap(v) for v in pd.overlaps[i]]
        lines.append(",".join([format(float(delta), ".12g")] + entries))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    if sidecar:
        sidecar_path = path.with_name(path.name + ".json")
        sidecar_path.write_text(_metadata_json(pd), encoding="ascii")
    return path


def _metadata_json(pd: PhaseDiagram) -> str:
    return json.dumps({
        "initial_overlap": pd.initial_overlap,
        "schedule": {"kind": pd.grid.kind, "tangent_c": pd.grid.tangent_c},
        "provenance": pd.provenance,
        "failed_cells": {f"{i},{j}": msg for (i, j), msg in pd.failed_cells.items()},
    }, indent=2, sort_keys=True)


def export_json(pd: PhaseDiagram, path: str | Path) -> Path:
    path = Path(path)
    data = {
        "delta_values": [format(float(d), ".12g") for d in pd.grid.delta_values],
        "p_values": [int(p) for p in pd.grid.p_values],
        "schedule": {"kind": pd.grid.kind, "tangent_c": pd.grid.tangent_c},
        "initial_overlap": pd.initial_overlap,
        "overlaps": [[_format_overlap(v) for v in row] for row in pd.overlaps],
        "provenance": pd.provenance,
        "failed_cells": {f"{i},{j}": msg for (i, j), msg in pd.failed_cells.items()},
    }
    path.write_text(json.dumps(data, indent=2), encoding="ascii")
    return path


def _parse_float(token: str, line_no: int, path: Path) -> float:
    try:
        return float(token)
    except ValueError:
        raise FormatError(
            f"{path}: non-numeric entry {token!r}", line=line_no
        ) from None


def import_csv(path: str | Path) -> PhaseDiagram:
    """Read a diagram back; values reproduce the decimal text bit for bit."""
    path = Path(path)
    lines = path.read_text(encoding="ascii").splitlines()
    if not lines:
        raise FormatError(f"{path}: empty CSV")
    header = lines[0].split(",")
    if header[0] != _CSV_HEADER_PREFIX:
        raise FormatError(f"{path}: header must start with {_CSV_HEADER_PREFIX!r}")
    try:
        p_values = np.array([int(tok) for tok in header[1:]], dtype=np.int64)
    except ValueError:
        raise FormatError(f"{path}: non-integer p in header") from None

    deltas: list[float] = []
    rows: list[list[float]] = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        tokens = line.split(",")
        if len(tokens) != p_values.size + 1:
            raise FormatError(
                f"{path}: expected {p_values.size + 1} fields, got {len(tokens)}",
                line=line_no,
            )
        deltas.append(_parse_float(tokens[0], line_no, path))
        rows.append([_parse_float(tok, line_no, path) for tok in tokens[1:]])

    sidecar_path = path.with_name(path.name + ".json")
    initial_overlap = math.nan
    provenance: dict = {}
    kind = "linear"
    tangent_c = DEFAULT_TANGENT_C
    if sidecar_path.exists():
        meta = json.loads(sidecar_path.read_text(encoding="ascii"))
        initial_overlap = float(meta.get("initial_overlap", math.nan))
        provenance = meta.get("provenance", {})
        kind = meta.get("schedule", {}).get("kind", "linear")
        tangent_c = float(meta.get("schedule", {}).get("tangent_c", DEFAULT_TANGENT_C))

    grid = GridSpec(
        delta_values=np.array(deltas), p_values=p_values,
        kind=kind, tangent_c=tangent_c,
    )
    return PhaseDiagram(
        overlaps=np.array(rows), initial_overlap=initial_overlap, grid=grid,
        provenance=provenance,
    )


def import_json(path: str | Path) -> PhaseDiagram:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="ascii"))
        grid = GridSpec(
            delta_values=np.array([float(d) for d in data["delta_values"]]),
            p_values=np.array(data["p_values"], dtype=np.int64),
            kind=data["schedule"]["kind"],
            tangent_c=float(data["schedule"].get("tangent_c", DEFAULT_TANGENT_C)),
        )
        overlaps = np.array([[float(v) for v in row] for row in data["overlaps"]])
        failed = {
            tuple(int(t) for t in key.split(",")): msg
            for key, msg in data.get("failed_cells", {}).items()
        }
        return PhaseDiagram(
            overlaps=overlaps,
            initial_overlap=float(data["initial_overlap"]),
            grid=grid,
            provenance=data.get("provenance", {}),
            failed_cells=failed,
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: invalid diagram JSON: {exc}") from exc
