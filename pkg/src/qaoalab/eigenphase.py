"""Eigenphase tracking of the one-step protocol unitary across the ramp.

For each schedule fraction f the dense step unitary

    U(f) = exp(-i delta (1 - F(f)) H_B) exp(-i delta F(f) H_C)

is eigendecomposed.  Eigenvectors are matched between adjacent f points by
greedy maximal overlap to form continuous tracks, each track's phase is
unwrapped with minimal branch jumps, and a wrap event is recorded whenever
an unwrapped phase crosses an odd multiple of pi (the branch cut of the
principal phase).  The track that starts closest to the mixer ground state
is followed to the end of the ramp and its terminal identity reported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ValidationError
from .evolve import mixer_operator
from .pauli import DiagonalOperator, PauliSum
from .problems import ProblemInstance
from .schedules import DEFAULT_TANGENT_C, warp_function

DENSE_UNITARY_LIMIT = 10
AMBIGUITY_TOL = 1e-6


@dataclass(frozen=True)
class EigenphaseTrack:
    """Continuity-resolved eigenphases of the step unitary along f."""

    f_grid: np.ndarray
    sorted_phases: np.ndarray       # (n_f, dim), each row sorted, in (-pi, pi]
    track_phases: np.ndarray        # (n_f, dim), wrapped, column = one track
    track_unwrapped: np.ndarray     # (n_f, dim), continuous in f
    wrap_events: tuple[tuple[float, int], ...]
    ambiguities: tuple[tuple[float, int], ...]
    followed_track: int
    terminal_cost_state: int
    terminal_ground_overlap: float
    delta: float

    @property
    def n_tracks(self) -> int:
        return self.track_phases.shape[1]

    @property
    def n_wrap_events(self) -> int:
        return len(self.wrap_events)


def _dense_operator(op: PauliSum | DiagonalOperator, n_qubits: int) -> np.ndarray:
    if isinstance(op, DiagonalOperator):
        if op.sector_indices is not None:
            raise ValidationError("eigenphase diagnostics need full-mode operators")
        return np.diag(op.values.astype(np.complex128))
    return op.to_dense(dense_limit=n_qubits)


def _greedy_match(prev_vecs: np.ndarray, new_vecs: np.ndarray
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Permutation of new columns maximizing overlap with previous tracks.

    Greedy on descending |<prev_r|new_c>|; returns (permutation, ambiguous
    rows) where row r is ambiguous when its two best overlaps are within
    the ambiguity tolerance.
    """
    overlap = np.abs(prev_vecs.conj().T @ new_vecs)
    dim = overlap.shape[0]
    order = np.argsort(overlap, axis=None)[::-1]
    rows_taken = np.zeros(dim, dtype=bool)
    cols_taken = np.zeros(dim, dtype=bool)
    perm = np.full(dim, -1, dtype=np.int64)
    assigned = 0
    for flat in order:
        r, c = divmod(int(flat), dim)
        if rows_taken[r] or cols_taken[c]:
            continue
        perm[r] = c
        rows_taken[r] = True
        cols_taken[c] = True
        assigned += 1
        if assigned == dim:
            break
    top_two = np.partition(overlap, dim - 2, axis=1)[:, dim - 2:]
    ambiguous = np.nonzero(top_two[:, 1] - top_two[:, 0] < AMBIGUITY_TOL)[0]
    return perm, ambiguous


def _wrap_to_pi(theta: np.ndarray) -> np.ndarray:
    """Map angles to (-pi, pi]."""
    wrapped = np.mod(theta + np.pi, 2.0 * np.pi) - np.pi
    wrapped[wrapped == -np.pi] = np.pi
    return wrapped


def step_unitary_eigenphases(
    instance: ProblemInstance,
    delta: float,
    f_grid: np.ndarray | None = None,
    kind: str = "linear",
    tangent_c: float = DEFAULT_TANGENT_C,
    dense_limit: int = DENSE_UNITARY_LIMIT,
) -> EigenphaseTrack:
    """Track the step-unitary eigenphases of an instance over the ramp."""
    if instance.n_qubits > dense_limit:
        raise CapacityError(
            f"eigenphase diagnostics need n_qubits <= {dense_limit}, "
            f"got {instance.n_qubits}"
        )
    if f_grid is None:
        f_grid = np.linspace(0.0, 1.0, 101)
    f_grid = np.asarray(f_grid, dtype=np.float64)
    warp = warp_function(kind, tangent_c)

    cost = _dense_operator(instance.cost, instance.n_qubits)
    mixer = _dense_operator(
        mixer_operator(instance.mixer, instance.n_qubits), instance.n_qubits
    )
    cost_evals, cost_evecs = np.linalg.eigh(cost)
    mixer_evals, mixer_evecs = np.linalg.eigh(mixer)
    dim = cost.shape[0]

    def step_unitary(f: float) -> np.ndarray:
        gamma = delta * float(warp(f))
        beta = delta - gamma
        u_cost = (cost_evecs * np.exp(-1j * gamma * cost_evals)) @ cost_evecs.conj().T
        u_mix = (mixer_evecs * np.exp(-1j * beta * mixer_evals)) @ mixer_evecs.conj().T
        return u_mix @ u_cost

    sorted_phases = np.empty((f_grid.size, dim))
    track_phases = np.empty((f_grid.size, dim))
    track_unwrapped = np.empty((f_grid.size, dim))
    wrap_events: list[tuple[float, int]] = []
    ambiguities: list[tuple[float, int]] = []

    prev_vecs = None
    track_vecs = None
    first_vecs = None
    for k, f in enumerate(f_grid):
        evals, evecs = np.linalg.eig(step_unitary(float(f)))
        phases = np.angle(evals)
        phases[phases <= -np.pi] = np.pi
        sorted_phases[k] = np.sort(phases)
        if prev_vecs is None:
            order = np.argsort(phases)
            track_vecs = evecs[:, order]
            first_vecs = track_vecs
            track_phases[k] = phases[order]
            track_unwrapped[k] = track_phases[k]
        else:
            perm, ambiguous_rows = _greedy_match(prev_vecs, evecs)
            track_vecs = evecs[:, perm]
            new_phases = phases[perm]
            jump = _wrap_to_pi(new_phases - track_phases[k - 1])
            track_phases[k] = new_phases
            track_unwrapped[k] = track_unwrapped[k - 1] + jump
            prev_branch = np.floor((track_unwrapped[k - 1] + np.pi) / (2.0 * np.pi))
            new_branch = np.floor((track_unwrapped[k] + np.pi) / (2.0 * np.pi))
            for t in np.nonzero(new_branch != prev_branch)[0]:
                wrap_events.append((float(f), int(t)))
            for t in ambiguous_rows:
                ambiguities.append((float(f), int(t)))
        prev_vecs = track_vecs

    mixer_ground = mixer_evecs[:, 0]
    start_overlaps = np.abs(mixer_ground.conj() @ first_vecs)
    followed = int(np.argmax(start_overlaps))

    terminal_vec = track_vecs[:, followed]
    cost_overlaps = np.abs(cost_evecs.conj().T @ terminal_vec) ** 2
    terminal_state = int(np.argmax(cost_overlaps))
    ground_mask = cost_evals <= cost_evals[0] + 1e-8 * max(1.0, abs(cost_evals[0]))
    ground_overlap = float(np.sum(cost_overlaps[ground_mask]))

    return EigenphaseTrack(
        f_grid=f_grid,
        sorted_phases=sorted_phases,
        track_phases=track_phases,
        track_unwrapped=track_unwrapped,
        wrap_events=tuple(wrap_events),
        ambiguities=tuple(ambiguities),
        followed_track=followed,
        terminal_cost_state=terminal_state,
        terminal_ground_overlap=ground_overlap,
        delta=float(delta),
    )
