"""The alternating evolution and the squared-overlap metric.

One protocol step applies exp(-i gamma_j H_C) followed by exp(-i beta_j H_B),
reading the operator product right to left.  Each factor dispatches to the
cheapest exact kernel available: diagonal phases, product-form X rotations,
a cached dense eigenbasis on small systems, or a Krylov exponential.
"""

from __future__ import annotations

import numpy as np

from . import kernel
from .errors import QaoalabError, ShapeError, ValidationError
from .kernel import CompiledPauliSum, GroundManifold, expm_krylov
from .pauli import DiagonalOperator, PauliSum
from .problems import MixerSpec, ProblemInstance, x_mixer_operator
from .schedules import Schedule, schedule_angles
from .statevector import StateVector

DEFAULT_DENSE_FACTOR_LIMIT = 10


class _DiagonalFactor:
    def __init__(self, values: np.ndarray):
        self._values = values

    def apply(self, angle: float, state: StateVector) -> StateVector:
        return state.with_amplitudes(
            np.exp(-1j * angle * self._values) * state.amplitudes
        )


class _XMixerFactor:
    # H_B = -sum_k X_k, so exp(-i beta H_B) is an X rotation by -beta per qubit
    def apply(self, angle: float, state: StateVector) -> StateVector:
        return kernel.apply_x_mixer(-angle, state)


class _DenseEigFactor:
    """exp(-i angle H) through a precomputed eigenbasis; exact per application."""

    def __init__(self, h: PauliSum, sector: np.ndarray | None):
        compiled = CompiledPauliSum(h, sector)
        if sector is None:
            dense = h.to_dense(dense_limit=h.n_qubits)
        else:
            dense = compiled._matrix.toarray()
        self._evals, self._evecs = np.linalg.eigh(dense)

    def apply(self, angle: float, state: StateVector) -> StateVector:
        coeffs = self._evecs.conj().T @ state.amplitudes
        coeffs *= np.exp(-1j * angle * self._evals)
        return state.with_amplitudes(self._evecs @ coeffs)


class _KrylovFactor:
    def __init__(self, h: PauliSum, sector: np.ndarray | None,
                 krylov_dim: int, tol: float):
        self._compiled = CompiledPauliSum(h, sector)
        self._krylov_dim = krylov_dim
        self._tol = tol

    def apply(self, angle: float, state: StateVector) -> StateVector:
        return expm_krylov(
            self._compiled, angle, state,
            krylov_dim=self._krylov_dim, tol=self._tol,
        )


class QaoaEvolver:
    """Per-instance compiled protocol runner, reusable across many schedules.

    Building one of these once and sharing it across (delta, p) grid cells
    amortizes dense eigendecompositions; all state is read-only after
    construction, so concurrent evolve() calls are safe.
    """

    def __init__(
        self,
        instance: ProblemInstance,
        dense_limit: int = DEFAULT_DENSE_FACTOR_LIMIT,
        krylov_dim: int = kernel.DEFAULT_KRYLOV_DIM,
        krylov_tol: float = kernel.DEFAULT_KRYLOV_TOL,
        use_sector: bool = False,
    ):
        self.instance = instance
        sector = instance.sector_basis() if use_sector else None
        if use_sector and sector is None:
            raise ValidationError("instance declares no symmetry sector to restrict to")
        if sector is not None:
            self.initial = instance.initial.restrict_to_sector(sector)
        else:
            self.initial = instance.initial
        self._sector = sector
        self._cost_factor = self._build_factor(instance.cost, dense_limit,
                                               krylov_dim, krylov_tol)
        self._mixer_factor = self._build_mixer(instance.mixer, dense_limit,
                                               krylov_dim, krylov_tol)

    def _build_factor(self, op, dense_limit, krylov_dim, krylov_tol):
        if isinstance(op, DiagonalOperator):
            values = op.values if self._sector is None else op.values[self._sector]
            return _DiagonalFactor(values)
        if not op.is_hermitian():
            raise ValidationError("evolution factors must be Hermitian")
        if op.is_diagonal():
            values = op.diagonal_values().real
            if self._sector is not None:
                values = values[self._sector]
            return _DiagonalFactor(values)
        small = (self._sector.size if self._sector is not None
                 else 1 << op.n_qubits) <= (1 << dense_limit)
        if small:
            return _DenseEigFactor(op, self._sector)
        return _KrylovFactor(op, self._sector, krylov_dim, krylov_tol)

    def _build_mixer(self, mixer: MixerSpec, dense_limit, krylov_dim, krylov_tol):
        if mixer.kind == "diagonal":
            values = mixer.diagonal.values
            if self._sector is not None:
                if mixer.diagonal.sector_indices is not None:
                    raise ShapeError("mixer diagonal is already sector-restricted")
                values = values[self._sector]
            return _DiagonalFactor(values)
        if mixer.kind == "transverse_x":
            if self._sector is not None:
                raise ValidationError("X mixer is incompatible with sector mode")
            return _XMixerFactor()
        return self._build_factor(mixer.pauli, dense_limit, krylov_dim, krylov_tol)

    def evolve(self, schedule: Schedule) -> StateVector:
        """Run the full alternating protocol from the instance's initial state."""
        angles = schedule_angles(schedule)
        state = self.initial
        drift = np.zeros(angles.p)
        for j in range(angles.p):
            try:
                state = self._cost_factor.apply(angles.gammas[j], state)
                state = self._mixer_factor.apply(angles.betas[j], state)
            except QaoalabError as exc:
                raise type(exc)(f"step {j + 1} of {angles.p}: {exc}") from exc
            drift[j] = abs(state.norm() - 1.0)
        return state.with_amplitudes(
            state.amplitudes,
            metadata={
                "schedule": schedule.to_json_dict(),
                "norm_drift_per_step": drift,
                "max_norm_drift": float(drift.max()) if angles.p else 0.0,
            },
        )


def qaoa_evolve(
    instance: ProblemInstance,
    schedule: Schedule,
    dense_limit: int = DEFAULT_DENSE_FACTOR_LIMIT,
    krylov_dim: int = kernel.DEFAULT_KRYLOV_DIM,
    krylov_tol: float = kernel.DEFAULT_KRYLOV_TOL,
    use_sector: bool = False,
) -> StateVector:
    """One-shot protocol run; see QaoaEvolver for the reusable form."""
    evolver = QaoaEvolver(instance, dense_limit, krylov_dim, krylov_tol, use_sector)
    return evolver.evolve(schedule)


def squared_overlap(v: StateVector, manifold: GroundManifold) -> float:
    """sum_k |<phi_k|v>|^2 over the ground manifold; phase-insensitive."""
    if manifold.n_qubits != v.n_qubits:
        raise ShapeError("state and manifold disagree on qubit count")
    if manifold.basis_indices is not None:
        if v.sector is None:
            inside = v.amplitudes[manifold.basis_indices]
        else:
            pos = np.searchsorted(v.sector, manifold.basis_indices)
            ok = pos < v.sector.size
            ok &= v.sector[np.minimum(pos, v.sector.size - 1)] == manifold.basis_indices
            inside = v.amplitudes[pos[ok]]
        total = float(np.vdot(inside, inside).real)
    else:
        full = v.to_full() if v.sector is not None else v
        total = 0.0
        for phi in manifold.explicit_states:
            phi_full = phi.to_full() if phi.sector is not None else phi
            total += abs(np.vdot(phi_full.amplitudes, full.amplitudes)) ** 2
    if total > 1.0 + 1e-9:
        raise ValidationError(
            f"overlap {total} exceeds 1; the manifold is not orthonormal"
        )
    return total


def instance_ground_manifold(
    instance: ProblemInstance,
    degeneracy_tol: float | None = None,
    dense_limit: int = 12,
) -> GroundManifold:
    """Ground manifold of the instance's cost, within its declared sector.

    Chemistry targets are the lowest states of the fixed particle-number
    (and spin-projection) block, not the global Fock-space minimum.
    """
    return kernel.ground_states(
        instance.cost, degeneracy_tol=degeneracy_tol, dense_limit=dense_limit,
        sector=instance.sector_basis(),
    )


def mixer_operator(mixer: MixerSpec, n_qubits: int) -> PauliSum | DiagonalOperator:
    """The mixer as a concrete operator, for continuous-time evolution."""
    if mixer.kind == "diagonal":
        return mixer.diagonal
    if mixer.kind == "transverse_x":
        return x_mixer_operator(n_qubits)
    return mixer.pauli


def continuous_evolve_instance(
    instance: ProblemInstance,
    total_time: float,
    steps: int | None = None,
    krylov_dim: int = kernel.DEFAULT_KRYLOV_DIM,
    krylov_tol: float = kernel.DEFAULT_KRYLOV_TOL,
) -> StateVector:
    """Continuous interpolation oracle run from the instance's initial state."""
    mixer = mixer_operator(instance.mixer, instance.n_qubits)
    return kernel.continuous_evolve(
        instance.cost, mixer, instance.initial, total_time, steps,
        krylov_dim=krylov_dim, tol=krylov_tol,
    )
