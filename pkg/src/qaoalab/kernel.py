"""Matrix-free statevector kernels.

Pauli-sum application works term by term through bitmask index flips, so no
operator is ever materialized densely on the hot path.  Unitary exponentials
of non-diagonal operators go through a Lanczos/Krylov subspace with adaptive
time splitting; small systems may instead use a cached dense eigenbasis (see
``evolve``).  Dense constructions are only used as guarded fallbacks and in
test oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import (
    CapacityError,
    ConvergenceError,
    ModeError,
    ShapeError,
    StabilityError,
    ValidationError,
)
from .pauli import DiagonalOperator, PauliSum, _I_POWERS, _parity_of_and
from .statevector import StateVector

DEFAULT_KRYLOV_DIM = 30
DEFAULT_KRYLOV_TOL = 1e-10
DEFAULT_DENSE_EIG_LIMIT = 12
NORM_DRIFT_LIMIT = 1e-9
_MAX_TIME_SPLITS = 16


class CompiledPauliSum:
    """A PauliSum prepared for repeated application to state vectors."""

    def __init__(self, h: PauliSum, sector: np.ndarray | None = None):
        self.n_qubits = h.n_qubits
        self.l1_norm = h.l1_norm()
        self._sector = sector
        terms = [(x, z, c) for (x, z), c in sorted(h._terms.items())]
        self._xs = [t[0] for t in terms]
        self._zs = [t[1] for t in terms]
        # fold the intrinsic i**(#Y) phase into the coefficient
        self._coeffs = [
            c * _I_POWERS[(x & z).bit_count() % 4] for x, z, c in terms
        ]
        if sector is None:
            self._dim = 1 << h.n_qubits
            self._idx = np.arange(self._dim, dtype=np.uint64)
            self._matrix = None
        else:
            self._dim = sector.size
            self._matrix = self._restricted_matrix(sector)

    def _restricted_matrix(self, sector: np.ndarray) -> scipy.sparse.csr_matrix:
        """P H P restricted to the sector basis (exact for sector-preserving H)."""
        cols_all = np.arange(sector.size, dtype=np.int64)
        src = sector.astype(np.uint64)
        rows, cols, data = [], [], []
        for x, z, ceff in zip(self._xs, self._zs, self._coeffs):
            targets = np.bitwise_xor(src, np.uint64(x)).astype(np.int64)
            pos = np.searchsorted(sector, targets)
            ok = (pos < sector.size)
            ok &= sector[np.minimum(pos, sector.size - 1)] == targets
            amp = ceff * _parity_of_and(z, src[ok])
            rows.append(pos[ok])
            cols.append(cols_all[ok])
            data.append(amp)
        mat = scipy.sparse.coo_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(sector.size, sector.size),
            dtype=np.complex128,
        )
        return mat.tocsr()

    @property
    def dim(self) -> int:
        return self._dim

    def matvec(self, amps: np.ndarray) -> np.ndarray:
        if self._matrix is not None:
            return self._matrix @ amps
        out = np.zeros_like(amps)
        idx = self._idx
        for x, z, ceff in zip(self._xs, self._zs, self._coeffs):
            w = (ceff * _parity_of_and(z, idx)) * amps
            if x:
                out += w.take(np.bitwise_xor(idx, np.uint64(x)).astype(np.intp))
            else:
                out += w
        return out


def apply_pauli_sum(h: PauliSum, v: StateVector) -> StateVector:
    """h|v>, computed term by term; the result is generally not unit norm."""
    if h.n_qubits != v.n_qubits:
        raise ShapeError(
            f"operator on {h.n_qubits} qubits applied to {v.n_qubits}-qubit state"
        )
    compiled = CompiledPauliSum(h, v.sector)
    return v.with_amplitudes(compiled.matvec(v.amplitudes))


def _diagonal_for_state(d: DiagonalOperator, v: StateVector) -> np.ndarray:
    if d.n_qubits != v.n_qubits:
        raise ShapeError("diagonal operator and state disagree on qubit count")
    if v.sector is None:
        if d.sector_indices is not None:
            raise ModeError("sector-restricted diagonal applied to full-mode state")
        return d.values
    if d.sector_indices is None:
        return d.values[v.sector]
    if not np.array_equal(d.sector_indices, v.sector):
        raise ModeError("diagonal sector map differs from the state's")
    return d.values


def apply_diagonal_phase(d: DiagonalOperator, angle: float, v: StateVector
                         ) -> StateVector:
    """exp(-i * angle * d) |v>; exactly norm-preserving."""
    values = _diagonal_for_state(d, v)
    return v.with_amplitudes(np.exp(-1j * angle * values) * v.amplitudes)


def apply_x_mixer(angle: float, v: StateVector) -> StateVector:
    """exp(-i * angle * sum_k X_k) |v> via independent single-qubit rotations."""
    if v.sector is not None:
        raise ModeError("the transverse-field X mixer leaves any particle sector")
    c = np.cos(angle)
    s = np.sin(angle)
    arr = v.amplitudes.reshape((2,) * v.n_qubits)
    for axis in range(v.n_qubits):
        arr = c * arr - 1j * s * np.flip(arr, axis=axis)
    return v.with_amplitudes(arr.reshape(-1))


# -- Krylov exponentiation ------------------------------------------------------


def _lanczos_expm_attempt(
    matvec: Callable[[np.ndarray], np.ndarray],
    amps: np.ndarray,
    angle: float,
    krylov_dim: int,
    tol: float,
) -> tuple[np.ndarray, float]:
    """One Lanczos build up to krylov_dim; returns (result, error_estimate).

    Stops early when the a-posteriori estimate beta_{k+1} * |y_k| drops
    below ``tol``; otherwise returns the best subspace approximation with
    its final estimate, leaving the accept/split decision to the caller.
    """
    dim = amps.size
    m = min(krylov_dim, dim)
    basis = np.zeros((m, dim), dtype=np.complex128)
    basis[0] = amps
    alphas: list[float] = []
    betas: list[float] = []
    breakdown = 1e-14

    result = amps
    est = np.inf
    for k in range(m):
        w = matvec(basis[k])
        a = float(np.vdot(basis[k], w).real)
        alphas.append(a)
        w = w - a * basis[k]
        if k > 0:
            w = w - betas[-1] * basis[k - 1]
        # full reorthogonalization keeps the small tridiagonal trustworthy
        overlaps = basis[: k + 1].conj() @ w
        w = w - basis[: k + 1].T @ overlaps
        b = float(np.linalg.norm(w))

        evals, evecs = scipy.linalg.eigh_tridiagonal(alphas, betas)
        small = evecs @ (np.exp(-1j * angle * evals) * evecs[0].conj())
        result = basis[: k + 1].T @ small
        if b < breakdown:
            return result, 0.0
        est = abs(b * small[-1])
        if est < tol:
            return result, est
        betas.append(b)
        if k + 1 < m:
            basis[k + 1] = w / b
    return result, est


def expm_krylov(
    h: "PauliSum | CompiledPauliSum | LinearHamiltonian",
    angle: float,
    v: StateVector,
    krylov_dim: int = DEFAULT_KRYLOV_DIM,
    tol: float = DEFAULT_KRYLOV_TOL,
) -> StateVector:
    """exp(-i * angle * h) |v> through a Lanczos subspace.

    The Krylov dimension grows until an a-posteriori residual estimate drops
    below ``tol``; if the cap is reached the time step is split and retried.
    The output is renormalized to the input norm only when the drift stays
    below the stability bound, otherwise a StabilityError is raised.
    """
    if isinstance(h, PauliSum):
        if not h.is_hermitian():
            raise ValidationError("expm_krylov requires a Hermitian operator")
        compiled = CompiledPauliSum(h, v.sector)
    else:
        compiled = h
    if compiled.dim != v.dim:
        raise ShapeError("operator dimension does not match the state")
    if angle == 0.0:
        return v.with_amplitudes(v.amplitudes.copy())

    amps = v.amplitudes
    in_norm = float(np.linalg.norm(amps))
    if in_norm == 0.0:
        raise ValidationError("cannot evolve the zero vector")

    n_seg = 1
    while True:
        seg_angle = angle / n_seg
        seg_tol = max(tol / n_seg, 1e-15)
        current = amps / in_norm
        total_est = 0.0
        for _ in range(n_seg):
            current, est = _lanczos_expm_attempt(
                compiled.matvec, current, seg_angle, krylov_dim, seg_tol
            )
            # segment errors add; abort the pass as soon as the budget is gone
            total_est += est
            if total_est >= tol:
                break
            nrm = float(np.linalg.norm(current))
            if nrm == 0.0:
                raise ConvergenceError("Krylov step annihilated the state")
            current = current / nrm
        if total_est < tol:
            break
        n_seg *= 2
        if n_seg > (1 << _MAX_TIME_SPLITS):
            raise ConvergenceError(
                "Krylov exponential did not converge after maximal time splitting",
                residual=total_est,
            )

    drift = abs(float(np.linalg.norm(current)) - 1.0)
    if drift >= NORM_DRIFT_LIMIT:
        raise StabilityError(f"norm drift {drift:.3e} exceeds {NORM_DRIFT_LIMIT}")
    current = current / float(np.linalg.norm(current))
    return v.with_amplitudes(current * in_norm)


# -- ground states -----------------------------------------------------------------


@dataclass(frozen=True)
class GroundManifold:
    """Orthonormal basis of the (possibly degenerate) lowest-energy subspace.

    For diagonal operators the members are indicator basis states and are
    stored as basis indices; ``states`` materializes them on demand.
    """

    energy: float
    degeneracy_tol: float
    n_qubits: int
    explicit_states: tuple[StateVector, ...] = field(default=())
    basis_indices: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.basis_indices is not None:
            idx = np.asarray(self.basis_indices, dtype=np.int64)
            idx.setflags(write=False)
            object.__setattr__(self, "basis_indices", idx)
        elif self.explicit_states:
            vecs = np.array([s.amplitudes for s in self.explicit_states])
            gram = vecs.conj() @ vecs.T
            if not np.allclose(gram, np.eye(len(vecs)), atol=1e-8):
                raise ValidationError("ground manifold members are not orthonormal")
        else:
            raise ValidationError("empty ground manifold")

    @property
    def degeneracy(self) -> int:
        if self.basis_indices is not None:
            return int(self.basis_indices.size)
        return len(self.explicit_states)

    @property
    def states(self) -> tuple[StateVector, ...]:
        if self.basis_indices is not None:
            return tuple(
                StateVector.basis_state(self.n_qubits, int(i))
                for i in self.basis_indices
            )
        return self.explicit_states


def ground_states(
    h: PauliSum | DiagonalOperator,
    degeneracy_tol: float | None = None,
    dense_limit: int = DEFAULT_DENSE_EIG_LIMIT,
    max_degeneracy: int = 16,
    seed: int = 7,
    sector: np.ndarray | None = None,
) -> GroundManifold:
    """Lowest-energy manifold of a Hermitian operator.

    Diagonal inputs are scanned exactly (default tolerance 1e-8 absolute).
    PauliSum inputs use a dense eigensolve when the dimension is at most
    2**dense_limit and a deflated Lanczos iteration beyond it (default
    tolerance 1e-6 relative).  When ``sector`` is given (sorted basis
    indices of a symmetry sector the operator preserves), the manifold is
    the lowest subspace *within that sector*, returned as full-mode states.
    """
    if isinstance(h, DiagonalOperator):
        tol = 1e-8 if degeneracy_tol is None else degeneracy_tol
        if sector is not None:
            if h.sector_indices is not None:
                raise ShapeError("operator is already sector-restricted")
            h = h.restrict(sector)
        e0 = h.min_value()
        hits = np.nonzero(h.values <= e0 + tol)[0]
        if h.sector_indices is not None:
            indices = h.sector_indices[hits]
        else:
            indices = hits
        return GroundManifold(
            energy=e0, degeneracy_tol=tol, n_qubits=h.n_qubits,
            basis_indices=np.sort(indices),
        )

    if not h.is_hermitian():
        raise ValidationError("ground_states requires a Hermitian operator")
    dim = sector.size if sector is not None else (1 << h.n_qubits)
    if dim <= (1 << dense_limit):
        if sector is None:
            dense = h.to_dense(dense_limit=h.n_qubits)
        else:
            dense = CompiledPauliSum(h, sector)._matrix.toarray()
        evals, evecs = np.linalg.eigh(dense)
        e0 = float(evals[0])
        tol = degeneracy_tol if degeneracy_tol is not None else 1e-6 * max(1.0, abs(e0))
        keep = np.nonzero(evals <= e0 + tol)[0]
        states = tuple(
            _embed(np.ascontiguousarray(evecs[:, k]), h.n_qubits, sector)
            for k in keep
        )
        return GroundManifold(
            energy=e0, degeneracy_tol=tol, n_qubits=h.n_qubits,
            explicit_states=states,
        )

    return _lanczos_ground_manifold(h, degeneracy_tol, max_degeneracy, seed, sector)


def _embed(amplitudes: np.ndarray, n_qubits: int, sector: np.ndarray | None
           ) -> StateVector:
    if sector is None:
        return StateVector(amplitudes, n_qubits)
    full = np.zeros(1 << n_qubits, dtype=np.complex128)
    full[sector] = amplitudes
    return StateVector(full, n_qubits)


def _lanczos_lowest(
    matvec: Callable[[np.ndarray], np.ndarray],
    dim: int,
    rng: np.random.Generator,
    deflate: Sequence[np.ndarray],
    max_iter: int = 400,
    tol: float = 1e-10,
) -> tuple[float, np.ndarray, float]:
    """Lowest eigenpair orthogonal to ``deflate``, full reorthogonalization."""
    v0 = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    for d in deflate:
        v0 -= d * np.vdot(d, v0)
    nrm = np.linalg.norm(v0)
    if nrm < 1e-12:
        raise ConvergenceError("deflation left no residual direction to iterate")
    v0 /= nrm

    m = min(max_iter, dim - len(deflate))
    basis = np.zeros((m, dim), dtype=np.complex128)
    basis[0] = v0
    alphas: list[float] = []
    betas: list[float] = []
    theta = np.inf
    residual = np.inf
    y = None
    for k in range(m):
        w = matvec(basis[k])
        a = float(np.vdot(basis[k], w).real)
        alphas.append(a)
        w = w - a * basis[k]
        if k > 0:
            w = w - betas[-1] * basis[k - 1]
        overlaps = basis[: k + 1].conj() @ w
        w = w - basis[: k + 1].T @ overlaps
        for d in deflate:
            w -= d * np.vdot(d, w)
        b = float(np.linalg.norm(w))
        evals, evecs = scipy.linalg.eigh_tridiagonal(alphas, betas)
        theta = float(evals[0])
        y = evecs[:, 0]
        residual = abs(b * y[-1])
        if residual < tol or b < 1e-14:
            vec = basis[: k + 1].T @ y
            vec /= np.linalg.norm(vec)
            return theta, vec, residual
        betas.append(b)
        if k + 1 < m:
            basis[k + 1] = w / b
    raise ConvergenceError(
        "Lanczos eigensolver did not converge", residual=residual
    )


def _lanczos_ground_manifold(
    h: PauliSum,
    degeneracy_tol: float | None,
    max_degeneracy: int,
    seed: int,
    sector: np.ndarray | None = None,
) -> GroundManifold:
    compiled = CompiledPauliSum(h, sector)
    rng = np.random.default_rng(np.random.Philox(seed))
    e0, vec, _ = _lanczos_lowest(compiled.matvec, compiled.dim, rng, deflate=[])
    tol = degeneracy_tol if degeneracy_tol is not None else 1e-6 * max(1.0, abs(e0))
    found = [vec]
    energies = [e0]
    while len(found) < max_degeneracy:
        try:
            e_next, v_next, _ = _lanczos_lowest(
                compiled.matvec, compiled.dim, rng, deflate=found
            )
        except ConvergenceError:
            break
        if e_next > e0 + tol:
            break
        found.append(v_next)
        energies.append(e_next)
    # re-orthonormalize against rounding in the deflation loop
    q, _ = np.linalg.qr(np.array(found).T)
    states = tuple(
        _embed(np.ascontiguousarray(q[:, k]), h.n_qubits, sector)
        for k in range(len(found))
    )
    return GroundManifold(
        energy=float(min(energies)), degeneracy_tol=tol, n_qubits=h.n_qubits,
        explicit_states=states,
    )


# -- continuous-time oracle ------------------------------------------------------


class LinearHamiltonian:
    """(1 - s) * A + s * B as a matvec, for interpolated evolutions."""

    def __init__(self, a_matvec, b_matvec, dim: int, l1_norm: float):
        self._a = a_matvec
        self._b = b_matvec
        self.dim = dim
        self.l1_norm = l1_norm
        self.s = 0.0

    def matvec(self, amps: np.ndarray) -> np.ndarray:
        return (1.0 - self.s) * self._a(amps) + self.s * self._b(amps)


def _operator_matvec(op: PauliSum | DiagonalOperator, template: StateVector):
    """(matvec, width estimate) for a Hamiltonian operand of continuous_evolve."""
    if isinstance(op, DiagonalOperator):
        values = _diagonal_for_state(op, template)
        return (lambda amps: values * amps), float(np.max(np.abs(values)))
    compiled = CompiledPauliSum(op, template.sector)
    return compiled.matvec, compiled.l1_norm


def continuous_evolve(
    cost: PauliSum | DiagonalOperator,
    mixer: PauliSum | DiagonalOperator,
    initial: StateVector,
    total_time: float,
    steps: int | None = None,
    krylov_dim: int = DEFAULT_KRYLOV_DIM,
    tol: float = DEFAULT_KRYLOV_TOL,
) -> StateVector:
    """Integrate i d|psi>/dt = [(1 - t/T) mixer + (t/T) cost] |psi>.

    Uses per-step Krylov exponentials of the midpoint Hamiltonian.  When
    ``steps`` is omitted it is chosen so that dt times the spectral-width
    estimate stays below 0.1; an explicit coarser choice is rejected.
    """
    if total_time == 0.0:
        return initial.with_amplitudes(initial.amplitudes.copy())
    if total_time < 0.0:
        raise ValueError("total_time must be nonnegative")

    mixer_mv, mixer_width = _operator_matvec(mixer, initial)
    cost_mv, cost_width = _operator_matvec(cost, initial)
    width = max(mixer_width + cost_width, 1e-12)
    needed = int(np.ceil(total_time * width / 0.1))
    if steps is None:
        steps = max(needed, 1)
    elif steps < needed:
        raise ValueError(
            f"steps={steps} too coarse: need at least {needed} for dt*width < 0.1"
        )

    both_diagonal = isinstance(cost, DiagonalOperator) and isinstance(mixer, DiagonalOperator)
    dt = total_time / steps
    state = initial
    if both_diagonal:
        mixer_values = _diagonal_for_state(mixer, initial)
        cost_values = _diagonal_for_state(cost, initial)
        for k in range(steps):
            s = (k + 0.5) * dt / total_time
            values = (1.0 - s) * mixer_values + s * cost_values
            state = state.with_amplitudes(
                np.exp(-1j * dt * values) * state.amplitudes
            )
        return state

    ham = LinearHamiltonian(mixer_mv, cost_mv, initial.dim, width)
    for k in range(steps):
        ham.s = (k + 0.5) * dt / total_time
        state = expm_krylov(ham, dt, state, krylov_dim=krylov_dim, tol=tol)
    return state


def expectation(h: PauliSum | DiagonalOperator, v: StateVector) -> float:
    """Real part of <v|h|v> (h is assumed Hermitian)."""
    if isinstance(h, DiagonalOperator):
        values = _diagonal_for_state(h, v)
        return float(np.vdot(v.amplitudes, values * v.amplitudes).real)
    hv = apply_pauli_sum(h, v)
    return float(np.vdot(v.amplitudes, hv.amplitudes).real)
