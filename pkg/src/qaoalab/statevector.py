"""State vectors in full or sector-restricted mode.

Full mode holds all 2^N amplitudes; bit k of a basis index is the occupation
of qubit k.  Sector mode holds amplitudes only on an explicit sorted list of
basis indices (a fixed Hamming-weight / spin-signature subspace).  Full mode
is the reference semantics; sector mode is an optimization layered on top.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from math import comb
from pathlib import Path

import numpy as np

from .errors import FormatError, ModeError, ShapeError, ValidationError

NORM_TOL = 1e-9


def basis_indices_with_weight(n_qubits: int, weight: int) -> np.ndarray:
    """Sorted basis indices of fixed Hamming weight."""
    idx = np.arange(1 << n_qubits, dtype=np.uint64)
    return idx[np.bitwise_count(idx) == weight].astype(np.int64)


def sector_indices(n_qubits: int, n_particles: int, ms2: int | None = None,
                   ordering: str = "interleaved") -> np.ndarray:
    """Basis indices of the fixed (particle number, optional 2*Sz) sector.

    When ``ms2`` is given, qubits are interpreted as spin orbitals under the
    named ordering and the spin projection is constrained as well.
    """
    idx = np.arange(1 << n_qubits, dtype=np.uint64)
    mask = np.bitwise_count(idx) == n_particles
    if ms2 is not None:
        if n_qubits % 2:
            raise ValueError("spin sectors need an even qubit count")
        n_spatial = n_qubits // 2
        if ordering == "interleaved":
            up_mask = sum(1 << (2 * q) for q in range(n_spatial))
        elif ordering == "blocked":
            up_mask = (1 << n_spatial) - 1
        else:
            raise ValueError(f"unknown ordering {ordering!r}")
        n_up = np.bitwise_count(idx & np.uint64(up_mask)).astype(np.int64)
        n_down = np.bitwise_count(idx).astype(np.int64) - n_up
        mask &= (n_up - n_down) == ms2
    return idx[mask].astype(np.int64)


@dataclass(frozen=True)
class StateVector:
    """Complex amplitude vector, immutable after construction."""

    amplitudes: np.ndarray
    n_qubits: int
    sector: np.ndarray | None = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if self.sector is not None:
            sec = np.asarray(self.sector, dtype=np.int64)
            sec.setflags(write=False)
            object.__setattr__(self, "sector", sec)
            if sec.size != amps.size:
                raise ShapeError("sector map length must match amplitude length")
            if sec.size and (np.any(np.diff(sec) <= 0) or sec[0] < 0
                             or sec[-1] >= (1 << self.n_qubits)):
                raise ValidationError("sector indices must be sorted, unique, in range")
        elif amps.size != 1 << self.n_qubits:
            raise ShapeError(
                f"amplitude length {amps.size} != 2**{self.n_qubits} in full mode"
            )

    # -- constructors ---------------------------------------------------------

    @classmethod
    def basis_state(cls, n_qubits: int, index: int) -> "StateVector":
        if not 0 <= index < (1 << n_qubits):
            raise ValueError(f"basis index {index} out of range")
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps, n_qubits)

    @classmethod
    def from_bits(cls, bits: "list[int] | tuple[int, ...]") -> "StateVector":
        n = len(bits)
        index = sum(1 << k for k, b in enumerate(bits) if b)
        return cls.basis_state(n, index)

    @classmethod
    def uniform(cls, n_qubits: int) -> "StateVector":
        dim = 1 << n_qubits
        amps = np.full(dim, 1.0 / np.sqrt(dim), dtype=np.complex128)
        return cls(amps, n_qubits)

    @classmethod
    def dicke(cls, n_qubits: int, n_particles: int) -> "StateVector":
        """Equal superposition of all weight-n basis states."""
        if not 0 <= n_particles <= n_qubits:
            raise ValueError(
                f"particle count {n_particles} outside [0, {n_qubits}]"
            )
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        idx = basis_indices_with_weight(n_qubits, n_particles)
        amps[idx] = 1.0 / np.sqrt(comb(n_qubits, n_particles))
        return cls(amps, n_qubits)

    # -- basic queries -------------------------------------------------------

    @property
    def mode(self) -> str:
        return "full" if self.sector is None else "sector"

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "StateVector") -> complex:
        """<self|other>; both states must share qubit count and mode."""
        self._check_compatible(other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def amplitude(self, basis_index: int) -> complex:
        if self.sector is None:
            return complex(self.amplitudes[basis_index])
        pos = np.searchsorted(self.sector, basis_index)
        if pos < self.sector.size and self.sector[pos] == basis_index:
            return complex(self.amplitudes[pos])
        return 0.0 + 0.0j

    def _check_compatible(self, other: "StateVector"):
        if self.n_qubits != other.n_qubits:
            raise ShapeError("qubit count mismatch")
        if (self.sector is None) != (other.sector is None):
            raise ModeError("cannot mix full and sector mode states")
        if self.sector is not None and not np.array_equal(self.sector, other.sector):
            raise ModeError("sector maps differ")

    # -- derived states -------------------------------------------------------

    def with_amplitudes(self, amplitudes: np.ndarray, metadata: dict | None = None
                        ) -> "StateVector":
        return StateVector(amplitudes, self.n_qubits, self.sector,
                           metadata if metadata is not None else {})

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValidationError("cannot normalize the zero vector")
        return self.with_amplitudes(self.amplitudes / n)

    def restrict_to_sector(self, indices: np.ndarray, leakage_tol: float = 1e-10
                           ) -> "StateVector":
        """Project onto the sector; errors if weight outside exceeds tolerance."""
        if self.sector is not None:
            raise ModeError("state is already in sector mode")
        indices = np.asarray(indices, dtype=np.int64)
        inside = self.amplitudes[indices]
        leak = self.norm() ** 2 - float(np.vdot(inside, inside).real)
        if leak > leakage_tol:
            raise ValidationError(
                f"amplitude weight {leak:.3e} outside the requested sector"
            )
        return StateVector(inside, self.n_qubits, indices)

    def to_full(self) -> "StateVector":
        if self.sector is None:
            return self
        amps = np.zeros(1 << self.n_qubits, dtype=np.complex128)
        amps[self.sector] = self.amplitudes
        return StateVector(amps, self.n_qubits)

    def sector_weight(self, indices: np.ndarray) -> float:
        """Probability mass on the given basis indices (full mode only)."""
        if self.sector is not None:
            raise ModeError("sector_weight expects a full-mode state")
        inside = self.amplitudes[np.asarray(indices, dtype=np.int64)]
        return float(np.vdot(inside, inside).real)


def _sector_digest(indices: np.ndarray) -> str:
    return hashlib.sha256(
        np.ascontiguousarray(indices, dtype="<i8").tobytes()
    ).hexdigest()


def save_statevector(state: StateVector, path: str | Path) -> Path:
    """Snapshot: little-endian (real, imag) double pairs + a JSON sidecar.

    The sidecar at ``<path>.json`` records n_qubits, mode, and (in sector
    mode) a digest of the sector index map; loading a sector snapshot
    requires supplying an index map with the same digest.
    """
    path = Path(path)
    interleaved = np.empty(2 * state.dim, dtype="<f8")
    interleaved[0::2] = state.amplitudes.real
    interleaved[1::2] = state.amplitudes.imag
    path.write_bytes(interleaved.tobytes())
    sidecar = {"n_qubits": state.n_qubits, "mode": state.mode}
    if state.sector is not None:
        sidecar["sector_digest"] = _sector_digest(state.sector)
        sidecar["sector_size"] = int(state.sector.size)
    path.with_name(path.name + ".json").write_text(
        json.dumps(sidecar, indent=2), encoding="ascii"
    )
    return path


def load_statevector(path: str | Path,
                     sector: np.ndarray | None = None) -> StateVector:
    """Read a snapshot written by save_statevector."""
    path = Path(path)
    sidecar_path = path.with_name(path.name + ".json")
    if not sidecar_path.exists():
        raise FormatError(f"snapshot sidecar {sidecar_path} is missing")
    try:
        meta = json.loads(sidecar_path.read_text(encoding="ascii"))
        n_qubits = int(meta["n_qubits"])
        mode = meta["mode"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise FormatError(f"{sidecar_path}: invalid snapshot sidecar: {exc}") from exc
    raw = np.frombuffer(path.read_bytes(), dtype="<f8")
    if raw.size % 2:
        raise FormatError(f"{path}: odd number of doubles in snapshot")
    amplitudes = raw[0::2] + 1j * raw[1::2]
    if mode == "full":
        return StateVector(amplitudes, n_qubits)
    if sector is None:
        raise ValidationError(
            "sector-mode snapshot needs the sector index map to load"
        )
    sector = np.asarray(sector, dtype=np.int64)
    if _sector_digest(sector) != meta.get("sector_digest"):
        raise ValidationError("sector map digest does not match the snapshot")
    return StateVector(amplitudes, n_qubits, sector)
