"""Sparse Pauli-string operator algebra on bitmask pairs.

A Pauli string on N qubits is stored as two N-bit masks: ``x_mask`` has a bit
set wherever the string carries an X or Y factor, ``z_mask`` wherever it
carries a Z or Y factor.  With ``c = popcount(x_mask & z_mask)`` the operator
is ``i**c * X^x * Z^z``, which makes every string Hermitian and reproduces the
usual letters per qubit:

    (x, z) = (0, 0) -> I    (1, 0) -> X    (1, 1) -> Y    (0, 1) -> Z

Acting on a computational basis state ``|j>`` (bit k of j = qubit k):

    P |j> = i**c * (-1)**popcount(z_mask & j) |j XOR x_mask>
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, FormatError, ShapeError, ValidationError

DEFAULT_DROP_TOL = 1e-12
DEFAULT_DENSE_LIMIT = 12
DEFAULT_DIAGONAL_LIMIT = 24

_LETTER_FROM_BITS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS_FROM_LETTER = {v: k for k, v in _LETTER_FROM_BITS.items()}
_I_POWERS = (1.0, 1.0j, -1.0, -1.0j)


def _parity_of_and(mask: int, indices: np.ndarray) -> np.ndarray:
    """(-1)**popcount(mask & indices) as a float array, vectorized."""
    anded = np.bitwise_and(indices, np.uint64(mask))
    return 1.0 - 2.0 * (np.bitwise_count(anded).astype(np.int64) & 1)


@dataclass(frozen=True)
class PauliString:
    """A single N-qubit Pauli string in bitmask form."""

    x_mask: int
    z_mask: int
    n_qubits: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        top = 1 << self.n_qubits
        if not (0 <= self.x_mask < top and 0 <= self.z_mask < top):
            raise ValueError(
                f"masks must fit in {self.n_qubits} bits: "
                f"x={self.x_mask:#x}, z={self.z_mask:#x}"
            )

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Build from an 'IXYZ' string; character k is the letter on qubit k."""
        x = z = 0
        for k, letter in enumerate(label):
            try:
                xb, zb = _BITS_FROM_LETTER[letter]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {letter!r} in {label!r}") from None
            x |= xb << k
            z |= zb << k
        return cls(x, z, len(label))

    def to_label(self) -> str:
        return "".join(
            _LETTER_FROM_BITS[((self.x_mask >> k) & 1, (self.z_mask >> k) & 1)]
            for k in range(self.n_qubits)
        )

    def letter(self, qubit: int) -> str:
        if not 0 <= qubit < self.n_qubits:
            raise ValueError(f"qubit {qubit} out of range for {self.n_qubits} qubits")
        return _LETTER_FROM_BITS[((self.x_mask >> qubit) & 1, (self.z_mask >> qubit) & 1)]

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    @property
    def weight(self) -> int:
        return (self.x_mask | self.z_mask).bit_count()

    def phase_exponent(self) -> int:
        """c in P = i**c X^x Z^z, i.e. the number of Y letters."""
        return (self.x_mask & self.z_mask).bit_count()

    def __mul__(self, other: "PauliString") -> tuple[complex, "PauliString"]:
        """Product string and its scalar phase: self * other = phase * result."""
        if self.n_qubits != other.n_qubits:
            raise ShapeError("cannot multiply Pauli strings on different qubit counts")
        x3 = self.x_mask ^ other.x_mask
        z3 = self.z_mask ^ other.z_mask
        c1 = self.phase_exponent()
        c2 = other.phase_exponent()
        c3 = (x3 & z3).bit_count()
        phase = _I_POWERS[(c1 + c2 - c3) % 4]
        if (self.z_mask & other.x_mask).bit_count() & 1:
            phase = -phase
        return phase, PauliString(x3, z3, self.n_qubits)

    def __str__(self) -> str:
        return self.to_label()


class PauliSum:
    """Weighted sum of Pauli strings on a fixed qubit count.

    Terms are kept canonical: duplicate (x_mask, z_mask) pairs merged and
    coefficients below the drop tolerance removed.  Instances are immutable;
    all algebra returns new sums.
    """

    __slots__ = ("n_qubits", "_terms")

    def __init__(
        self,
        n_qubits: int,
        terms: dict[tuple[int, int], complex] | None = None,
        drop_tol: float = DEFAULT_DROP_TOL,
    ):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        self.n_qubits = n_qubits
        clean: dict[tuple[int, int], complex] = {}
        if terms:
            top = 1 << n_qubits
            for (x, z), coeff in terms.items():
                if not (0 <= x < top and 0 <= z < top):
                    raise ValueError("term mask does not fit in n_qubits bits")
                if abs(coeff) >= drop_tol:
                    clean[(x, z)] = complex(coeff)
        self._terms = clean

    # -- construction helpers ------------------------------------------------

    @classmethod
    def from_terms(
        cls,
        pairs: "list[tuple[complex, PauliString]]",
        n_qubits: int | None = None,
        drop_tol: float = DEFAULT_DROP_TOL,
    ) -> "PauliSum":
        if n_qubits is None:
            if not pairs:
                raise ValueError("need n_qubits for an empty sum")
            n_qubits = pairs[0][1].n_qubits
        acc: dict[tuple[int, int], complex] = {}
        for coeff, string in pairs:
            if string.n_qubits != n_qubits:
                raise ShapeError("mixed qubit counts in term list")
            key = (string.x_mask, string.z_mask)
            acc[key] = acc.get(key, 0.0) + complex(coeff)
        return cls(n_qubits, acc, drop_tol)

    @classmethod
    def from_label_dict(cls, labels: dict[str, complex]) -> "PauliSum":
        pairs = [(coeff, PauliString.from_label(lbl)) for lbl, coeff in labels.items()]
        return cls.from_terms(pairs)

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, {(0, 0): complex(coeff)})

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits, {})

    # -- inspection ----------------------------------------------------------

    @property
    def terms(self) -> list[tuple[complex, PauliString]]:
        """Terms as (coefficient, string) pairs in canonical mask order."""
        return [
            (coeff, PauliString(x, z, self.n_qubits))
            for (x, z), coeff in sorted(self._terms.items())
        ]

    @property
    def n_terms(self) -> int:
        return len(self._terms)

    def coefficient(self, string: PauliString) -> complex:
        if string.n_qubits != self.n_qubits:
            raise ShapeError("qubit count mismatch")
        return self._terms.get((string.x_mask, string.z_mask), 0.0 + 0.0j)

    def l1_norm(self) -> float:
        """Sum of |coefficients|; an upper bound on the spectral radius."""
        return float(sum(abs(c) for c in self._terms.values()))

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        """True when every coefficient is real within tol.

        Strings in this representation are individually Hermitian, so the sum
        is Hermitian exactly when all coefficients are real.
        """
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def is_diagonal(self) -> bool:
        return all(x == 0 for (x, _z) in self._terms)

    # -- algebra ---------------------------------------------------------------

    def simplify(self, drop_tol: float = DEFAULT_DROP_TOL) -> "PauliSum":
        return PauliSum(self.n_qubits, dict(self._terms), drop_tol)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if not isinstance(other, PauliSum):
            return NotImplemented
        if self.n_qubits != other.n_qubits:
            raise ShapeError("cannot add sums on different qubit counts")
        acc = dict(self._terms)
        for key, coeff in other._terms.items():
            acc[key] = acc.get(key, 0.0) + coeff
        return PauliSum(self.n_qubits, acc)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (other * -1.0)

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            if self.n_qubits != other.n_qubits:
                raise ShapeError("cannot multiply sums on different qubit counts")
            acc: dict[tuple[int, int], complex] = {}
            for (x1, z1), c1 in self._terms.items():
                e1 = (x1 & z1).bit_count()
                for (x2, z2), c2 in other._terms.items():
                    x3 = x1 ^ x2
                    z3 = z1 ^ z2
                    k = (e1 + (x2 & z2).bit_count() - (x3 & z3).bit_count()) % 4
                    phase = _I_POWERS[k]
                    if (z1 & x2).bit_count() & 1:
                        phase = -phase
                    key = (x3, z3)
                    acc[key] = acc.get(key, 0.0) + c1 * c2 * phase
            return PauliSum(self.n_qubits, acc)
        if isinstance(other, (int, float, complex)):
            scaled = {k: v * other for k, v in self._terms.items()}
            return PauliSum(self.n_qubits, scaled)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def adjoint(self) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: v.conjugate() for k, v in self._terms.items()})

    def commutator(self, other: "PauliSum") -> "PauliSum":
        return self * other - other * self

    # -- dense / diagonal views -------------------------------------------------

    def to_dense(self, dense_limit: int = DEFAULT_DENSE_LIMIT) -> np.ndarray:
        """Dense 2^N x 2^N matrix; guarded by ``dense_limit`` qubits."""
        if self.n_qubits > dense_limit:
            raise CapacityError(
                f"to_dense on {self.n_qubits} qubits exceeds limit {dense_limit}"
            )
        dim = 1 << self.n_qubits
        cols = np.arange(dim, dtype=np.uint64)
        out = np.zeros((dim, dim), dtype=np.complex128)
        for (x, z), coeff in self._terms.items():
            rows = np.bitwise_xor(cols, np.uint64(x))
            amp = coeff * _I_POWERS[(x & z).bit_count() % 4] * _parity_of_and(z, cols)
            out[rows, cols] += amp
        return out

    def diagonal_values(self, limit: int = DEFAULT_DIAGONAL_LIMIT) -> np.ndarray:
        """<j|H|j> for all basis states j, from the x_mask == 0 terms only."""
        if self.n_qubits > limit:
            raise CapacityError(
                f"diagonal on {self.n_qubits} qubits exceeds limit {limit}"
            )
        idx = np.arange(1 << self.n_qubits, dtype=np.uint64)
        values = np.zeros(idx.size, dtype=np.complex128)
        for (x, z), coeff in self._terms.items():
            if x == 0:
                values += coeff * _parity_of_and(z, idx)
        return values

    # -- serialization ------------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "terms": [
                {"coeff": [coeff.real, coeff.imag], "pauli": string.to_label()}
                for coeff, string in self.terms
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PauliSum":
        try:
            n_qubits = int(data["n_qubits"])
            raw_terms = data["terms"]
        except (KeyError, TypeError) as exc:
            raise FormatError(f"operator JSON missing field: {exc}") from exc
        pairs = []
        for entry in raw_terms:
            re, im = entry["coeff"]
            label = entry["pauli"]
            if len(label) != n_qubits:
                raise FormatError(
                    f"pauli label {label!r} has length {len(label)}, expected {n_qubits}"
                )
            pairs.append((complex(re, im), PauliString.from_label(label)))
        return cls.from_terms(pairs, n_qubits=n_qubits)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "PauliSum":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid operator JSON: {exc}") from exc
        return cls.from_json_dict(data)

    # -- misc --------------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self._terms == other._terms

    def __repr__(self) -> str:
        if not self._terms:
            return f"PauliSum(0 on {self.n_qubits} qubits)"
        parts = [f"({c:.6g})*{s}" for c, s in self.terms[:6]]
        if self.n_terms > 6:
            parts.append(f"... [{self.n_terms} terms]")
        return " + ".join(parts)


@dataclass(frozen=True)
class DiagonalOperator:
    """Real diagonal operator over the computational basis.

    ``values[j]`` is the eigenvalue on basis state j.  In sector mode the
    array covers only the listed basis indices, in order.
    """

    values: np.ndarray
    n_qubits: int
    sector_indices: np.ndarray | None = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.sector_indices is not None:
            sec = np.asarray(self.sector_indices, dtype=np.int64)
            sec.setflags(write=False)
            object.__setattr__(self, "sector_indices", sec)
            if sec.size != values.size:
                raise ShapeError("sector index map length must match values length")
            if sec.size and (np.any(np.diff(sec) <= 0) or sec[0] < 0):
                raise ValidationError("sector indices must be sorted and duplicate-free")
        elif values.size != 1 << self.n_qubits:
            raise ShapeError(
                f"diagonal length {values.size} != 2**{self.n_qubits} in full mode"
            )

    @property
    def mode(self) -> str:
        return "full" if self.sector_indices is None else "sector"

    def min_value(self) -> float:
        return float(self.values.min())

    def restrict(self, indices: np.ndarray) -> "DiagonalOperator":
        if self.sector_indices is not None:
            raise ShapeError("operator is already sector-restricted")
        indices = np.asarray(indices, dtype=np.int64)
        return DiagonalOperator(self.values[indices], self.n_qubits, indices)


def diagonal_part(h: PauliSum, hermitian_tol: float = 1e-10) -> DiagonalOperator:
    """Diagonal of a Hermitian PauliSum in the computational basis."""
    if not h.is_hermitian(hermitian_tol):
        raise ValidationError("diagonal_part requires a Hermitian operator")
    values = h.diagonal_values()
    return DiagonalOperator(values.real, h.n_qubits)


# Module-level aliases matching the operation names used throughout the docs.

def simplify(h: PauliSum, drop_tol: float = DEFAULT_DROP_TOL) -> PauliSum:
    return h.simplify(drop_tol)


def multiply(a: PauliSum, b: PauliSum) -> PauliSum:
    return a * b


def add(a: PauliSum, b: PauliSum) -> PauliSum:
    return a + b


def is_hermitian(h: PauliSum, tol: float = 1e-10) -> bool:
    return h.is_hermitian(tol)


def to_dense(h: PauliSum, dense_limit: int = DEFAULT_DENSE_LIMIT) -> np.ndarray:
    return h.to_dense(dense_limit)
