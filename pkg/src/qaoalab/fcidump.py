"""FCIDUMP reading and writing.

The accepted format is the common Molpro-style dump: a namelist header
``&FCI NORB=...,NELEC=...,MS2=...,`` closed by ``/`` or ``&END``, followed by
whitespace-separated ``value i j k l`` lines with 1-based orbital indices.
``0 0 0 0`` indices carry the core energy, ``i j 0 0`` lines are one-body
integrals, everything else is a two-body integral in chemist notation
(ij|kl).  Keys are case-insensitive; D-style Fortran exponents are accepted.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from .errors import FormatError

_HEADER_KEY_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*([^,=]*)")


def _pair_index(i: int, j: int) -> int:
    a, b = (i, j) if i >= j else (j, i)
    return a * (a + 1) // 2 + b


def canonical_two_body_key(i: int, j: int, k: int, l: int) -> tuple[int, int, int, int]:
    """Representative of the 8-fold symmetry class of the chemist integral (ij|kl)."""
    ij = (i, j) if i >= j else (j, i)
    kl = (k, l) if k >= l else (l, k)
    if _pair_index(*ij) >= _pair_index(*kl):
        return ij + kl
    return kl + ij


def two_body_images(i: int, j: int, k: int, l: int) -> set[tuple[int, int, int, int]]:
    """All distinct index tuples sharing the value of (ij|kl) for real orbitals."""
    return {
        (i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
        (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i),
    }


@dataclass(frozen=True)
class MolecularIntegrals:
    """Spatial-orbital integrals of a molecular Hamiltonian, in hartree.

    One-body values are stored under symmetric (i>=j) keys, two-body values
    under the canonical 8-fold key; accessors resolve any index image.
    Indices are 0-based here; FCIDUMP I/O converts from/to 1-based.
    """

    n_spatial: int
    n_electrons: int
    ms2: int
    core_energy: float
    one: dict[tuple[int, int], float] = field(default_factory=dict)
    two: dict[tuple[int, int, int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_spatial < 1:
            raise ValueError("n_spatial must be positive")
        if not 0 <= self.n_electrons <= 2 * self.n_spatial:
            raise ValueError(
                f"n_electrons={self.n_electrons} outside [0, {2 * self.n_spatial}]"
            )
        if (self.n_electrons + self.ms2) % 2 or abs(self.ms2) > self.n_electrons:
            raise ValueError(f"ms2={self.ms2} inconsistent with n={self.n_electrons}")

    @property
    def n_alpha(self) -> int:
        return (self.n_electrons + self.ms2) // 2

    @property
    def n_beta(self) -> int:
        return (self.n_electrons - self.ms2) // 2

    def one_body(self, i: int, j: int) -> float:
        self._check_orbital(i, j)
        return self.one.get((i, j) if i >= j else (j, i), 0.0)

    def two_body(self, i: int, j: int, k: int, l: int) -> float:
        """Chemist-notation (ij|kl)."""
        self._check_orbital(i, j, k, l)
        return self.two.get(canonical_two_body_key(i, j, k, l), 0.0)

    def _check_orbital(self, *indices: int):
        for idx in indices:
            if not 0 <= idx < self.n_spatial:
                raise ValueError(f"orbital index {idx} outside [0, {self.n_spatial})")

    def one_body_entries(self) -> Iterable[tuple[int, int, float]]:
        for (i, j), val in sorted(self.one.items()):
            yield i, j, val

    def two_body_entries(self) -> Iterable[tuple[int, int, int, int, float]]:
        for (i, j, k, l), val in sorted(self.two.items()):
            yield i, j, k, l, val


def _parse_value(token: str, line_no: int) -> float:
    try:
        return float(token.replace("D", "E").replace("d", "e"))
    except ValueError:
        raise FormatError(f"non-numeric value {token!r}", line=line_no) from None


def _parse_index(token: str, line_no: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise FormatError(f"non-integer orbital index {token!r}", line=line_no) from None


def parse_fcidump(source: str | TextIO) -> MolecularIntegrals:
    """Parse FCIDUMP text (string or file-like) into MolecularIntegrals."""
    stream = io.StringIO(source) if isinstance(source, str) else source

    header_chunks: list[str] = []
    line_no = 0
    in_header = True
    data_lines: list[tuple[int, str]] = []
    for raw in stream:
        line_no += 1
        line = raw.strip()
        if not line:
            continue
        if in_header:
            upper = line.upper()
            end = None
            for closer in ("&END", "/"):
                pos = upper.find(closer)
                if pos >= 0 and (end is None or pos < end[0]):
                    end = (pos, closer)
            if end is not None:
                header_chunks.append(line[: end[0]])
                in_header = False
            else:
                header_chunks.append(line)
            continue
        data_lines.append((line_no, line))
    if in_header:
        raise FormatError("header never closed by '/' or '&END'")

    header_text = " ".join(header_chunks)
    keys: dict[str, str] = {}
    for match in _HEADER_KEY_RE.finditer(header_text):
        keys[match.group(1).upper()] = match.group(2).strip().rstrip(",").strip()

    def required_int(name: str) -> int:
        if name not in keys:
            raise FormatError(f"header missing required key {name}")
        try:
            return int(keys[name])
        except ValueError:
            raise FormatError(f"header key {name} has non-integer value {keys[name]!r}") from None

    norb = required_int("NORB")
    nelec = required_int("NELEC")
    ms2 = int(keys.get("MS2", "0") or "0")

    core = 0.0
    one: dict[tuple[int, int], float] = {}
    two: dict[tuple[int, int, int, int], float] = {}
    for lno, line in data_lines:
        tokens = line.split()
        if len(tokens) != 5:
            raise FormatError(
                f"expected 'value i j k l', got {len(tokens)} fields", line=lno
            )
        value = _parse_value(tokens[0], lno)
        i, j, k, l = (_parse_index(t, lno) for t in tokens[1:])
        for name, idx in zip("ijkl", (i, j, k, l)):
            if idx < 0 or idx > norb:
                raise FormatError(
                    f"index {name}={idx} outside [0, NORB={norb}]", line=lno
                )
        if i == j == k == l == 0:
            core = value
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise FormatError(
                    f"one-body line needs both i and j nonzero, got {i} {j}", line=lno
                )
            a, b = i - 1, j - 1
            one[(a, b) if a >= b else (b, a)] = value
        else:
            if 0 in (i, j, k, l):
                raise FormatError(
                    f"two-body line has zero index among {i} {j} {k} {l}", line=lno
                )
            two[canonical_two_body_key(i - 1, j - 1, k - 1, l - 1)] = value

    return MolecularIntegrals(
        n_spatial=norb, n_electrons=nelec, ms2=ms2, core_energy=core, one=one, two=two
    )


def write_fcidump(mol: MolecularIntegrals, dest: TextIO | None = None) -> str:
    """Serialize integrals back to FCIDUMP text; returns the text."""
    out = io.StringIO()
    out.write(f"&FCI NORB={mol.n_spatial},NELEC={mol.n_electrons},MS2={mol.ms2},\n")
    out.write(f" ORBSYM={'1,' * mol.n_spatial}\n ISYM=1,\n&END\n")
    fmt = "{:24.17g} {:4d} {:4d} {:4d} {:4d}\n".format
    for i, j, k, l, val in mol.two_body_entries():
        out.write(fmt(val, i + 1, j + 1, k + 1, l + 1))
    for i, j, val in mol.one_body_entries():
        out.write(fmt(val, i + 1, j + 1, 0, 0))
    out.write(fmt(mol.core_energy, 0, 0, 0, 0))
    text = out.getvalue()
    if dest is not None:
        dest.write(text)
    return text
