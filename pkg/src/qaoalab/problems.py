"""Problem instances: cost Hamiltonian, mixer, initial state, and metadata.

Three families are supported: molecular Hamiltonians with a diagonal
Hartree-Fock mixer (or the XY alternative), random 3-SAT with the standard
transverse-field setup, and fully connected random Ising models.  Instances
are immutable; random generation uses counter-based Philox streams keyed by
explicit seeds only.
"""

from __future__ import annotations

import io
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

import numpy as np

from .errors import FormatError, ShapeError, ValidationError
from .fcidump import MolecularIntegrals
from .jordan_wigner import (
    SPIN_DOWN,
    SPIN_UP,
    jordan_wigner,
    number_operator,
    spin_orbital_index,
    sz_operator,
)
from .pauli import DiagonalOperator, PauliSum, diagonal_part
from .statevector import StateVector, sector_indices


@dataclass(frozen=True)
class MixerSpec:
    """Mixer choice: a diagonal operator, the product-form X mixer, or an XY sum."""

    kind: str  # "diagonal" | "transverse_x" | "xy"
    diagonal: DiagonalOperator | None = None
    pauli: PauliSum | None = None

    def __post_init__(self):
        if self.kind == "diagonal":
            if self.diagonal is None:
                raise ValidationError("diagonal mixer needs a DiagonalOperator payload")
        elif self.kind == "xy":
            if self.pauli is None or not self.pauli.is_hermitian():
                raise ValidationError("xy mixer needs a Hermitian PauliSum payload")
        elif self.kind != "transverse_x":
            raise ValidationError(f"unknown mixer kind {self.kind!r}")


def x_mixer_spec(n_qubits: int) -> MixerSpec:
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    return MixerSpec(kind="transverse_x")


def x_mixer_operator(n_qubits: int) -> PauliSum:
    """The transverse-field mixer Hamiltonian -sum_k X_k.

    The sign makes the uniform superposition |+>^N the mixer's ground
    state, so ramp protocols adiabatically connect it to the cost ground
    state.  The mixer unitary is exp(-i beta H_B) = exp(+i beta sum_k X_k).
    """
    return PauliSum(n_qubits, {(1 << k, 0): -1.0 for k in range(n_qubits)})


def xy_mixer(n_qubits: int) -> PauliSum:
    """Complete-graph XY mixer sum_{j<k} (X_j X_k + Y_j Y_k)."""
    if n_qubits < 2:
        raise ValueError("the XY mixer needs at least 2 qubits")
    terms: dict[tuple[int, int], complex] = {}
    for j in range(n_qubits):
        for k in range(j + 1, n_qubits):
            pair = (1 << j) | (1 << k)
            terms[(pair, 0)] = 1.0       # X_j X_k
            terms[(pair, pair)] = 1.0    # Y_j Y_k
    return PauliSum(n_qubits, terms)


def initial_state(kind: str, n_qubits: int, bits: "tuple[int, ...] | None" = None,
                  n_particles: int | None = None) -> StateVector:
    """Named initial states: an occupation bitstring, uniform, or a Dicke state."""
    if kind == "hf_bitstring":
        if bits is None or len(bits) != n_qubits:
            raise ValueError("hf_bitstring needs one bit per qubit")
        return StateVector.from_bits(bits)
    if kind == "uniform":
        return StateVector.uniform(n_qubits)
    if kind == "dicke":
        if n_particles is None:
            raise ValueError("dicke initial state needs n_particles")
        return StateVector.dicke(n_qubits, n_particles)
    raise ValueError(f"unknown initial state kind {kind!r}")


@dataclass(frozen=True)
class ProblemInstance:
    """A complete QAOA problem: cost, mixer, initial state, sector, label."""

    cost: PauliSum | DiagonalOperator
    mixer: MixerSpec
    initial: StateVector
    n_qubits: int
    symmetry_sector: tuple[int, int | None] | None = None  # (n_particles, 2*Sz or None)
    label: str = ""
    ordering: str = "interleaved"
    notes: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if abs(self.initial.norm() - 1.0) > 1e-12:
            raise ValidationError("initial state must have unit norm")
        if self.cost.n_qubits != self.n_qubits or self.initial.n_qubits != self.n_qubits:
            raise ShapeError("cost/initial qubit counts disagree with the instance")
        if self.symmetry_sector is not None:
            self._validate_sector()

    def _validate_sector(self):
        n_particles, ms2 = self.symmetry_sector
        indices = sector_indices(self.n_qubits, n_particles, ms2, self.ordering)
        if self.initial.sector is None:
            weight = self.initial.sector_weight(indices)
            if abs(weight - 1.0) > 1e-10:
                raise ValidationError(
                    f"initial state carries weight {1 - weight:.3e} outside "
                    f"the (n={n_particles}, 2Sz={ms2}) sector"
                )
        elif not np.array_equal(self.initial.sector, indices):
            raise ValidationError("initial state's sector map mismatches the declared sector")
        if isinstance(self.cost, PauliSum):
            self._check_symmetry(self.cost, "cost", check_sz=ms2 is not None)
        if self.mixer.kind == "xy":
            self._check_symmetry(self.mixer.pauli, "xy mixer", check_sz=False)
            if ms2 is not None:
                raise ValidationError("the XY mixer conserves only particle number, not S_z")
        if self.mixer.kind == "transverse_x":
            raise ValidationError(
                "the transverse-field mixer cannot be used with a symmetry sector"
            )

    def _check_symmetry(self, h: PauliSum, name: str, check_sz: bool):
        # symbolic commutators are exact and cheap at any size
        num = number_operator(self.n_qubits)
        if h.commutator(num).simplify(1e-10).n_terms:
            raise ValidationError(f"{name} does not commute with particle number")
        if check_sz and self.n_qubits % 2 == 0:
            sz = sz_operator(self.n_qubits // 2, self.ordering)
            if h.commutator(sz).simplify(1e-10).n_terms:
                raise ValidationError(f"{name} does not commute with S_z")

    def sector_basis(self) -> np.ndarray | None:
        if self.symmetry_sector is None:
            return None
        n_particles, ms2 = self.symmetry_sector
        return sector_indices(self.n_qubits, n_particles, ms2, self.ordering)


# -- chemistry -------------------------------------------------------------------


def hf_bits(mol: MolecularIntegrals, ordering: str = "interleaved") -> tuple[int, ...]:
    """Occupation bitstring of the Hartree-Fock determinant.

    Occupies the lowest n_alpha spin-up and n_beta spin-down spin orbitals,
    assuming the FCIDUMP orbital order is the SCF energy order.
    """
    bits = [0] * (2 * mol.n_spatial)
    for q in range(mol.n_alpha):
        bits[spin_orbital_index(q, SPIN_UP, mol.n_spatial, ordering)] = 1
    for q in range(mol.n_beta):
        bits[spin_orbital_index(q, SPIN_DOWN, mol.n_spatial, ordering)] = 1
    return tuple(bits)


def fock_orbital_diagonal(mol: MolecularIntegrals, ordering: str = "interleaved"
                          ) -> DiagonalOperator:
    """Diagonal mixer alternative: sum of occupied one-body diagonal energies."""
    n_qubits = 2 * mol.n_spatial
    values = np.zeros(1 << n_qubits)
    idx = np.arange(1 << n_qubits, dtype=np.uint64)
    for q in range(mol.n_spatial):
        eps = mol.one_body(q, q)
        for spin in (SPIN_UP, SPIN_DOWN):
            k = spin_orbital_index(q, spin, mol.n_spatial, ordering)
            occupied = (np.bitwise_and(idx, np.uint64(1 << k)) != 0)
            values += eps * occupied
    return DiagonalOperator(values, n_qubits)


def build_chemistry_problem(
    mol: MolecularIntegrals,
    mixer_mode: str = "diag_of_cost",
    mixer_kind: str = "hf",
    initial_kind: str = "hf",
    ordering: str = "interleaved",
    label: str = "",
) -> ProblemInstance:
    """Molecular instance: JW cost, a feasibility-preserving mixer, HF start.

    ``mixer_mode`` picks the diagonal used by the hf mixer: ``diag_of_cost``
    (the cost Hamiltonian's diagonal, the default) or ``fock_orbital`` (sum
    of one-body orbital energies over occupations).  ``mixer_kind`` may be
    ``hf`` (diagonal), ``xy``, or ``x`` (full space only, drops the sector).
    ``initial_kind`` is ``hf``, ``dicke``, or ``uniform``.
    """
    cost = jordan_wigner(mol, ordering=ordering)
    n_qubits = 2 * mol.n_spatial

    if mixer_mode == "diag_of_cost":
        hf_diag = diagonal_part(cost)
    elif mixer_mode == "fock_orbital":
        hf_diag = fock_orbital_diagonal(mol, ordering)
    else:
        raise ValueError(f"unknown mixer_mode {mixer_mode!r}")

    if mixer_kind == "hf":
        mixer = MixerSpec(kind="diagonal", diagonal=hf_diag)
    elif mixer_kind == "xy":
        mixer = MixerSpec(kind="xy", pauli=xy_mixer(n_qubits))
    elif mixer_kind == "x":
        mixer = MixerSpec(kind="transverse_x")
    else:
        raise ValueError(f"unknown mixer_kind {mixer_kind!r}")

    bits = hf_bits(mol, ordering)
    if initial_kind == "hf":
        init = StateVector.from_bits(bits)
    elif initial_kind == "dicke":
        init = StateVector.dicke(n_qubits, mol.n_electrons)
    elif initial_kind == "uniform":
        init = StateVector.uniform(n_qubits)
    else:
        raise ValueError(f"unknown initial_kind {initial_kind!r}")

    if mixer_kind == "x" or initial_kind == "uniform":
        sector = None
    elif mixer_kind == "xy" or initial_kind == "dicke":
        # particle number is conserved; S_z is mixed by XY hops / Dicke spread
        sector = (mol.n_electrons, None)
    else:
        sector = (mol.n_electrons, mol.ms2)

    notes: dict = {}
    hf_index = sum(1 << k for k, b in enumerate(bits) if b)
    diag_min = hf_diag.min_value()
    hf_value = float(hf_diag.values[hf_index])
    is_argmin = bool(np.isclose(hf_value, diag_min, atol=1e-12))
    unique = int(np.sum(np.isclose(hf_diag.values, diag_min, atol=1e-12))) == 1
    notes["hf_is_mixer_argmin"] = is_argmin and unique
    if not (is_argmin and unique):
        notes["warning"] = (
            "Hartree-Fock bitstring is not the unique minimum of the mixer diagonal"
        )

    return ProblemInstance(
        cost=cost, mixer=mixer, initial=init, n_qubits=n_qubits,
        symmetry_sector=sector, label=label or "chemistry", ordering=ordering,
        notes=notes,
    )


# -- random 3-SAT ------------------------------------------------------------------


@dataclass(frozen=True)
class SatFormula:
    """CNF formula; clause literals are (variable index, negated flag)."""

    n_vars: int
    clauses: tuple[tuple[tuple[int, bool], ...], ...]

    def __post_init__(self):
        for clause in self.clauses:
            vs = [v for v, _ in clause]
            if len(set(vs)) != len(vs):
                raise ValidationError(f"repeated variable in clause {clause}")
            for v, _ in clause:
                if not 0 <= v < self.n_vars:
                    raise ValidationError(f"variable {v} out of range")

    @property
    def n_clauses(self) -> int:
        return len(self.clauses)

    def clause_satisfied(self, clause, assignment: int) -> bool:
        return any(((assignment >> v) & 1) != negated for v, negated in clause)

    def count_unsatisfied(self, assignment: int) -> int:
        return sum(
            0 if self.clause_satisfied(c, assignment) else 1 for c in self.clauses
        )


def random_3sat(n_vars: int, n_clauses: int, seed: int) -> SatFormula:
    """Random 3-SAT: per clause, 3 distinct variables, fair-coin negations."""
    if n_vars < 3:
        raise ValueError("random 3-SAT needs at least 3 variables")
    rng = np.random.Generator(np.random.Philox(seed))
    clauses = []
    for _ in range(n_clauses):
        variables = rng.choice(n_vars, size=3, replace=False)
        negations = rng.random(3) < 0.5
        clauses.append(tuple(
            (int(v), bool(neg)) for v, neg in zip(variables, negations)
        ))
    return SatFormula(n_vars=n_vars, clauses=tuple(clauses))


def sat_cost(formula: SatFormula, strict_3sat: bool = False) -> DiagonalOperator:
    """Unsatisfied-clause count per assignment (bit i of x = value of var i)."""
    if strict_3sat and any(len(c) != 3 for c in formula.clauses):
        raise ValidationError("formula contains clauses of width != 3")
    n = formula.n_vars
    idx = np.arange(1 << n, dtype=np.uint64)
    values = np.zeros(idx.size)
    for clause in formula.clauses:
        all_false = np.ones(idx.size, dtype=bool)
        for v, negated in clause:
            bit = (np.bitwise_and(idx, np.uint64(1 << v)) != 0)
            literal_true = bit != negated
            all_false &= ~literal_true
        values += all_false
    return DiagonalOperator(values, n)


def parse_dimacs(source: str | TextIO, strict_3sat: bool = False) -> SatFormula:
    """DIMACS CNF reader; rejects non-3 clause widths only in strict mode."""
    stream = io.StringIO(source) if isinstance(source, str) else source
    n_vars = n_clauses = None
    clauses: list[tuple[tuple[int, bool], ...]] = []
    pending: list[int] = []
    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            m = re.match(r"p\s+cnf\s+(\d+)\s+(\d+)\s*$", line)
            if not m:
                raise FormatError(f"malformed problem line {line!r}", line=line_no)
            n_vars, n_clauses = int(m.group(1)), int(m.group(2))
            continue
        if n_vars is None:
            raise FormatError("clause data before 'p cnf' header", line=line_no)
        for token in line.split():
            try:
                lit = int(token)
            except ValueError:
                raise FormatError(f"non-integer literal {token!r}", line=line_no) from None
            if lit == 0:
                if not pending:
                    raise FormatError("empty clause", line=line_no)
                clause = tuple((abs(l) - 1, l < 0) for l in pending)
                if strict_3sat and len(clause) != 3:
                    raise FormatError(
                        f"clause of width {len(clause)} in 3-SAT mode", line=line_no
                    )
                clauses.append(clause)
                pending = []
            else:
                if abs(lit) > n_vars:
                    raise FormatError(f"literal {lit} exceeds n_vars={n_vars}", line=line_no)
                pending.append(lit)
    if pending:
        raise FormatError("last clause not terminated by 0")
    if n_vars is None:
        raise FormatError("missing 'p cnf' header")
    if n_clauses is not None and len(clauses) != n_clauses:
        raise FormatError(
            f"header announced {n_clauses} clauses, found {len(clauses)}"
        )
    return SatFormula(n_vars=n_vars, clauses=tuple(clauses))


def write_dimacs(formula: SatFormula, dest: TextIO | None = None) -> str:
    out = io.StringIO()
    out.write(f"p cnf {formula.n_vars} {formula.n_clauses}\n")
    for clause in formula.clauses:
        lits = " ".join(str(-(v + 1) if neg else (v + 1)) for v, neg in clause)
        out.write(f"{lits} 0\n")
    text = out.getvalue()
    if dest is not None:
        dest.write(text)
    return text


def build_sat_problem(formula: SatFormula, seed_label: str = "") -> ProblemInstance:
    """Standard setup: unsatisfied-count cost, X mixer, uniform initial state."""
    cost = sat_cost(formula)
    return ProblemInstance(
        cost=cost,
        mixer=x_mixer_spec(formula.n_vars),
        initial=StateVector.uniform(formula.n_vars),
        n_qubits=formula.n_vars,
        label=seed_label or f"3sat_n{formula.n_vars}_m{formula.n_clauses}",
    )


# -- fully connected Ising -----------------------------------------------------------


@dataclass(frozen=True)
class IsingInstance:
    """Fields h_i and couplings J_{ij} (i<j) of a fully connected Ising model."""

    n_spins: int
    fields: np.ndarray
    couplings: dict[tuple[int, int], float]

    def __post_init__(self):
        fields = np.asarray(self.fields, dtype=np.float64)
        fields.setflags(write=False)
        object.__setattr__(self, "fields", fields)
        if fields.size != self.n_spins:
            raise ShapeError("need one field per spin")
        for (i, j) in self.couplings:
            if not (0 <= i < j < self.n_spins):
                raise ValidationError(f"coupling key ({i},{j}) not ordered in range")


def random_ising(n_spins: int, seed: int) -> IsingInstance:
    """h_i and J_ij i.i.d. uniform on [-1, 1], all pairs present."""
    if n_spins < 2:
        raise ValueError("need at least 2 spins")
    rng = np.random.Generator(np.random.Philox(seed))
    fields = rng.uniform(-1.0, 1.0, size=n_spins)
    couplings = {
        (i, j): float(rng.uniform(-1.0, 1.0))
        for i in range(n_spins)
        for j in range(i + 1, n_spins)
    }
    return IsingInstance(n_spins=n_spins, fields=fields, couplings=couplings)


def ising_cost(instance: IsingInstance) -> DiagonalOperator:
    """sum_i h_i s_i + sum_{i<j} J_ij s_i s_j with s_i = 1 - 2*bit_i."""
    n = instance.n_spins
    idx = np.arange(1 << n, dtype=np.uint64)
    spins = np.empty((n, idx.size))
    for i in range(n):
        bit = (np.bitwise_and(idx, np.uint64(1 << i)) != 0)
        spins[i] = 1.0 - 2.0 * bit
    values = instance.fields @ spins
    for (i, j), coupling in instance.couplings.items():
        values += coupling * spins[i] * spins[j]
    return DiagonalOperator(values, n)


def build_ising_problem(instance: IsingInstance, label: str = "") -> ProblemInstance:
    cost = ising_cost(instance)
    return ProblemInstance(
        cost=cost,
        mixer=x_mixer_spec(instance.n_spins),
        initial=StateVector.uniform(instance.n_spins),
        n_qubits=instance.n_spins,
        label=label or f"ising_n{instance.n_spins}",
    )


def ising_to_json(instance: IsingInstance) -> str:
    return json.dumps({
        "n": instance.n_spins,
        "h": [float(x) for x in instance.fields],
        "J": [[i, j, v] for (i, j), v in sorted(instance.couplings.items())],
    }, indent=2)


def ising_from_json(text: str) -> IsingInstance:
    try:
        data = json.loads(text)
        n = int(data["n"])
        fields = np.asarray(data["h"], dtype=np.float64)
        couplings = {(int(i), int(j)): float(v) for i, j, v in data["J"]}
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"invalid Ising JSON: {exc}") from exc
    return IsingInstance(n_spins=n, fields=fields, couplings=couplings)


# -- instance manifests ----------------------------------------------------------


def save_instance(instance: ProblemInstance, directory: str | Path,
                  name: str | None = None) -> Path:
    """Write a manifest JSON plus payload files for one problem instance.

    Payloads: Pauli sums as operator JSON, diagonals as raw little-endian
    float64 arrays, the initial state as a statevector snapshot.
    """
    from .statevector import save_statevector

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    name = name or instance.label or "instance"

    manifest: dict = {
        "label": instance.label,
        "n_qubits": instance.n_qubits,
        "ordering": instance.ordering,
        "symmetry_sector": (
            list(instance.symmetry_sector) if instance.symmetry_sector else None
        ),
    }

    if isinstance(instance.cost, PauliSum):
        cost_file = f"{name}.cost.json"
        (directory / cost_file).write_text(instance.cost.to_json())
        manifest["cost"] = {"format": "operator_json", "path": cost_file}
    else:
        cost_file = f"{name}.cost.f64"
        (directory / cost_file).write_bytes(
            instance.cost.values.astype("<f8").tobytes()
        )
        manifest["cost"] = {"format": "diagonal_f64", "path": cost_file}

    mixer = {"kind": instance.mixer.kind}
    if instance.mixer.kind == "diagonal":
        mixer_file = f"{name}.mixer.f64"
        (directory / mixer_file).write_bytes(
            instance.mixer.diagonal.values.astype("<f8").tobytes()
        )
        mixer.update(format="diagonal_f64", path=mixer_file)
    elif instance.mixer.kind == "xy":
        mixer_file = f"{name}.mixer.json"
        (directory / mixer_file).write_text(instance.mixer.pauli.to_json())
        mixer.update(format="operator_json", path=mixer_file)
    manifest["mixer"] = mixer

    initial_file = f"{name}.initial.sv"
    save_statevector(instance.initial, directory / initial_file)
    manifest["initial"] = {"format": "snapshot", "path": initial_file}

    manifest_path = directory / f"{name}.manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2), encoding="ascii")
    return manifest_path


def load_instance(manifest_path: str | Path) -> ProblemInstance:
    """Rebuild a problem instance from its manifest and payload files."""
    from .statevector import load_statevector

    manifest_path = Path(manifest_path)
    directory = manifest_path.parent
    try:
        manifest = json.loads(manifest_path.read_text(encoding="ascii"))
        n_qubits = int(manifest["n_qubits"])
        cost_entry = manifest["cost"]
        mixer_entry = manifest["mixer"]
        initial_entry = manifest["initial"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise FormatError(f"{manifest_path}: invalid manifest: {exc}") from exc

    def read_payload(entry) -> PauliSum | DiagonalOperator:
        path = directory / entry["path"]
        if entry["format"] == "operator_json":
            return PauliSum.from_json(path.read_text())
        if entry["format"] == "diagonal_f64":
            values = np.frombuffer(path.read_bytes(), dtype="<f8")
            return DiagonalOperator(values, n_qubits)
        raise FormatError(f"{manifest_path}: unknown payload format {entry['format']!r}")

    cost = read_payload(cost_entry)
    kind = mixer_entry["kind"]
    if kind == "transverse_x":
        mixer = MixerSpec(kind="transverse_x")
    elif kind == "diagonal":
        mixer = MixerSpec(kind="diagonal", diagonal=read_payload(mixer_entry))
    elif kind == "xy":
        mixer = MixerSpec(kind="xy", pauli=read_payload(mixer_entry))
    else:
        raise FormatError(f"{manifest_path}: unknown mixer kind {kind!r}")

    initial = load_statevector(directory / initial_entry["path"])
    sector = manifest.get("symmetry_sector")
    return ProblemInstance(
        cost=cost,
        mixer=mixer,
        initial=initial,
        n_qubits=n_qubits,
        symmetry_sector=tuple(sector) if sector else None,
        label=manifest.get("label", ""),
        ordering=manifest.get("ordering", "interleaved"),
    )
