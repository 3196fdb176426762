"""Jordan-Wigner compilation of second-quantized operators to Pauli sums.

Spin-orbital to qubit conventions:
  * interleaved (default): spin-up of spatial orbital q sits at qubit 2q,
    spin-down at qubit 2q+1.
  * blocked: all spin-up orbitals first (qubit q), then spin-down (qubit
    n_spatial + q).

Bit k of a basis-state index is the occupation of spin-orbital k.  The
compiled Hamiltonian is the standard FCIDUMP-defined one,

    H = E_core + sum_{pq,s} h_pq a+_{ps} a_{qs}
               + 1/2 sum_{pqrs,st} (pq|rs) a+_{ps} a+_{rt} a_{st} a_{qs}

with chemist-notation (pq|rs), spatial indices pqrs and spins s,t.
"""

from __future__ import annotations

from .errors import ValidationError
from .fcidump import MolecularIntegrals, two_body_images
from .pauli import DEFAULT_DROP_TOL, PauliString, PauliSum, _I_POWERS

SPIN_UP = 0
SPIN_DOWN = 1

ORDERINGS = ("interleaved", "blocked")


def spin_orbital_index(spatial: int, spin: int, n_spatial: int, ordering: str) -> int:
    """Qubit index of (spatial orbital, spin) under the chosen ordering."""
    if ordering == "interleaved":
        return 2 * spatial + spin
    if ordering == "blocked":
        return spatial + spin * n_spatial
    raise ValueError(f"unknown ordering {ordering!r}; choose from {ORDERINGS}")


def jw_ladder(mode: int, n_qubits: int, kind: str) -> PauliSum:
    """Jordan-Wigner ladder operator on one fermionic mode.

    ``annihilate`` gives (X + iY)/2 with Z strings on all lower modes,
    ``create`` its adjoint (X - iY)/2 with the same parity string.
    """
    if not 0 <= mode < n_qubits:
        raise ValueError(f"mode {mode} out of range for {n_qubits} qubits")
    if kind not in ("create", "annihilate"):
        raise ValueError(f"kind must be 'create' or 'annihilate', got {kind!r}")
    parity = (1 << mode) - 1
    x_string = PauliString(1 << mode, parity, n_qubits)
    y_string = PauliString(1 << mode, parity | (1 << mode), n_qubits)
    y_coeff = -0.5j if kind == "create" else 0.5j
    return PauliSum.from_terms([(0.5, x_string), (y_coeff, y_string)])


def number_operator(n_qubits: int) -> PauliSum:
    """Total particle number sum_k (I - Z_k)/2."""
    terms: dict[tuple[int, int], complex] = {(0, 0): n_qubits / 2}
    for k in range(n_qubits):
        terms[(0, 1 << k)] = -0.5
    return PauliSum(n_qubits, terms)


def sz_operator(n_spatial: int, ordering: str = "interleaved") -> PauliSum:
    """Total spin projection S_z = (N_up - N_down)/2 in units of hbar."""
    n_qubits = 2 * n_spatial
    terms: dict[tuple[int, int], complex] = {}
    for q in range(n_spatial):
        for spin, sign in ((SPIN_UP, -0.5), (SPIN_DOWN, 0.5)):
            k = spin_orbital_index(q, spin, n_spatial, ordering)
            # n_k = (I - Z_k)/2, so S_z picks up -(+-1/2)/2 Z_k per mode.
            terms[(0, 1 << k)] = terms.get((0, 1 << k), 0.0) + sign / 2
    return PauliSum(n_qubits, terms)


class _TermAccumulator:
    """Accumulates coeff * (product of ladder operators) into one mask dict."""

    def __init__(self, n_qubits: int):
        self.n_qubits = n_qubits
        self.acc: dict[tuple[int, int], complex] = {}
        self._ladders: dict[tuple[int, str], list[tuple[tuple[int, int], complex]]] = {}

    def _ladder_terms(self, mode: int, kind: str) -> list[tuple[tuple[int, int], complex]]:
        key = (mode, kind)
        if key not in self._ladders:
            ladder = jw_ladder(mode, self.n_qubits, kind)
            self._ladders[key] = [
                ((s.x_mask, s.z_mask), c) for c, s in ladder.terms
            ]
        return self._ladders[key]

    def add_product(self, coeff: complex, factors: list[tuple[int, str]]):
        """Add coeff * prod_k ladder(mode_k, kind_k), left to right."""
        product: list[tuple[tuple[int, int], complex]] = [((0, 0), coeff)]
        for mode, kind in factors:
            ladder = self._ladder_terms(mode, kind)
            new: dict[tuple[int, int], complex] = {}
            for (x1, z1), c1 in product:
                e1 = (x1 & z1).bit_count()
                for (x2, z2), c2 in ladder:
                    x3 = x1 ^ x2
                    z3 = z1 ^ z2
                    k = (e1 + (x2 & z2).bit_count() - (x3 & z3).bit_count()) % 4
                    phase = _I_POWERS[k]
                    if (z1 & x2).bit_count() & 1:
                        phase = -phase
                    key = (x3, z3)
                    new[key] = new.get(key, 0.0) + c1 * c2 * phase
            product = list(new.items())
        for key, c in product:
            self.acc[key] = self.acc.get(key, 0.0) + c


def jordan_wigner(
    mol: MolecularIntegrals,
    ordering: str = "interleaved",
    drop_tol: float = DEFAULT_DROP_TOL,
) -> PauliSum:
    """Compile molecular integrals to a qubit Hamiltonian on 2*n_spatial qubits.

    The result is Hermitian, includes the core energy on the identity term,
    and commutes with both the total particle number and S_z.
    """
    if ordering not in ORDERINGS:
        raise ValueError(f"unknown ordering {ordering!r}; choose from {ORDERINGS}")
    n_spatial = mol.n_spatial
    n_qubits = 2 * n_spatial
    acc = _TermAccumulator(n_qubits)
    acc.acc[(0, 0)] = complex(mol.core_energy)

    def qubit(p: int, spin: int) -> int:
        return spin_orbital_index(p, spin, n_spatial, ordering)

    for i, j, val in mol.one_body_entries():
        if val == 0.0:
            continue
        pairs = {(i, j), (j, i)}
        for p, q in pairs:
            for spin in (SPIN_UP, SPIN_DOWN):
                acc.add_product(
                    val, [(qubit(p, spin), "create"), (qubit(q, spin), "annihilate")]
                )

    for i, j, k, l, val in mol.two_body_entries():
        if val == 0.0:
            continue
        for p, q, r, s in two_body_images(i, j, k, l):
            # (pq|rs) couples a+_{p,sigma} a_{q,sigma} with a+_{r,tau} a_{s,tau}.
            for sigma in (SPIN_UP, SPIN_DOWN):
                for tau in (SPIN_UP, SPIN_DOWN):
                    acc.add_product(
                        0.5 * val,
                        [
                            (qubit(p, sigma), "create"),
                            (qubit(r, tau), "create"),
                            (qubit(s, tau), "annihilate"),
                            (qubit(q, sigma), "annihilate"),
                        ],
                    )

    result = PauliSum(n_qubits, acc.acc, drop_tol)
    if not result.is_hermitian():
        raise ValidationError("compiled Hamiltonian failed the hermiticity check")
    return result
