import numpy as np
import pytest

from qaoalab.fcidump import MolecularIntegrals
from qaoalab.jordan_wigner import (
    jordan_wigner,
    jw_ladder,
    number_operator,
    spin_orbital_index,
    sz_operator,
)
from qaoalab.pauli import PauliString, diagonal_part

from oracles import (
    determinants_in_sector,
    fermion_ladder_matrix,
    slater_condon_diagonal,
    slater_condon_ground_energy,
)


class TestLadder:
    def test_annihilate_mode0_single_qubit(self):
        a = jw_ladder(0, 1, "annihilate")
        assert a.coefficient(PauliString.from_label("X")) == pytest.approx(0.5)
        assert a.coefficient(PauliString.from_label("Y")) == pytest.approx(0.5j)

    def test_create_mode1_two_qubits(self):
        adag = jw_ladder(1, 2, "create")
        assert adag.coefficient(PauliString.from_label("ZX")) == pytest.approx(0.5)
        assert adag.coefficient(PauliString.from_label("ZY")) == pytest.approx(-0.5j)

    def test_mode_out_of_range(self):
        with pytest.raises(ValueError):
            jw_ladder(4, 4, "create")

    def test_dense_matches_fermion_oracle(self):
        for k in range(4):
            got = jw_ladder(k, 4, "create").to_dense()
            want = fermion_ladder_matrix(k, 4, create=True)
            assert np.max(np.abs(got - want)) < 1e-12

    @pytest.mark.parametrize("n", [2, 4, 6])
    def test_create_annihilate_adjoint(self, n):
        for k in range(n):
            c = jw_ladder(k, n, "create").to_dense()
            a = jw_ladder(k, n, "annihilate").to_dense()
            assert np.max(np.abs(c - a.conj().T)) < 1e-12

    @pytest.mark.parametrize("n", [2, 4, 6])
    def test_canonical_anticommutation(self, n):
        eye = np.eye(1 << n)
        ladders = {
            (k, kind): jw_ladder(k, n, kind).to_dense()
            for k in range(n) for kind in ("create", "annihilate")
        }
        for j in range(n):
            for k in range(n):
                a_j = ladders[(j, "annihilate")]
                c_k = ladders[(k, "create")]
                anti = a_j @ c_k + c_k @ a_j
                want = eye if j == k else 0.0 * eye
                assert np.max(np.abs(anti - want)) < 1e-12
                a_k = ladders[(k, "annihilate")]
                assert np.max(np.abs(a_j @ a_k + a_k @ a_j)) < 1e-12


class TestOperators:
    def test_number_operator_counts_bits(self):
        num = number_operator(3).to_dense()
        diag = np.diag(num).real
        for j in range(8):
            assert diag[j] == pytest.approx(bin(j).count("1"))
        assert np.max(np.abs(num - np.diag(diag))) < 1e-14

    def test_sz_operator_interleaved(self):
        sz = sz_operator(2).to_dense()
        diag = np.diag(sz).real
        # qubit 0 = up(orb 0), 1 = down(orb 0), 2 = up(orb 1), 3 = down(orb 1)
        assert diag[0b0001] == pytest.approx(0.5)
        assert diag[0b0010] == pytest.approx(-0.5)
        assert diag[0b0101] == pytest.approx(1.0)
        assert diag[0b0011] == pytest.approx(0.0)

    def test_orderings(self):
        assert spin_orbital_index(1, 0, 3, "interleaved") == 2
        assert spin_orbital_index(1, 1, 3, "interleaved") == 3
        assert spin_orbital_index(1, 0, 3, "blocked") == 1
        assert spin_orbital_index(1, 1, 3, "blocked") == 4


class TestHamiltonian:
    def test_number_operator_term(self):
        # a+_0 a_0 with h_00 = eps on one spatial orbital (two spin orbitals)
        mol = MolecularIntegrals(
            n_spatial=1, n_electrons=1, ms2=1, core_energy=0.0, one={(0, 0): 0.7}
        )
        h = jordan_wigner(mol)
        assert h.coefficient(PauliString.from_label("II")) == pytest.approx(0.7)
        assert h.coefficient(PauliString.from_label("ZI")) == pytest.approx(-0.35)
        assert h.coefficient(PauliString.from_label("IZ")) == pytest.approx(-0.35)

    def test_zero_integrals_identity(self):
        mol = MolecularIntegrals(
            n_spatial=2, n_electrons=2, ms2=0, core_energy=-3.25
        )
        h = jordan_wigner(mol)
        assert h.n_terms == 1
        assert h.coefficient(PauliString.from_label("IIII")) == pytest.approx(-3.25)

    def test_h2_ground_energy_matches_full_ci(self, h2_integrals):
        h = jordan_wigner(h2_integrals)
        dense_e0 = float(np.linalg.eigvalsh(h.to_dense())[0])
        fci_e0 = slater_condon_ground_energy(h2_integrals)
        assert abs(dense_e0 - fci_e0) < 1e-8

    def test_h2_blocked_ordering_same_spectrum(self, h2_integrals):
        interleaved = np.linalg.eigvalsh(jordan_wigner(h2_integrals).to_dense())
        blocked = np.linalg.eigvalsh(
            jordan_wigner(h2_integrals, ordering="blocked").to_dense()
        )
        assert np.max(np.abs(interleaved - blocked)) < 1e-10

    @pytest.mark.parametrize("ordering", ["interleaved", "blocked"])
    def test_commutes_with_number_and_sz(self, h2_integrals, ordering):
        h = jordan_wigner(h2_integrals, ordering=ordering).to_dense()
        num = number_operator(4).to_dense()
        sz = sz_operator(2, ordering).to_dense()
        assert np.max(np.abs(h @ num - num @ h)) < 1e-12
        assert np.max(np.abs(h @ sz - sz @ h)) < 1e-10

    def test_symbolic_commutators_vanish(self, h2_integrals):
        h = jordan_wigner(h2_integrals)
        assert h.commutator(number_operator(4)).simplify(1e-10).n_terms == 0
        assert h.commutator(sz_operator(2)).simplify(1e-10).n_terms == 0

    def test_diagonal_matches_slater_condon(self, h2_integrals):
        h = jordan_wigner(h2_integrals)
        diag = diagonal_part(h)
        for det in determinants_in_sector(h2_integrals):
            want = slater_condon_diagonal(h2_integrals, det)
            assert abs(diag.values[det] - want) < 1e-10

    def test_random_integrals_match_slater_condon(self):
        # 3 spatial orbitals, 6 qubits, random symmetric integrals
        rng = np.random.default_rng(5)
        n = 3
        one = {}
        for i in range(n):
            for j in range(i + 1):
                one[(i, j)] = rng.normal(scale=0.5)
        from qaoalab.fcidump import canonical_two_body_key

        two = {}
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        key = canonical_two_body_key(i, j, k, l)
                        if key not in two:
                            two[key] = rng.normal(scale=0.2)
        mol = MolecularIntegrals(
            n_spatial=n, n_electrons=2, ms2=0, core_energy=rng.normal(),
            one=one, two=two,
        )
        h = jordan_wigner(mol)
        assert h.is_hermitian()
        dets = determinants_in_sector(mol)
        from oracles import slater_condon_matrix

        fci = slater_condon_matrix(mol, dets)
        dense = h.to_dense()
        block = dense[np.ix_(dets, dets)]
        assert np.max(np.abs(block - fci)) < 1e-10
