import io

import pytest

from qaoalab.errors import FormatError
from qaoalab.fcidump import (
    MolecularIntegrals,
    canonical_two_body_key,
    parse_fcidump,
    two_body_images,
    write_fcidump,
)

MINIMAL = """\
&FCI NORB=2,NELEC=2,MS2=0,
 ORBSYM=1,1,
 ISYM=1,
&END
 0.5   1 1 0 0
-1.1   0 0 0 0
"""


class TestParse:
    def test_minimal_header_and_fields(self):
        mol = parse_fcidump(MINIMAL)
        assert mol.n_spatial == 2
        assert mol.n_electrons == 2
        assert mol.ms2 == 0
        assert mol.one_body(0, 0) == pytest.approx(0.5)
        assert mol.core_energy == pytest.approx(-1.1)

    def test_accepts_slash_closer_and_case(self):
        text = "&fci norb=3, nelec=2, ms2=0 /\n 0.25 1 2 0 0\n"
        mol = parse_fcidump(text)
        assert mol.n_spatial == 3
        assert mol.one_body(0, 1) == pytest.approx(0.25)
        assert mol.one_body(1, 0) == pytest.approx(0.25)

    def test_fortran_d_exponent(self):
        text = "&FCI NORB=1,NELEC=1,MS2=1 /\n 1.5D-2 1 1 0 0\n"
        assert parse_fcidump(text).one_body(0, 0) == pytest.approx(0.015)

    def test_two_body_symmetry_closure(self):
        text = "&FCI NORB=2,NELEC=2,MS2=0 /\n 0.25 1 2 1 2\n"
        mol = parse_fcidump(text)
        for i, j, k, l in two_body_images(0, 1, 0, 1):
            assert mol.two_body(i, j, k, l) == pytest.approx(0.25)

    def test_file_like_input(self):
        mol = parse_fcidump(io.StringIO(MINIMAL))
        assert mol.n_spatial == 2

    def test_missing_norb(self):
        with pytest.raises(FormatError, match="NORB"):
            parse_fcidump("&FCI NELEC=2,MS2=0 /\n 0.5 1 1 0 0\n")

    def test_missing_nelec(self):
        with pytest.raises(FormatError, match="NELEC"):
            parse_fcidump("&FCI NORB=2 /\n 0.5 1 1 0 0\n")

    def test_index_out_of_bounds_names_line(self):
        with pytest.raises(FormatError, match="line 2"):
            parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0 /\n 0.5 3 1 0 0\n")

    def test_non_numeric_value_names_line(self):
        with pytest.raises(FormatError, match="line 3"):
            parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0 /\n 0.5 1 1 0 0\n oops 1 1 0 0\n")

    def test_unclosed_header(self):
        with pytest.raises(FormatError, match="header"):
            parse_fcidump("&FCI NORB=2,NELEC=2\n")


class TestCanonicalKey:
    def test_all_images_share_key(self):
        key = canonical_two_body_key(0, 1, 2, 3)
        for image in two_body_images(0, 1, 2, 3):
            assert canonical_two_body_key(*image) == key

    def test_distinct_classes_distinct_keys(self):
        assert canonical_two_body_key(0, 0, 1, 1) != canonical_two_body_key(0, 1, 0, 1)


class TestRoundTrip:
    def test_write_then_parse_is_identity(self, h2_integrals):
        text = write_fcidump(h2_integrals)
        again = parse_fcidump(text)
        assert again.n_spatial == h2_integrals.n_spatial
        assert again.n_electrons == h2_integrals.n_electrons
        assert again.ms2 == h2_integrals.ms2
        assert again.core_energy == h2_integrals.core_energy
        assert again.one == h2_integrals.one
        assert again.two == h2_integrals.two

    def test_invariant_validation(self):
        with pytest.raises(ValueError):
            MolecularIntegrals(n_spatial=2, n_electrons=5, ms2=1, core_energy=0.0)
        with pytest.raises(ValueError):
            MolecularIntegrals(n_spatial=2, n_electrons=2, ms2=1, core_energy=0.0)
