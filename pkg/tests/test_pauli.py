import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nwise.errors import CapacityError, UsageError
from nwise.pauli import (DENSE_CAP, OperatorSum, PauliString, anticommutes, commutator, commutes,
                         pauli_multiply, string_to_dense, to_dense)

from oracles import word

letters = st.sampled_from("IXYZ")


def strings(n):
    return st.tuples(st.lists(letters, min_size=n, max_size=n), st.integers(0, 3)).map(
        lambda p: PauliString(tuple(p[0]), p[1]))


pairs = st.integers(1, 5).flatmap(lambda n: st.tuples(strings(n), strings(n)))


class TestPauliString:
    def test_from_label_phases(self):
        assert PauliString.from_label("-iXY") == PauliString(("X", "Y"), 3)
        assert PauliString.from_label("+ZZ").power == 0
        assert str(PauliString(("X", "Z"), 2)) == "-XZ"

    def test_invalid_letter(self):
        with pytest.raises(UsageError):
            PauliString(("A",))

    def test_single_site_range(self):
        assert PauliString.single(3, 2, "X").letters == ("I", "X", "I")
        with pytest.raises(UsageError):
            PauliString.single(3, 4, "X")

    @pytest.mark.parametrize("a,b,expect", [
        ("X", "Y", "iZ"), ("Y", "X", "-iZ"), ("Y", "Z", "iX"), ("Z", "X", "iY"), ("X", "X", "I"),
    ])
    def test_single_site_table(self, a, b, expect):
        assert PauliString.from_label(a) * PauliString.from_label(b) == PauliString.from_label(expect)

    def test_length_mismatch(self):
        with pytest.raises(UsageError):
            pauli_multiply(PauliString.from_label("XX"), PauliString.from_label("X"))


class TestDense:
    @given(strings(3))
    def test_matches_kron(self, s):
        np.testing.assert_allclose(string_to_dense(s), s.phase * word("".join(s.letters)), atol=0)

    @given(pairs)
    def test_product_is_homomorphic(self, ab):
        a, b = ab
        np.testing.assert_allclose(string_to_dense(a * b), string_to_dense(a) @ string_to_dense(b), atol=1e-14)

    @given(pairs)
    def test_anticommutation_matches_matrices(self, ab):
        a, b = ab
        ma, mb = string_to_dense(a), string_to_dense(b)
        assert anticommutes(a, b) == np.allclose(ma @ mb, -mb @ ma)

    def test_cap(self):
        with pytest.raises(CapacityError):
            to_dense(PauliString.uniform(DENSE_CAP + 1, "Z"))


class TestOperatorSum:
    def test_merges_and_drops(self):
        xx = PauliString.from_label("XX")
        op = OperatorSum(2, [(1.0, xx), (-1.0, xx)])
        assert len(op) == 0

    def test_phase_folded_into_coefficient(self):
        op = OperatorSum(1, [(2.0, PauliString.from_label("-iZ"))])
        (c, s), = op.terms
        assert c == -2j and s.power == 0

    def test_scalar_and_operator_products(self):
        x = OperatorSum(1, [(1.0, PauliString.from_label("X"))])
        y = OperatorSum(1, [(1.0, PauliString.from_label("Y"))])
        np.testing.assert_allclose(to_dense(x * y), 1j * word("Z"))
        np.testing.assert_allclose(to_dense(3 * x - x), 2 * word("X"))

    @given(pairs)
    def test_commutator_matches_dense(self, ab):
        a, b = (OperatorSum(s.n, [(0.7, s)]) for s in ab)
        ma, mb = to_dense(a), to_dense(b)
        np.testing.assert_allclose(to_dense(commutator(a, b)), ma @ mb - mb @ ma, atol=1e-13)

    def test_uniform_couplings_commute_with_pair_parity(self):
        zz = PauliString.from_label("IZZ")
        for letter in "XYZ":
            assert commutes(PauliString.uniform(3, letter), zz)
        assert not commutes(PauliString.from_label("XII"), PauliString.from_label("ZII"))
