import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nwise.errors import UsageError
from nwise.pauli import to_dense
from nwise.transform import (chain_pairs, chain_unitary, pair_operator, pair_unitary, permute_index,
                             transformed_hamiltonian)

from oracles import chain, hamiltonian, pair, transformed_general


class TestPair:
    @pytest.mark.parametrize("n,j,k", [(2, 1, 2), (3, 2, 3), (4, 1, 2), (5, 3, 4)])
    def test_matches_explicit_operator(self, n, j, k):
        np.testing.assert_allclose(pair_unitary(j, k, n), pair(n, j, k), atol=0)

    @pytest.mark.parametrize("n,j,k", [(2, 1, 2), (4, 2, 3)])
    def test_unitary_and_hermitian(self, n, j, k):
        u = to_dense(pair_operator(j, k, n))
        np.testing.assert_allclose(u @ u, np.eye(1 << n), atol=1e-15)
        np.testing.assert_allclose(u, u.conj().T, atol=0)

    @pytest.mark.parametrize("j,k", [(2, 2), (0, 1), (2, 4)])
    def test_rejects_invalid_sites(self, j, k):
        with pytest.raises(UsageError):
            pair_operator(j, k, 3)


class TestChain:
    def test_pair_order(self):
        assert chain_pairs(4) == ((1, 2), (2, 3), (3, 4))
        assert chain_pairs(4, "reverse") == ((3, 4), (2, 3), (1, 2))

    @pytest.mark.parametrize("n", range(2, 8))
    def test_dense_matches_product(self, n):
        np.testing.assert_allclose(chain_unitary(n).dense, chain(n), atol=0)

    @pytest.mark.parametrize("n", [3, 6, 9])
    def test_is_permutation(self, n):
        perm = chain_unitary(n).permutation
        assert sorted(perm) == list(range(1 << n))

    @given(st.integers(2, 10).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, (1 << n) - 1))))
    def test_image_is_prefix_parity(self, nb):
        n, b = nb
        bits = [(b >> (n - 1 - i)) & 1 for i in range(n)]
        parity = np.cumsum(bits) % 2
        expect = int("".join(map(str, parity)), 2)
        u = chain_unitary(n)
        assert u.image(b) == expect == permute_index(u, b)
        assert u.preimage(expect) == b

    @given(st.integers(2, 9), st.integers(0, 2 ** 32 - 1))
    def test_apply_matches_dense(self, n, seed):
        g = np.random.default_rng(seed)
        psi = g.normal(size=1 << n) + 1j * g.normal(size=1 << n)
        u = chain_unitary(n)
        np.testing.assert_allclose(u.apply(psi), u.dense @ psi, atol=1e-14)
        np.testing.assert_allclose(u.apply_dagger(u.apply(psi)), psi, atol=0)

    def test_beyond_permutation_cap(self):
        u = chain_unitary(30)
        assert u.permutation is None
        assert u.preimage(u.image(123456789)) == 123456789

    @pytest.mark.parametrize("n", range(2, 7))
    def test_transformed_matches_closed_form(self, n, rng):
        w = rng.uniform(-2, 2, n)
        g = rng.uniform(-2, 2, 3)
        ht = transformed_hamiltonian(hamiltonian(w, *g), chain_unitary(n))
        np.testing.assert_allclose(ht, transformed_general(w, *g), atol=1e-12)

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_reverse_order_fails_closed_form(self, n, rng):
        w = rng.uniform(-2, 2, n)
        g = rng.uniform(0.5, 2, 3)
        ht = transformed_hamiltonian(hamiltonian(w, *g), chain_unitary(n, "reverse"))
        assert np.abs(ht - transformed_general(w, *g)).max() > 0.1
