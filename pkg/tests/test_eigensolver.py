import numpy as np
import pytest
import scipy.sparse as sp

from mfca import eigensolver as es


def random_hermitian(n, seed, density=1.0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if density < 1.0:
        mask = rng.random((n, n)) < density
        a = a * mask
    h = (a + a.conj().T) / 2.0
    return h


def char_poly_roots(h):
    """Independent oracle: eigenvalues via characteristic-polynomial
    coefficients from trace power sums (Faddeev-LeVerrier) and np.roots."""
    n = h.shape[0]
    power_sums = [np.trace(np.linalg.matrix_power(h, k)).real for k in range(1, n + 1)]
    coeffs = [1.0]
    for k in range(1, n + 1):
        acc = 0.0
        for i in range(1, k + 1):
            acc += coeffs[k - i] * power_sums[i - 1]
        coeffs.append(-acc / k)
    roots = np.roots(coeffs)
    return np.sort(roots.real)[::-1]


class TestHermitianMatrix:
    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            es.HermitianMatrix(data=np.zeros((2, 3)))

    def test_from_triplets_mirrors_conjugate(self):
        h = es.HermitianMatrix.from_triplets(3, [0, 0], [1, 2], [1 + 2j, -1j])
        d = h.dense()
        assert d[1, 0] == np.conj(d[0, 1])
        assert d[2, 0] == np.conj(d[0, 2])
        assert np.allclose(d, d.conj().T)

    def test_from_triplets_diagonal_not_doubled(self):
        h = es.HermitianMatrix.from_triplets(2, [0], [0], [3.0])
        assert h.dense()[0, 0] == 3.0

    def test_from_triplets_rejects_lower(self):
        with pytest.raises(ValueError):
            es.HermitianMatrix.from_triplets(3, [2], [0], [1.0])

    def test_density(self):
        h = es.HermitianMatrix(data=np.diag([1.0, 2.0, 0.0, 0.0]))
        assert h.density == 2 / 16

    def test_frobenius_matches_dense(self):
        m = random_hermitian(6, 0)
        h_dense = es.HermitianMatrix(data=m)
        h_sparse = es.HermitianMatrix(data=sp.csr_matrix(m))
        ref = np.linalg.norm(m)
        assert np.isclose(h_dense.frobenius(), ref)
        assert np.isclose(h_sparse.frobenius(), ref)


class TestTopEigenpairs:
    def test_identity(self):
        h = es.HermitianMatrix(data=np.eye(4))
        pairs = es.top_eigenpairs(h, 2)
        assert np.allclose(pairs.values, [1.0, 1.0])

    def test_pauli_y(self):
        h = es.HermitianMatrix(data=np.array([[0, -1j], [1j, 0]]))
        pairs = es.top_eigenpairs(h, 2)
        assert np.allclose(pairs.values, [1.0, -1.0], atol=1e-12)

    def test_char_poly_oracle(self):
        m = random_hermitian(8, 3)
        pairs = es.top_eigenpairs(es.HermitianMatrix(data=m), 8)
        ref = char_poly_roots(m)
        assert np.allclose(pairs.values, ref, atol=1e-8)

    def test_descending_order(self):
        m = random_hermitian(20, 5)
        pairs = es.top_eigenpairs(es.HermitianMatrix(data=m), 7)
        assert np.all(np.diff(pairs.values) <= 0)

    def test_orthonormal_vectors(self):
        m = random_hermitian(15, 6)
        pairs = es.top_eigenpairs(es.HermitianMatrix(data=m), 5)
        gram = pairs.vectors.conj().T @ pairs.vectors
        assert np.allclose(gram, np.eye(5), atol=1e-10)

    def test_residual(self):
        m = random_hermitian(30, 7)
        h = es.HermitianMatrix(data=m)
        pairs = es.top_eigenpairs(h, 4)
        resid = m @ pairs.vectors - pairs.vectors * pairs.values[None, :]
        assert np.max(np.linalg.norm(resid, axis=0)) < 1e-10 * max(1, np.linalg.norm(m))

    def test_permutation_invariance(self):
        m = random_hermitian(12, 8)
        rng = np.random.default_rng(1)
        perm = rng.permutation(12)
        pm = m[np.ix_(perm, perm)]
        a = es.top_eigenpairs(es.HermitianMatrix(data=m), 12).values
        b = es.top_eigenpairs(es.HermitianMatrix(data=pm), 12).values
        assert np.allclose(a, b, atol=1e-10)

    def test_rejects_too_many(self):
        h = es.HermitianMatrix(data=np.eye(3))
        with pytest.raises(es.EigensolverError):
            es.top_eigenpairs(h, 4)

    def test_sparse_path_matches_dense(self):
        # low density forces the iterative path for the sparse operand
        n = 300
        m = random_hermitian(n, 9, density=0.01)
        h_sparse = es.HermitianMatrix(data=sp.csr_matrix(m))
        assert h_sparse.density < es.SPARSE_DENSITY_CUTOFF
        dense_vals = np.sort(np.linalg.eigvalsh(m))[::-1][:5]
        pairs = es.top_eigenpairs(h_sparse, 5)
        assert np.allclose(pairs.values, dense_vals, atol=1e-7)

    def test_sparse_path_deterministic(self):
        n = 300
        m = sp.csr_matrix(random_hermitian(n, 10, density=0.01))
        a = es.top_eigenpairs(es.HermitianMatrix(data=m), 3)
        b = es.top_eigenpairs(es.HermitianMatrix(data=m), 3)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.vectors, b.vectors)

    def test_degenerate_subspace_stable_across_seeds(self):
        # rank-2 projector: the top-2 eigenspace is degenerate; the spanned
        # subspace must agree across start seeds even if bases differ
        rng = np.random.default_rng(11)
        q, _ = np.linalg.qr(rng.standard_normal((200, 2)))
        m = sp.csr_matrix(q @ q.T)
        h = es.HermitianMatrix(data=m)
        a = es.top_eigenpairs(h, 2, start_seed=0).vectors
        b = es.top_eigenpairs(h, 2, start_seed=99).vectors
        proj_a = a @ a.conj().T
        proj_b = b @ b.conj().T
        assert np.max(np.abs(proj_a - proj_b)) < 1e-6


class TestFullSpectrum:
    def test_trace_and_frobenius(self):
        m = random_hermitian(25, 12)
        pairs = es.full_spectrum(es.HermitianMatrix(data=m))
        assert np.isclose(np.sum(pairs.values), np.trace(m).real, atol=1e-10)
        assert np.isclose(
            np.sum(pairs.values**2), np.linalg.norm(m) ** 2, atol=1e-8
        )

    def test_reconstruction(self):
        m = random_hermitian(10, 13)
        pairs = es.full_spectrum(es.HermitianMatrix(data=m))
        rebuilt = (pairs.vectors * pairs.values[None, :]) @ pairs.vectors.conj().T
        assert np.allclose(rebuilt, m, atol=1e-10)

    def test_size_cap(self):
        h = es.HermitianMatrix(data=sp.eye(es.DENSE_SIZE_CAP + 1, format="csr"))
        with pytest.raises(es.EigensolverError):
            es.full_spectrum(h)
