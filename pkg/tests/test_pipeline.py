import numpy as np
import pytest

from mfca import graphs, pipeline, so3


@pytest.fixture(scope="module")
def frames():
    return so3.sample_uniform(101, 400)


@pytest.fixture(scope="module")
def clean(frames):
    return graphs.clean_graph(frames, 0.9)


@pytest.fixture(scope="module")
def blocks(clean):
    return [pipeline.embed(clean, k) for k in (1, 2, 3)]


def shift_angles(graph, alpha):
    """Apply the per-vertex gauge theta_ij -> theta_ij - alpha_i + alpha_j."""
    theta = (graph.theta - alpha[graph.edge_i] + alpha[graph.edge_j]) % (2 * np.pi)
    return graphs.ObservationGraph(
        n_vertices=graph.n_vertices,
        edge_i=graph.edge_i,
        edge_j=graph.edge_j,
        theta=theta,
        kind=graph.kind,
    )


class TestBuildH:
    def test_entries(self, clean):
        h = pipeline.build_H(clean, 2).dense()
        e = 0
        i, j, t = clean.edge_i[e], clean.edge_j[e], clean.theta[e]
        assert np.isclose(h[i, j], np.exp(2j * t), atol=1e-14)
        assert np.isclose(h[j, i], np.exp(-2j * t), atol=1e-14)

    def test_hermitian(self, clean):
        h = pipeline.build_H(clean, 3).dense()
        assert np.allclose(h, h.conj().T)

    def test_zero_diagonal(self, clean):
        h = pipeline.build_H(clean, 1).dense()
        assert np.all(np.diag(h) == 0)

    def test_rejects_k_zero(self, clean):
        with pytest.raises(ValueError):
            pipeline.build_H(clean, 0)


class TestNormalize:
    def test_two_vertex_example(self):
        g = graphs.ObservationGraph(
            n_vertices=2,
            edge_i=np.array([0]),
            edge_j=np.array([1]),
            theta=np.array([0.5]),
            kind=np.zeros(1, dtype=np.int8),
        )
        hn = pipeline.normalize(pipeline.build_H(g, 1), graphs.degrees(g)).dense()
        assert np.isclose(hn[0, 1], np.exp(0.5j), atol=1e-14)

    def test_spectral_radius_at_most_one(self, clean):
        hn = pipeline.normalize(pipeline.build_H(clean, 1), graphs.degrees(clean))
        vals = np.linalg.eigvalsh(hn.dense())
        assert np.max(np.abs(vals)) <= 1.0 + 1e-9

    def test_isolated_row_stays_zero(self):
        g = graphs.ObservationGraph(
            n_vertices=3,
            edge_i=np.array([0]),
            edge_j=np.array([1]),
            theta=np.array([1.0]),
            kind=np.zeros(1, dtype=np.int8),
        )
        hn = pipeline.normalize(pipeline.build_H(g, 1), graphs.degrees(g)).dense()
        assert np.all(hn[2] == 0) and np.all(hn[:, 2] == 0)

    def test_degree_length_mismatch(self, clean):
        with pytest.raises(ValueError):
            pipeline.normalize(pipeline.build_H(clean, 1), np.ones(3))


class TestEmbed:
    def test_shapes(self, blocks, clean):
        for b in blocks:
            assert b.embedding.shape == (clean.n_vertices, 2 * b.k + 1)
            assert b.eigenvalues.shape == (2 * b.k + 2,)
            assert np.all(np.diff(b.eigenvalues) <= 1e-12)

    def test_isolated_mask(self, blocks):
        assert not np.any(blocks[0].isolated)

    def test_rejects_empty_graph(self):
        g = graphs.ObservationGraph(
            n_vertices=3,
            edge_i=np.array([], dtype=np.int64),
            edge_j=np.array([], dtype=np.int64),
            theta=np.array([]),
            kind=np.array([], dtype=np.int8),
        )
        with pytest.raises(ValueError):
            pipeline.embed(g, 1)


class TestAffinity:
    def test_bounds_and_symmetry(self, blocks):
        a = pipeline.affinity_matrix(blocks[0])
        assert np.all(a >= 0) and np.all(a <= 1)
        assert np.allclose(a, a.T, atol=1e-12)
        assert np.allclose(np.diag(a), 1.0)

    def test_scalar_matches_matrix(self, blocks):
        a = pipeline.affinity_matrix(blocks[1])
        for i, j in ((0, 5), (3, 17), (100, 250)):
            assert np.isclose(pipeline.affinity_k(blocks[1], i, j), a[i, j], atol=1e-12)

    def test_all_is_product(self, blocks):
        prod = pipeline.affinity_matrix(blocks[0]) * pipeline.affinity_matrix(
            blocks[1]
        ) * pipeline.affinity_matrix(blocks[2])
        assert np.allclose(pipeline.affinity_all_matrix(blocks), prod, atol=1e-12)
        assert np.isclose(
            pipeline.affinity_all(blocks, 2, 9), prod[2, 9], atol=1e-12
        )

    def test_g_affinity_range(self, blocks):
        vals = [pipeline.g_affinity(blocks[2], 0, j) for j in range(1, 50)]
        assert all(-1.0 <= v <= 1.0 for v in vals)

    def test_g_all_mean(self, blocks):
        got = pipeline.g_all(blocks, 1, 7)
        ref = np.mean([pipeline.g_affinity(b, 1, 7) for b in blocks])
        assert np.isclose(got, ref, atol=1e-14)

    def test_gauge_invariance(self, frames, clean):
        # re-expressing every frame in a rotated in-plane gauge must leave
        # the affinities unchanged
        rng = np.random.default_rng(3)
        alpha = rng.uniform(0, 2 * np.pi, clean.n_vertices)
        shifted = shift_angles(clean, alpha)
        a0 = pipeline.affinity_matrix(pipeline.embed(clean, 2))
        a1 = pipeline.affinity_matrix(pipeline.embed(shifted, 2))
        assert np.max(np.abs(a0 - a1)) < 1e-8

    def test_start_seed_stability(self, clean):
        b0 = pipeline.embed(clean, 1, start_seed=0)
        b1 = pipeline.embed(clean, 1, start_seed=42)
        a0 = pipeline.affinity_matrix(b0)
        a1 = pipeline.affinity_matrix(b1)
        assert np.max(np.abs(a0 - a1)) < 1e-6


class TestKnn:
    def test_small_example(self):
        a = np.array(
            [
                [1.0, 0.9, 0.1, 0.5],
                [0.9, 1.0, 0.2, 0.3],
                [0.1, 0.2, 1.0, 0.8],
                [0.5, 0.3, 0.8, 1.0],
            ]
        )
        nb = pipeline.knn(a, 2)
        assert nb[0].tolist() == [1, 3]
        assert nb[2].tolist() == [3, 1]

    def test_tie_breaks_to_lower_index(self):
        a = np.full((4, 4), 0.5)
        np.fill_diagonal(a, 1.0)
        nb = pipeline.knn(a, 2)
        assert nb[3].tolist() == [0, 1]

    def test_excludes_isolated(self):
        a = np.full((4, 4), 0.5)
        nb = pipeline.knn(a, 2, isolated=np.array([False, True, False, False]))
        assert 1 not in nb[0]

    def test_monotone_transform_invariance(self, blocks):
        # elementwise powers of one affinity matrix are monotone transforms,
        # so the neighbor lists must be exactly identical
        a = pipeline.affinity_matrix(blocks[0])
        base = pipeline.knn(a, 5)
        for power in (2, 5):
            assert np.array_equal(base, pipeline.knn(a**power, 5))

    def test_cross_frequency_overlap(self, blocks):
        # different frequencies estimate the same geometry: neighbor sets
        # should agree closely (sampling noise prevents exact equality)
        k1 = pipeline.knn(pipeline.affinity_matrix(blocks[0]), 5)
        k3 = pipeline.knn(pipeline.affinity_matrix(blocks[2]), 5)
        overlap = np.mean(
            [len(set(a) & set(b)) / 5.0 for a, b in zip(k1, k3)]
        )
        assert overlap > 0.8

    def test_rejects_bad_K(self, blocks):
        a = pipeline.affinity_matrix(blocks[0])
        with pytest.raises(ValueError):
            pipeline.knn(a, 0)


class TestEvaluateNeighbors:
    def test_geometric_truth_is_tight(self, frames, clean):
        # true nearest directions under a 0.9 cap lie within ~25.8 degrees
        dirs = frames.viewing_directions()
        dots = dirs @ dirs.T
        nb = pipeline.knn(dots, 5)
        stats = pipeline.evaluate_neighbors(frames, nb)
        assert stats["mean_angle_deg"] < 19.2
        assert stats["frac_le_30"] > 0.99

    def test_random_neighbors_near_ninety(self, frames):
        rng = np.random.default_rng(7)
        nb = rng.integers(0, 400, size=(400, 5))
        stats = pipeline.evaluate_neighbors(frames, nb)
        assert abs(stats["mean_angle_deg"] - 90.0) < 2.0

    def test_histogram_sums_to_pairs(self, frames):
        nb = np.tile(np.arange(1, 6), (400, 1))
        stats = pipeline.evaluate_neighbors(frames, nb)
        assert sum(stats["histogram_counts"]) == 400 * 5
        assert stats["histogram_edges_deg"][1] - stats["histogram_edges_deg"][0] == 2.0


class TestScatter:
    def test_columns_in_range(self, blocks, frames):
        data = pipeline.scatter_data(blocks[0], frames, 500, 1)
        assert data.shape == (500, 2)
        assert np.all(data >= -1e-12) and np.all(data <= 1 + 1e-12)

    def test_correlation(self, blocks, frames):
        data = pipeline.scatter_data(blocks[0], frames, 2000, 2)
        r = np.corrcoef(data[:, 0], data[:, 1])[0, 1]
        assert r > 0.9

    def test_deterministic(self, blocks, frames):
        a = pipeline.scatter_data(blocks[1], frames, 100, 5)
        b = pipeline.scatter_data(blocks[1], frames, 100, 5)
        assert np.array_equal(a, b)

    def test_sample_cap(self, blocks, frames):
        with pytest.raises(ValueError):
            pipeline.scatter_data(blocks[0], frames, 400 * 399, 0)


class TestSpectrum:
    def test_report_matches_embed(self, clean, blocks):
        vals = pipeline.spectrum_report(clean, 1, count=4)
        assert np.allclose(vals, blocks[0].eigenvalues[:4], atol=1e-8)

    def test_group_eigenvalues(self):
        groups = pipeline.group_eigenvalues(np.array([1.0, 0.999, 0.99, 0.5, 0.49]))
        assert groups == [[0, 1, 2], [3, 4]]

    def test_group_empty(self):
        assert pipeline.group_eigenvalues(np.array([])) == []

    def test_top_multiplicity_three(self, clean):
        # at k=1 the leading group of the normalized spectrum has size 3
        vals = pipeline.spectrum_report(clean, 1, count=10)
        groups = pipeline.group_eigenvalues(vals, rel_tol=0.04)
        assert len(groups[0]) == 3
