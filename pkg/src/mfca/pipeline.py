"""The multi-frequency class averaging algorithm: per-frequency Hermitian
matrices, normalized spectra, embeddings, affinities, aggregation, nearest
neighbors, and evaluation metrics.

For each frequency k the graph's alignment angles are encoded as e^{i k
theta_ij}; the top 2k+1 eigenvectors of the degree-normalized matrix give the
per-vertex embedding, whose normalized inner products define the affinity
A^(k).  Affinities multiply across frequencies into the aggregate A^All.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .eigensolver import HermitianMatrix, full_spectrum, top_eigenpairs
from .graphs import ObservationGraph, degrees
from .so3 import FrameSet

FULL_MATRIX_CAP = 8192
GROUP_REL_TOL = 0.02


@dataclass(frozen=True)
class FrequencyBlock:
    """Per-frequency bundle: spectrum head and the n x (2k+1) embedding."""

    k: int
    eigenvalues: np.ndarray  # top 2k+2, descending
    embedding: np.ndarray  # (n, 2k+1) complex, rows are per-vertex vectors
    isolated: np.ndarray  # (n,) bool: zero-degree vertices

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", np.asarray(self.eigenvalues, dtype=float))
        object.__setattr__(self, "embedding", np.asarray(self.embedding, dtype=complex))
        object.__setattr__(self, "isolated", np.asarray(self.isolated, dtype=bool))

    @property
    def n(self) -> int:
        return self.embedding.shape[0]


def build_H(graph: ObservationGraph, k: int) -> HermitianMatrix:
    """H^(k)_ij = e^{i k theta_ij} on edges, zero elsewhere and on the
    diagonal; Hermitian via the theta_ji = -theta_ij convention."""
    if k < 1:
        raise ValueError("k must be >= 1")
    values = np.exp(1j * k * graph.theta)
    return HermitianMatrix.from_triplets(
        graph.n_vertices, graph.edge_i, graph.edge_j, values
    )


def normalize(h: HermitianMatrix, degs: np.ndarray) -> HermitianMatrix:
    """Symmetric degree normalization H_ij / sqrt(D_ii D_jj); zero-degree
    rows and columns stay zero."""
    degs = np.asarray(degs, dtype=float)
    if degs.shape != (h.n,):
        raise ValueError("degree vector length mismatch")
    with np.errstate(divide="ignore"):
        inv_sqrt = np.where(degs > 0, 1.0 / np.sqrt(np.maximum(degs, 1)), 0.0)
    if sp.issparse(h.data):
        d = sp.diags(inv_sqrt)
        return HermitianMatrix(data=d @ h.data @ d)
    return HermitianMatrix(data=inv_sqrt[:, None] * h.data * inv_sqrt[None, :])


def embed(graph: ObservationGraph, k: int, start_seed: int = 0) -> FrequencyBlock:
    """Top 2k+1 eigenvectors of the normalized H^(k), one row per vertex;
    retains 2k+2 eigenvalues so the trailing gap is reportable."""
    if graph.n_edges == 0:
        raise ValueError("graph has no edges")
    degs = degrees(graph)
    hn = normalize(build_H(graph, k), degs)
    m = min(2 * k + 2, graph.n_vertices)
    pairs = top_eigenpairs(hn, m, start_seed=start_seed)
    width = min(2 * k + 1, m)
    return FrequencyBlock(
        k=k,
        eigenvalues=pairs.values,
        embedding=pairs.vectors[:, :width],
        isolated=degs == 0,
    )


def _normalized_rows(block: FrequencyBlock) -> np.ndarray:
    norms = np.linalg.norm(block.embedding, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    rows = block.embedding / safe[:, None]
    rows[block.isolated | (norms == 0)] = 0.0
    return rows


def affinity_k(block: FrequencyBlock, i: int, j: int) -> float:
    """|<Psi(i), Psi(j)>| / (|Psi(i)| |Psi(j)|), in [0, 1].

    Isolated (zero-norm) rows give affinity 0; the block's isolated mask
    flags them.
    """
    if i == j:
        return 0.0 if block.isolated[i] else 1.0
    ni = np.linalg.norm(block.embedding[i])
    nj = np.linalg.norm(block.embedding[j])
    if ni == 0.0 or nj == 0.0:
        return 0.0
    val = abs(np.vdot(block.embedding[i], block.embedding[j])) / (ni * nj)
    return float(min(val, 1.0))


def affinity_matrix(block: FrequencyBlock) -> np.ndarray:
    """Full n x n affinity matrix (n capped; see knn for the blockwise path)."""
    if block.n > FULL_MATRIX_CAP:
        raise ValueError(f"full affinity matrix limited to n <= {FULL_MATRIX_CAP}")
    rows = _normalized_rows(block)
    a = np.abs(rows @ rows.conj().T)
    np.clip(a, 0.0, 1.0, out=a)
    np.fill_diagonal(a, np.where(block.isolated, 0.0, 1.0))
    return a


def affinity_all(blocks: list, i: int, j: int) -> float:
    """Product of per-frequency affinities across all supplied blocks."""
    out = 1.0
    for b in blocks:
        out *= affinity_k(b, i, j)
    return out


def affinity_all_matrix(blocks: list) -> np.ndarray:
    out = affinity_matrix(blocks[0])
    for b in blocks[1:]:
        out *= affinity_matrix(b)
    return out


def g_affinity(block: FrequencyBlock, i: int, j: int) -> float:
    """The root-transformed alternative 2 A^(k)^{1/k} - 1 in [-1, 1]."""
    a = affinity_k(block, i, j)
    if a == 0.0:
        return -1.0
    return 2.0 * a ** (1.0 / block.k) - 1.0


def g_all(blocks: list, i: int, j: int) -> float:
    """Arithmetic mean of the root-transformed affinities over frequencies."""
    return float(np.mean([g_affinity(b, i, j) for b in blocks]))


def knn(affinity: np.ndarray, K: int, isolated: np.ndarray | None = None) -> np.ndarray:
    """Per-vertex indices of the K largest-affinity other vertices.

    Ties break toward the lower index; isolated vertices are excluded from
    candidacy and receive neighbor lists drawn from the remaining pool.
    """
    a = np.array(affinity, dtype=float)
    n = a.shape[0]
    if not 1 <= K < n:
        raise ValueError("K must satisfy 1 <= K < n")
    np.fill_diagonal(a, -np.inf)
    if isolated is not None:
        a[:, np.asarray(isolated, dtype=bool)] = -np.inf
    out = np.empty((n, K), dtype=np.int64)
    idx = np.arange(n)
    for i in range(n):
        order = np.lexsort((idx, -a[i]))
        out[i] = order[:K]
    return out


def evaluate_neighbors(frames: FrameSet, neighbors: np.ndarray) -> dict:
    """Angular quality of a neighbor assignment against the true frames.

    Returns the per-pair viewing-angle histogram (2 degree bins over
    [0, 180]), the mean angle, and the fractions within 10/20/30 degrees.
    """
    dirs = frames.viewing_directions()
    neighbors = np.asarray(neighbors, dtype=np.int64)
    n, K = neighbors.shape
    dots = np.einsum("id,ikd->ik", dirs, dirs[neighbors])
    ang = np.degrees(np.arccos(np.clip(dots, -1.0, 1.0))).ravel()
    hist, edges = np.histogram(ang, bins=np.arange(0.0, 180.0 + 2.0, 2.0))
    return {
        "mean_angle_deg": float(np.mean(ang)),
        "frac_le_10": float(np.mean(ang <= 10.0)),
        "frac_le_20": float(np.mean(ang <= 20.0)),
        "frac_le_30": float(np.mean(ang <= 30.0)),
        "histogram_counts": hist.tolist(),
        "histogram_edges_deg": edges.tolist(),
    }


def scatter_data(
    block: FrequencyBlock, frames: FrameSet, sample: int, seed: int
) -> np.ndarray:
    """Seeded sample of unordered pairs with (A^(k)_ij, ((<pi_i,pi_j>+1)/2)^k)."""
    n = block.n
    total = n * (n - 1) // 2
    if sample > total:
        raise ValueError("sample exceeds the number of unordered pairs")
    rng = np.random.default_rng(seed)
    flat = rng.choice(total, size=sample, replace=False)
    # invert the row-major upper-triangle linearization
    ii = (
        n - 2 - np.floor(np.sqrt(-8.0 * flat + 4.0 * n * (n - 1) - 7.0) / 2.0 - 0.5)
    ).astype(np.int64)
    jj = (flat + ii + 1 - ii * (2 * n - ii - 1) // 2).astype(np.int64)
    dirs = frames.viewing_directions()
    target = ((np.einsum("pd,pd->p", dirs[ii], dirs[jj]) + 1.0) / 2.0) ** block.k
    rows = _normalized_rows(block)
    aff = np.abs(np.einsum("pd,pd->p", rows[ii], rows[jj].conj()))
    return np.column_stack([aff, target])


def spectrum_report(graph: ObservationGraph, k: int, count: int = 19) -> np.ndarray:
    """Top `count` eigenvalues of the normalized H^(k), descending."""
    if count > graph.n_vertices:
        raise ValueError("count exceeds matrix dimension")
    hn = normalize(build_H(graph, k), degrees(graph))
    if graph.n_vertices <= 2:
        return full_spectrum(hn).values[:count]
    return top_eigenpairs(hn, count).values


def group_eigenvalues(values: np.ndarray, rel_tol: float = GROUP_REL_TOL) -> list:
    """Split a descending eigenvalue list into near-equality groups.

    A new group starts whenever the drop from the previous value exceeds
    rel_tol times the top eigenvalue.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return []
    tol = rel_tol * abs(values[0])
    groups = [[0]]
    for r in range(1, values.size):
        if values[r - 1] - values[r] > tol:
            groups.append([r])
        else:
            groups[-1].append(r)
    return groups
