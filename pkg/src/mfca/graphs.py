"""Clean geometric neighborhood graphs over frame sets and the probabilistic
edge-rewiring corruption model.

Edges are stored once per undirected pair with i < j; the angle convention
theta_ji = -theta_ij is implicit, which keeps every frequency matrix built
from the graph Hermitian by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .so3 import FrameSet, alignment_angles

GOOD = 0
REWIRED = 1

_KIND_NAMES = {GOOD: "good", REWIRED: "rewired"}
_KIND_CODES = {v: k for k, v in _KIND_NAMES.items()}


@dataclass(frozen=True)
class ObservationGraph:
    """Undirected edge list over n_vertices frames with per-edge alignment
    angle and a good/rewired flag."""

    n_vertices: int
    edge_i: np.ndarray  # int64, i < j
    edge_j: np.ndarray
    theta: np.ndarray  # radians in [0, 2*pi)
    kind: np.ndarray  # GOOD | REWIRED
    dropped_edges: int = 0  # edges removed because no rewiring target existed

    def __post_init__(self):
        ei = np.asarray(self.edge_i, dtype=np.int64)
        ej = np.asarray(self.edge_j, dtype=np.int64)
        th = np.asarray(self.theta, dtype=float)
        kd = np.asarray(self.kind, dtype=np.int8)
        if not (ei.shape == ej.shape == th.shape == kd.shape):
            raise ValueError("edge arrays must have equal lengths")
        if ei.size:
            if np.any(ei >= ej):
                raise ValueError("edges must satisfy i < j (no self loops)")
            if np.any((ei < 0) | (ej >= self.n_vertices)):
                raise ValueError("edge endpoint out of range")
            keys = ei * self.n_vertices + ej
            if np.unique(keys).size != keys.size:
                raise ValueError("duplicate edges")
        for name, arr in (("edge_i", ei), ("edge_j", ej), ("theta", th), ("kind", kd)):
            object.__setattr__(self, name, arr)

    @property
    def n_edges(self) -> int:
        return self.edge_i.size

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("i,j,theta,kind\n")
            for i, j, th, kd in zip(self.edge_i, self.edge_j, self.theta, self.kind):
                fh.write(f"{i},{j},{format(th, '.17g')},{_KIND_NAMES[int(kd)]}\n")

    @classmethod
    def from_csv(cls, path, n_vertices: int | None = None) -> "ObservationGraph":
        ei, ej, th, kd = [], [], [], []
        with open(path) as fh:
            header = fh.readline().strip()
            if header != "i,j,theta,kind":
                raise ValueError(f"unexpected graph header: {header!r}")
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                fi, fj, fth, fkd = line.split(",")
                if fkd not in _KIND_CODES:
                    raise ValueError(f"unknown edge kind {fkd!r}")
                ei.append(int(fi))
                ej.append(int(fj))
                th.append(float(fth))
                kd.append(_KIND_CODES[fkd])
        if n_vertices is None:
            n_vertices = (max(ej) + 1) if ej else 0
        return cls(
            n_vertices=n_vertices,
            edge_i=np.array(ei, dtype=np.int64),
            edge_j=np.array(ej, dtype=np.int64),
            theta=np.array(th),
            kind=np.array(kd, dtype=np.int8),
        )


def clean_graph(frames: FrameSet, cos_threshold: float) -> ObservationGraph:
    """Connect frames whose viewing directions satisfy <pi_i, pi_j> above the
    threshold; the edge angle is the optimal in-plane alignment angle."""
    n = len(frames)
    if n < 2:
        raise ValueError("need at least 2 frames")
    dirs = frames.viewing_directions()
    ii_parts, jj_parts = [], []
    block = 512
    for a in range(0, n, block):
        dots = dirs[a : a + block] @ dirs.T
        bi, bj = np.nonzero(dots > cos_threshold)
        keep = a + bi < bj
        ii_parts.append(a + bi[keep])
        jj_parts.append(bj[keep])
    ii = np.concatenate(ii_parts)
    jj = np.concatenate(jj_parts)
    order = np.lexsort((jj, ii))
    ii, jj = ii[order], jj[order]
    theta = alignment_angles(frames.frames, ii, jj) if ii.size else np.empty(0)
    return ObservationGraph(
        n_vertices=n,
        edge_i=ii,
        edge_j=jj,
        theta=theta,
        kind=np.zeros(ii.size, dtype=np.int8),
    )


def rewire(graph: ObservationGraph, p: float, seed: int) -> ObservationGraph:
    """Keep each undirected edge with probability p; otherwise replace it by
    an edge from its lower-index endpoint to a uniformly drawn non-adjacent
    vertex, carrying a uniform angle.

    An edge whose endpoint is already adjacent to every other vertex cannot
    be rewired; it is dropped and counted in dropped_edges.  Deterministic
    for a fixed seed.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    n = graph.n_vertices
    rng = np.random.default_rng(seed)
    adjacency = [set() for _ in range(n)]
    for i, j in zip(graph.edge_i, graph.edge_j):
        adjacency[i].add(int(j))
        adjacency[j].add(int(i))

    keep = rng.random(graph.n_edges) < p
    out_i, out_j, out_theta, out_kind = [], [], [], []
    dropped = 0
    for e in range(graph.n_edges):
        i, j = int(graph.edge_i[e]), int(graph.edge_j[e])
        if keep[e]:
            out_i.append(i)
            out_j.append(j)
            out_theta.append(float(graph.theta[e]))
            out_kind.append(int(graph.kind[e]))
            continue
        adjacency[i].discard(j)
        adjacency[j].discard(i)
        # the replacement must be a new neighbor: the old partner j is excluded
        target = -1
        if len(adjacency[i]) < n - 2:
            # rejection sampling with an explicit fallback enumeration
            for _ in range(64):
                cand = int(rng.integers(n))
                if cand != i and cand != j and cand not in adjacency[i]:
                    target = cand
                    break
            else:
                candidates = [
                    v for v in range(n) if v != i and v != j and v not in adjacency[i]
                ]
                target = candidates[int(rng.integers(len(candidates)))]
        if target < 0:
            dropped += 1
            continue
        adjacency[i].add(target)
        adjacency[target].add(i)
        a, b = (i, target) if i < target else (target, i)
        out_i.append(a)
        out_j.append(b)
        out_theta.append(float(rng.uniform(0.0, 2.0 * np.pi)))
        out_kind.append(REWIRED)

    order = np.lexsort((np.array(out_j, dtype=np.int64), np.array(out_i, dtype=np.int64)))
    return ObservationGraph(
        n_vertices=n,
        edge_i=np.array(out_i, dtype=np.int64)[order],
        edge_j=np.array(out_j, dtype=np.int64)[order],
        theta=np.array(out_theta)[order],
        kind=np.array(out_kind, dtype=np.int8)[order],
        dropped_edges=dropped,
    )


def degrees(graph: ObservationGraph) -> np.ndarray:
    """Number of incident edges per vertex."""
    d = np.zeros(graph.n_vertices, dtype=np.int64)
    np.add.at(d, graph.edge_i, 1)
    np.add.at(d, graph.edge_j, 1)
    return d
