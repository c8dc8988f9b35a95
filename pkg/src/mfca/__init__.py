"""Multi-frequency class averaging: spectral clustering of noisy viewing
directions with per-frequency Hermitian matrices, plus the analytic spectral
theory behind it."""

from . import eigensolver, graphs, imaging, pipeline, so3, spectral, wigner

__all__ = [
    "eigensolver",
    "graphs",
    "imaging",
    "pipeline",
    "so3",
    "spectral",
    "wigner",
]

__version__ = "0.1.0"
