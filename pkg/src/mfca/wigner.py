"""Jacobi polynomials, Wigner d- and D-matrix entries, and the extrinsic
column map used by the frequency-k affinity identity.

Matrix entries are indexed by (m, n) with m, n in {-ell, ..., ell}; the single
array convention used everywhere is array index = m + ell (see entry_index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .so3 import to_euler

ELL_MAX = 64


class WeightCapError(ValueError):
    """Raised for weights ell beyond the supported cap."""


def entry_index(m: int, ell: int) -> int:
    """Map a signed index m in {-ell..ell} to the array index m + ell."""
    if not -ell <= m <= ell:
        raise IndexError(f"index {m} out of range for weight {ell}")
    return m + ell


def jacobi_poly(n: int, a: int, b: int, x: float) -> float:
    """P_n^{(a,b)}(x) by the standard three-term recurrence."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    p_prev = 1.0
    if n == 0:
        return p_prev
    p = 0.5 * (a - b) + (1.0 + 0.5 * (a + b)) * x
    for m in range(2, n + 1):
        c = 2 * m + a + b
        a1 = 2 * m * (m + a + b) * (c - 2)
        a2 = (c - 1) * (a * a - b * b)
        a3 = (c - 2) * (c - 1) * c
        a4 = 2 * (m + a - 1) * (m + b - 1) * c
        p, p_prev = ((a2 + a3 * x) * p - a4 * p_prev) / a1, p
    return p


def _check_indices(ell: int, m: int, n: int) -> None:
    if ell < 0:
        raise ValueError("weight must be >= 0")
    if ell > ELL_MAX:
        raise WeightCapError(f"weight {ell} exceeds the supported cap {ELL_MAX}")
    if abs(m) > ell or abs(n) > ell:
        raise IndexError(f"indices ({m},{n}) out of range for weight {ell}")


def _d_base(ell: int, m: int, n: int, theta: float) -> float:
    # valid branch: m >= |n|
    log_ratio = (
        math.lgamma(ell + m + 1)
        + math.lgamma(ell - m + 1)
        - math.lgamma(ell + n + 1)
        - math.lgamma(ell - n + 1)
    )
    c = math.cos(0.5 * theta)
    s = math.sin(0.5 * theta)
    sign = -1.0 if (m - n) % 2 else 1.0
    return (
        sign
        * math.exp(0.5 * log_ratio)
        * c ** (m + n)
        * s ** (m - n)
        * jacobi_poly(ell - m, m - n, m + n, math.cos(theta))
    )


def wigner_d(ell: int, m: int, n: int, theta: float) -> float:
    """The small d-matrix entry d^ell_{mn}(theta) for theta in [0, pi].

    The base Jacobi-form evaluation is valid for m >= |n|; other index
    sectors are reached through the symmetries
    d_{mn} = (-1)^{m-n} d_{nm} = d_{-n,-m}.
    """
    _check_indices(ell, m, n)
    if m >= abs(n):
        return _d_base(ell, m, n, theta)
    if n >= abs(m):
        val = _d_base(ell, n, m, theta)
        return -val if (m - n) % 2 else val
    if m <= -abs(n):
        val = _d_base(ell, -m, -n, theta)
        return -val if (m - n) % 2 else val
    return _d_base(ell, -n, -m, theta)


def wigner_D(ell: int, m: int, n: int, x: np.ndarray) -> complex:
    """D^ell_{mn}(x) = e^{-i m phi} d^ell_{mn}(theta) e^{-i n psi}."""
    _check_indices(ell, m, n)
    phi, theta, psi = to_euler(x)
    return np.exp(-1j * (m * phi + n * psi)) * wigner_d(ell, m, n, theta)


@dataclass(frozen=True)
class WignerDMatrix:
    """Full (2*ell+1) x (2*ell+1) representation matrix at one rotation."""

    ell: int
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        d = 2 * self.ell + 1
        if e.shape != (d, d):
            raise ValueError(f"entries must be {d}x{d}")
        object.__setattr__(self, "entries", e)

    def entry(self, m: int, n: int) -> complex:
        return self.entries[entry_index(m, self.ell), entry_index(n, self.ell)]


def wigner_D_matrix(ell: int, x: np.ndarray) -> WignerDMatrix:
    if ell > ELL_MAX:
        raise WeightCapError(f"weight {ell} exceeds the supported cap {ELL_MAX}")
    phi, theta, psi = to_euler(x)
    ms = np.arange(-ell, ell + 1)
    d = np.array([[wigner_d(ell, m, n, theta) for n in ms] for m in ms])
    entries = np.exp(-1j * phi * ms)[:, None] * d * np.exp(-1j * psi * ms)[None, :]
    return WignerDMatrix(ell=ell, entries=entries)


@dataclass(frozen=True)
class ExtrinsicColumn:
    """The index-(-k) column of D^k at one rotation; a unit vector in C^{2k+1}."""

    k: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (2 * self.k + 1,):
            raise ValueError(f"values must have length {2 * self.k + 1}")
        object.__setattr__(self, "values", v)


def extrinsic_column(k: int, x: np.ndarray) -> ExtrinsicColumn:
    """The vector (D^k_{m,-k}(x))_{m=-k..k}.

    The modulus of the inner product of two such columns equals
    ((<pi(x), pi(y)> + 1)/2)^k.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    phi, theta, psi = to_euler(x)
    ms = np.arange(-k, k + 1)
    d = np.array([wigner_d(k, m, -k, theta) for m in ms])
    values = np.exp(-1j * (phi * ms - psi * k)) * d
    return ExtrinsicColumn(k=k, values=values)
