"""Rotation-group primitives: Euler angles, Haar sampling, viewing directions,
and ground-truth in-plane alignment angles between frames.

A frame is a 3x3 special-orthogonal matrix whose third column is the viewing
direction.  The Euler convention is z-x-z:

    R(phi, theta, psi) = Rz(phi) @ Rx(theta) @ Rz(psi)

with phi, psi in [0, 2*pi) and theta in [0, pi].
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * np.pi

_ORTHO_TOL = 1e-12
_GIMBAL_TOL = 1e-12


class AntipodalFramesError(ValueError):
    """Alignment angle is undefined for frames with antipodal viewing directions."""


class EulerAngles(NamedTuple):
    phi: float
    theta: float
    psi: float


def wrap_angle(a):
    """Reduce an angle to [0, 2*pi) with floor-based modular reduction."""
    return np.mod(a, TWO_PI)


def is_rotation(r: np.ndarray, tol: float = _ORTHO_TOL) -> bool:
    r = np.asarray(r)
    if r.shape != (3, 3):
        return False
    ortho = np.max(np.abs(r.T @ r - np.eye(3)))
    return bool(ortho <= tol * 100 and abs(np.linalg.det(r) - 1.0) <= tol * 100)


def check_rotation(r: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {r.shape}")
    if np.max(np.abs(r.T @ r - np.eye(3))) > tol:
        raise ValueError("matrix is not orthogonal")
    if abs(np.linalg.det(r) - 1.0) > tol:
        raise ValueError("matrix determinant is not +1")
    return r


def rot_z(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_x(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def in_plane(alpha: float) -> np.ndarray:
    """The SO(2) element h(alpha) embedded in SO(3): rotation about e3."""
    return rot_z(alpha)


def from_euler(phi: float, theta: float, psi: float) -> np.ndarray:
    """Build the rotation Rz(phi) @ Rx(theta) @ Rz(psi).

    The third column is the viewing direction
    (sin(phi) sin(theta), -cos(phi) sin(theta), cos(theta)).
    """
    cf, sf = np.cos(phi), np.sin(phi)
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(psi), np.sin(psi)
    return np.array(
        [
            [cf * cp - sf * sp * ct, -cf * sp - sf * cp * ct, sf * st],
            [sf * cp + cf * sp * ct, -sf * sp + cf * cp * ct, -cf * st],
            [sp * st, cp * st, ct],
        ]
    )


def to_euler(r: np.ndarray) -> EulerAngles:
    """Invert from_euler.  At gimbal lock (|r33| = 1) the convention psi = 0 is
    used and phi absorbs the full in-plane angle."""
    r = np.asarray(r, dtype=float)
    r33 = min(1.0, max(-1.0, r[2, 2]))
    theta = float(np.arccos(r33))
    if np.sin(theta) < _GIMBAL_TOL:
        # theta in {0, pi}: R = Rz(phi +/- psi) * const, put everything in phi
        phi = float(np.arctan2(r[1, 0], r[0, 0]))
        return EulerAngles(float(wrap_angle(phi)), 0.0 if r33 > 0 else np.pi, 0.0)
    phi = float(np.arctan2(r[0, 2], -r[1, 2]))
    psi = float(np.arctan2(r[2, 0], r[2, 1]))
    return EulerAngles(float(wrap_angle(phi)), theta, float(wrap_angle(psi)))


def viewing_direction(r: np.ndarray) -> np.ndarray:
    """Third column of the frame: the projection axis on S^2."""
    return np.asarray(r)[:, 2].copy()


@dataclass(frozen=True)
class FrameSet:
    """A batch of N frames sampled or loaded together."""

    frames: np.ndarray  # (N, 3, 3)
    seed: int = 0

    def __post_init__(self):
        f = np.asarray(self.frames, dtype=float)
        if f.ndim != 3 or f.shape[1:] != (3, 3):
            raise ValueError(f"frames must have shape (N, 3, 3), got {f.shape}")
        object.__setattr__(self, "frames", f)

    def __len__(self) -> int:
        return self.frames.shape[0]

    def viewing_directions(self) -> np.ndarray:
        """(N, 3) array of third columns."""
        return self.frames[:, :, 2].copy()

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            self.write_csv(fh)

    def write_csv(self, fh) -> None:
        fh.write("index," + ",".join(f"r{a}{b}" for a in "123" for b in "123") + "\n")
        for idx, r in enumerate(self.frames):
            vals = ",".join(format(v, ".17g") for v in r.ravel())
            fh.write(f"{idx},{vals}\n")

    @classmethod
    def from_csv(cls, path, seed: int = 0) -> "FrameSet":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[1] != 10:
            raise ValueError("frame CSV must have 10 columns (index + 9 entries)")
        frames = data[:, 1:].reshape(-1, 3, 3)
        return cls(frames=frames, seed=seed)


def sample_uniform(seed: int, n: int) -> FrameSet:
    """Draw n Haar-uniform rotations, deterministically from the seed.

    QR of an iid standard-Gaussian 3x3 matrix with the diagonal-sign
    correction gives Haar measure on O(3); frames with determinant -1 are
    mapped into SO(3) by flipping the last column.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, 3, 3))
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r, axis1=1, axis2=2)
    sign = np.where(diag >= 0, 1.0, -1.0)
    q = q * sign[:, None, :]
    neg = np.linalg.det(q) < 0
    q[neg, :, 2] *= -1.0
    return FrameSet(frames=q, seed=seed)


def alignment_angle(r_i: np.ndarray, r_j: np.ndarray) -> float:
    """Angle theta minimizing ||R_i h(theta) - R_j||_F, in [0, 2*pi).

    Raises AntipodalFramesError when the viewing directions are antipodal
    (no unique geodesic, so the transported in-plane angle is undefined).
    """
    m = np.asarray(r_i).T @ np.asarray(r_j)
    c = m[0, 0] + m[1, 1]
    s = m[1, 0] - m[0, 1]
    if np.hypot(c, s) < 1e-12:
        raise AntipodalFramesError("viewing directions are antipodal")
    return float(wrap_angle(np.arctan2(s, c)))


def alignment_angles(frames: np.ndarray, ii: np.ndarray, jj: np.ndarray) -> np.ndarray:
    """Vectorized alignment_angle over index pairs (ii, jj) into frames."""
    m = np.einsum("pba,pbc->pac", frames[ii], frames[jj])
    c = m[:, 0, 0] + m[:, 1, 1]
    s = m[:, 1, 0] - m[:, 0, 1]
    if np.any(np.hypot(c, s) < 1e-12):
        raise AntipodalFramesError("a pair has antipodal viewing directions")
    return wrap_angle(np.arctan2(s, c))


def transport_rep(r_i: np.ndarray, r_j: np.ndarray, k: int) -> complex:
    """e^{i k theta_ij}: the alignment angle pushed through the character-k
    representation of SO(2)."""
    if k == 0:
        return 1.0 + 0.0j
    return complex(np.exp(1j * k * alignment_angle(r_i, r_j)))
