"""Small dense matrix primitives for so(3), SO(3) and block so(6).

Matrices are plain numpy arrays.  Functions accept a trailing ``(3, 3)``
shape and broadcast over any leading axes, so the same code handles a
single node or a whole grid of nodes.

Axis convention: ``skew_from_triple((a12, a13, a23))`` has dual axis
vector ``w = (-a23, a13, -a12)``, i.e. ``skew(t) @ v == cross(w, v)``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

SMALL_ANGLE = 1e-6


class SkewTriple(NamedTuple):
    """Slots (1,2), (1,3), (2,3) of a 3x3 antisymmetric matrix."""

    a12: float
    a13: float
    a23: float

    def __neg__(self):
        return SkewTriple(-self.a12, -self.a13, -self.a23)

    def scaled(self, s):
        return SkewTriple(s * self.a12, s * self.a13, s * self.a23)


def skew_from_triple(t) -> np.ndarray:
    """Return ``[[0, a12, a13], [-a12, 0, a23], [-a13, -a23, 0]]``.

    Components may be arrays; the result then has shape ``(*shape, 3, 3)``.
    """
    a12, a13, a23 = (np.asarray(c, dtype=float) for c in t)
    a12, a13, a23 = np.broadcast_arrays(a12, a13, a23)
    out = np.zeros(a12.shape + (3, 3))
    out[..., 0, 1] = a12
    out[..., 0, 2] = a13
    out[..., 1, 2] = a23
    out[..., 1, 0] = -a12
    out[..., 2, 0] = -a13
    out[..., 2, 1] = -a23
    return out


def triple_from_skew(m) -> SkewTriple:
    m = np.asarray(m)
    return SkewTriple(m[..., 0, 1], m[..., 0, 2], m[..., 1, 2])


def axis_vector(t) -> np.ndarray:
    """Dual vector ``w`` of ``skew_from_triple(t)``."""
    a12, a13, a23 = (np.asarray(c, dtype=float) for c in t)
    return np.stack(np.broadcast_arrays(-a23, a13, -a12), axis=-1)


def commutator(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a @ b - b @ a


def rodrigues_exp(t) -> np.ndarray:
    """Closed-form ``exp(skew_from_triple(t))``.

    Uses ``I + sin(th)/th M + (1 - cos(th))/th^2 M^2`` and a Taylor
    fallback for angles below ``SMALL_ANGLE``.
    """
    m = skew_from_triple(t)
    w = axis_vector(t)
    theta2 = np.sum(w * w, axis=-1)
    theta = np.sqrt(theta2)
    small = theta < SMALL_ANGLE
    safe = np.where(small, 1.0, theta)
    a = np.where(small, 1.0 - theta2 / 6.0 + theta2**2 / 120.0, np.sin(safe) / safe)
    b = np.where(
        small, 0.5 - theta2 / 24.0 + theta2**2 / 720.0, (1.0 - np.cos(safe)) / safe**2
    )
    m2 = m @ m
    eye = np.broadcast_to(np.eye(3), m.shape)
    return eye + a[..., None, None] * m + b[..., None, None] * m2


def block_diag(a, b) -> np.ndarray:
    """6x6 matrix with ``a`` top-left and ``b`` bottom-right, zeros elsewhere."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    shape = np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    out = np.zeros(shape + (6, 6))
    out[..., :3, :3] = a
    out[..., 3:, 3:] = b
    return out


def orthonormality_defect(r) -> np.ndarray | float:
    """Frobenius norm of ``R R^T - I``."""
    r = np.asarray(r, dtype=float)
    d = r @ np.swapaxes(r, -1, -2) - np.eye(3)
    out = np.sqrt(np.sum(d * d, axis=(-2, -1)))
    return float(out) if out.ndim == 0 else out


def is_rotation(r, tol=1e-10) -> bool:
    r = np.asarray(r, dtype=float)
    if r.shape[-2:] != (3, 3) or not np.all(np.isfinite(r)):
        return False
    return bool(
        np.all(orthonormality_defect(r) <= tol)
        and np.all(np.abs(np.linalg.det(r) - 1.0) <= tol)
    )
