"""Frames, group actions and transport data on the frame manifold.

A frame ``x = (e1, e2, e3)`` is stored as the 3x3 matrix whose columns are
the basis vectors, so the frame manifold is identified with SO(3). The third
column is the viewing direction. In-plane rotations (the distinguished SO(2))
are represented as unit complex numbers ``g = cos(theta) + i sin(theta)``.

Batched variants operate on stacks of frames with shape ``(N, 3, 3)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AntipodalPoints

ANTIPODAL_TOL = 1e-9


@dataclass(frozen=True)
class Frame:
    """Oriented orthonormal frame; ``matrix[:, k]`` is ``e_{k+1}``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"frame matrix must be 3x3, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def e1(self) -> np.ndarray:
        return self.matrix[:, 0]

    @property
    def e2(self) -> np.ndarray:
        return self.matrix[:, 1]

    @property
    def e3(self) -> np.ndarray:
        return self.matrix[:, 2]

    @property
    def viewing_direction(self) -> np.ndarray:
        return self.matrix[:, 2]

    @classmethod
    def identity(cls) -> "Frame":
        return cls(np.eye(3))

    def is_valid(self, tol: float = 1e-12) -> bool:
        m = self.matrix
        return (np.allclose(m.T @ m, np.eye(3), atol=tol, rtol=0)
                and abs(np.linalg.det(m) - 1.0) <= tol)


def planar_rotation(g: complex) -> np.ndarray:
    """Embed a unit complex number as the SO(3) matrix fixing e3."""
    return np.array([[g.real, -g.imag, 0.0],
                     [g.imag, g.real, 0.0],
                     [0.0, 0.0, 1.0]])


def quaternion_to_matrix(q: np.ndarray) -> np.ndarray:
    """Rotation matrices from unit quaternions ``(w, x, y, z)``; batched over leading axes."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    out = np.empty(q.shape[:-1] + (3, 3))
    out[..., 0, 0] = 1 - 2 * (y * y + z * z)
    out[..., 0, 1] = 2 * (x * y - z * w)
    out[..., 0, 2] = 2 * (x * z + y * w)
    out[..., 1, 0] = 2 * (x * y + z * w)
    out[..., 1, 1] = 1 - 2 * (x * x + z * z)
    out[..., 1, 2] = 2 * (y * z - x * w)
    out[..., 2, 0] = 2 * (x * z - y * w)
    out[..., 2, 1] = 2 * (y * z + x * w)
    out[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return out


def sample_haar_frames(rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` Haar-distributed frames as an ``(n, 3, 3)`` array."""
    q = rng.standard_normal((n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    return quaternion_to_matrix(q)


def sample_haar_frame(rng: np.random.Generator) -> Frame:
    return Frame(sample_haar_frames(rng, 1)[0])


def random_unit_complex(rng: np.random.Generator, size=None):
    theta = rng.uniform(0.0, 2.0 * np.pi, size)
    return np.exp(1j * theta)


def act_left(g: np.ndarray, x: Frame) -> Frame:
    """``g |> x``: rotate every basis vector by ``g``."""
    return Frame(np.asarray(g) @ x.matrix)


def act_right(x: Frame, g: complex) -> Frame:
    """``x <| g``: mix e1, e2 by the planar rotation ``g``; e3 is fixed."""
    return Frame(x.matrix @ planar_rotation(g))


def _skew(k: np.ndarray) -> np.ndarray:
    return np.array([[0.0, -k[2], k[1]],
                     [k[2], 0.0, -k[0]],
                     [-k[1], k[0], 0.0]])


def geodesic_transport(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Rotation carrying ``w`` to ``v`` along the shortest great-circle arc.

    Rotates about ``w x v`` and fixes that axis; vectors in the great-circle
    plane are turned by the arc angle.
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    c = float(w @ v)
    if c <= -1.0 + ANTIPODAL_TOL:
        raise AntipodalPoints(f"inner product {c!r} is within {ANTIPODAL_TOL} of -1")
    K = _skew(np.cross(w, v))
    return np.eye(3) + K + (K @ K) / (1.0 + c)


def transport_rotation(x: Frame, y: Frame) -> complex:
    """Transport data ``T(x, y)``: the solution of ``x <| T = t_{pi(x),pi(y)} |> y``."""
    t = geodesic_transport(x.e3, y.e3)
    u = t @ y.e1
    g = complex(x.e1 @ u, x.e2 @ u)
    return g / abs(g)


def transport_rotations(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorised ``T(x_k, y_k)`` for frame stacks of shape ``(M, 3, 3)``.

    Same formula as :func:`transport_rotation`, written with the Rodrigues
    expansion ``t u = u + k x u + k x (k x u) / (1 + c)``.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    v = xs[..., :, 2]
    w = ys[..., :, 2]
    c = np.einsum("...i,...i->...", v, w)
    if np.any(c <= -1.0 + ANTIPODAL_TOL):
        raise AntipodalPoints("at least one pair of viewing directions is antipodal")
    k = np.cross(w, v)
    u = ys[..., :, 0]
    ku = np.cross(k, u)
    kku = np.cross(k, ku)
    tu = u + ku + kku / (1.0 + c)[..., None]
    re = np.einsum("...i,...i->...", xs[..., :, 0], tu)
    im = np.einsum("...i,...i->...", xs[..., :, 1], tu)
    g = re + 1j * im
    return g / np.abs(g)


def delta(x: Frame) -> np.ndarray:
    """The complex vector ``e1 - i e2``."""
    return x.e1 - 1j * x.e2


def deltas(xs: np.ndarray) -> np.ndarray:
    """``e1 - i e2`` for a stack of frames; shape ``(N, 3)``."""
    xs = np.asarray(xs)
    return xs[..., :, 0] - 1j * xs[..., :, 1]


def hermitian_product(w1, w2) -> complex:
    """Sesquilinear product on C^3, linear in the first slot."""
    return complex(np.sum(np.asarray(w1) * np.conj(np.asarray(w2))))
