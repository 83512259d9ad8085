"""Synthetic projection images, invariant distance and empirical transport data.

Images sample camera coordinates ``(p, q)`` at pixel centres: column ``c``
holds ``p = -extent + (c + 1/2) * 2 extent / side`` and row ``r`` holds ``q``
on the same grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import so3
from .errors import ShapeMismatch
from .operator import TransportMatrix, assemble

SQRT_2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class Density:
    """Sum of isotropic Gaussian blobs ``A exp(-|r - c|^2 / (2 w^2))``."""

    centers: np.ndarray
    widths: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.centers, dtype=float))
        w = np.atleast_1d(np.asarray(self.widths, dtype=float))
        a = np.atleast_1d(np.asarray(self.amplitudes, dtype=float))
        if c.shape[1] != 3 or not (len(c) == len(w) == len(a)) or len(c) == 0:
            raise ValueError("need matching, non-empty centers (K,3), widths (K,), amplitudes (K,)")
        if np.any(w <= 0):
            raise ValueError("blob widths must be positive")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "widths", w)
        object.__setattr__(self, "amplitudes", a)

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        d2 = np.sum((r[..., None, :] - self.centers) ** 2, axis=-1)
        return np.sum(self.amplitudes * np.exp(-d2 / (2 * self.widths ** 2)), axis=-1)


def three_blob_phantom() -> Density:
    """Asymmetric reference phantom: unequal blobs whose plane misses the origin.

    Three isotropic blobs are always mirror-symmetric in their own plane; two
    views related by that mirror differ by an image translation proportional to
    the plane's distance from the origin (about 0.4 here), which keeps them
    apart under the rotation-only invariant distance.
    """
    return Density(
        centers=[[0.45, 0.0, 0.45], [-0.35, 0.35, 0.35], [-0.10, -0.40, 0.50]],
        widths=[0.09, 0.13, 0.20],
        amplitudes=[1.0, 0.8, 0.6],
    )


@dataclass(frozen=True)
class ProjectionImage:
    pixels: np.ndarray
    extent: float

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=float)
        if px.ndim != 2 or px.shape[0] != px.shape[1]:
            raise ValueError("pixels must be a square 2-D array")
        if not self.extent > 0:
            raise ValueError("extent must be positive")
        if not np.all(np.isfinite(px)):
            raise ValueError("pixels must be finite")
        object.__setattr__(self, "pixels", px)

    @property
    def side(self) -> int:
        return self.pixels.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.pixels))


def pixel_coordinates(side: int, extent: float) -> np.ndarray:
    step = 2.0 * extent / side
    return -extent + (np.arange(side) + 0.5) * step


def xray_project(density: Density, x, side: int, extent: float) -> ProjectionImage:
    """Line integral of ``density`` along ``pi(x)``; closed form per Gaussian blob."""
    if side < 8:
        raise ValueError("side must be >= 8")
    m = np.asarray(getattr(x, "matrix", x), dtype=float)
    e1, e2 = m[:, 0], m[:, 1]
    coords = pixel_coordinates(side, extent)
    P, Q = np.meshgrid(coords, coords)      # P varies along columns, Q along rows
    img = np.zeros((side, side))
    for c, w, a in zip(density.centers, density.widths, density.amplitudes):
        cp, cq = c @ e1, c @ e2
        img += a * SQRT_2PI * w * np.exp(-((P - cp) ** 2 + (Q - cq) ** 2) / (2 * w * w))
    return ProjectionImage(img, extent)


def _rotation_sample_coords(side: int, g: complex) -> np.ndarray:
    # R(g) I (p, q) = I(g^-1 (p, q)); returned in fractional pixel indices
    centre = (side - 1) / 2.0
    idx = np.arange(side) - centre
    cc, rr = np.meshgrid(idx, idx)          # cc ~ p, rr ~ q (pixel units)
    c, s = g.real, g.imag
    src_p = c * cc + s * rr
    src_q = -s * cc + c * rr
    return np.stack([src_q + centre, src_p + centre])


def rotate_image(image: ProjectionImage, g: complex) -> ProjectionImage:
    """``R(g) I``: bilinear resampling at ``g^-1 (p, q)``; outside samples read 0."""
    g = complex(g)
    if g == 1:
        return ProjectionImage(image.pixels.copy(), image.extent)
    coords = _rotation_sample_coords(image.side, g)
    out = ndimage.map_coordinates(image.pixels, coords, order=1, mode="constant", cval=0.0)
    return ProjectionImage(out, image.extent)


def rotation_grid(n_angles: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n_angles) / n_angles)


def rotated_stack(image: ProjectionImage, n_angles: int) -> np.ndarray:
    """``R(g_k) I`` for the uniform angle grid, flattened: shape ``(n_angles, side**2)``."""
    return np.stack([rotate_image(image, g).pixels.ravel() for g in rotation_grid(n_angles)])


def _refine(d2: np.ndarray, k: int) -> float:
    # vertex of the parabola through the three samples around k, in grid steps
    n = len(d2)
    a, b, c = d2[(k - 1) % n], d2[k], d2[(k + 1) % n]
    denom = a - 2 * b + c
    if denom <= 0:
        return 0.0
    return float(np.clip(0.5 * (a - c) / denom, -0.5, 0.5))


def _best_rotation(d2: np.ndarray, refine: bool):
    k = int(np.argmin(d2))          # first occurrence: smallest angle wins ties
    n = len(d2)
    offset = _refine(d2, k) if refine else 0.0
    g = np.exp(2j * np.pi * (k + offset) / n)
    return k, complex(g)


def check_same_grid(a: ProjectionImage, b: ProjectionImage):
    if a.pixels.shape != b.pixels.shape or a.extent != b.extent:
        raise ShapeMismatch(f"images differ: {a.pixels.shape}/{a.extent} vs "
                            f"{b.pixels.shape}/{b.extent}")


def invariant_distance(I1: ProjectionImage, I2: ProjectionImage, n_angles: int = 72,
                       refine: bool = False):
    """``min_g ||R(g) I1 - I2||`` over ``n_angles`` uniform rotations and its argmin.

    With ``refine`` the argmin angle is moved to the vertex of a parabola
    through the neighbouring samples; the distance stays the grid minimum.
    """
    check_same_grid(I1, I2)
    if n_angles < 4:
        raise ValueError("n_angles must be >= 4")
    stack = rotated_stack(I1, n_angles)
    d2 = np.sum((stack - I2.pixels.ravel()) ** 2, axis=1)
    k, g = _best_rotation(d2, refine)
    return float(np.sqrt(max(d2[k], 0.0))), g


def add_noise(image: ProjectionImage, snr: float, rng: np.random.Generator) -> ProjectionImage:
    """White Gaussian noise with variance ``||I||^2 / (snr * side^2)``."""
    if not snr > 0:
        raise ValueError("snr must be positive")
    sigma = image.norm() / np.sqrt(snr * image.side ** 2)
    noise = rng.normal(0.0, sigma, image.pixels.shape)
    return ProjectionImage(image.pixels + noise, image.extent)


@dataclass
class ImageGraph:
    """Thresholded all-pairs invariant distances with aligning rotations.

    ``rotations[k]`` is the transport estimate for ``edges[k] = (i, j)``,
    oriented like the geometric ``T(x_i, x_j)``; the reverse direction is its
    conjugate.
    """

    n: int
    epsilon: float
    edges: np.ndarray
    distances: np.ndarray
    rotations: np.ndarray
    all_distances: np.ndarray | None = None

    def rotation(self, i: int, j: int) -> complex:
        """Stored ``T~(i, j)``; ``rotation(j, i)`` is its exact conjugate."""
        if i < j:
            k = self._find(i, j)
            return complex(self.rotations[k])
        k = self._find(j, i)
        return complex(np.conj(self.rotations[k]))

    def _find(self, i, j):
        hit = np.nonzero((self.edges[:, 0] == i) & (self.edges[:, 1] == j))[0]
        if not len(hit):
            raise KeyError((i, j))
        return int(hit[0])

    def transport_matrix(self, h: float = float("nan")) -> TransportMatrix:
        """The Hermitian matrix of empirical transport data, scaled by ``1/n``."""
        return assemble(self.n, self.edges[:, 0], self.edges[:, 1], self.rotations, h)


def pairwise_alignment(images, n_angles: int = 72, refine: bool = False):
    """All unordered pairs: distances ``d(I_i, I_j)`` and the alignment of ``I_j`` onto ``I_i``.

    Returns ``(dist, rot)`` as ``(n, n)`` arrays filled for ``i < j``.
    ``rot[i, j]`` is ``argmin_g ||R(g) I_j - I_i||``, which matches the
    orientation of ``T(x_i, x_j)``; the minimiser of ``||R(g) I_i - I_j||`` is
    its inverse and gives the same distance.
    """
    images = list(images)
    n = len(images)
    if n < 2:
        raise ValueError("need at least two images")
    for im in images[1:]:
        check_same_grid(images[0], im)
    flat = np.stack([im.pixels.ravel() for im in images])
    sq = np.sum(flat ** 2, axis=1)
    dist = np.zeros((n, n))
    rot = np.ones((n, n), dtype=complex)
    for j in range(1, n):
        stack = rotated_stack(images[j], n_angles)           # R(g) I_j
        snorm = np.sum(stack ** 2, axis=1)
        cross = stack @ flat[:j].T                           # (n_angles, j)
        d2 = snorm[:, None] + sq[None, :j] - 2.0 * cross
        for i in range(j):
            k, g = _best_rotation(d2[:, i], refine)
            dist[i, j] = np.sqrt(max(d2[k, i], 0.0))
            rot[i, j] = g
    return dist, rot


def calibrate_epsilon(dist: np.ndarray, h: float) -> float:
    """Distance quantile that keeps the fraction ``h/2`` of pairs (the cap area)."""
    n = dist.shape[0]
    iu = np.triu_indices(n, 1)
    return float(np.quantile(dist[iu], h / 2.0))


def build_image_graph(images, epsilon: float | None = None, n_angles: int = 72,
                      h: float | None = None, refine: bool = False) -> ImageGraph:
    """Edges ``{i, j}`` with ``d(I_i, I_j) <= epsilon``, each with its rotation.

    When ``epsilon`` is ``None`` it is calibrated from ``h``.
    """
    dist, rot = pairwise_alignment(images, n_angles, refine)
    if epsilon is None:
        if h is None:
            raise ValueError("give epsilon or h")
        epsilon = calibrate_epsilon(dist, h)
    return graph_from_alignment(dist, rot, epsilon)


def graph_from_alignment(dist: np.ndarray, rot: np.ndarray, epsilon: float) -> ImageGraph:
    """Threshold the output of :func:`pairwise_alignment` at ``epsilon``."""
    n = dist.shape[0]
    iu = np.triu_indices(n, 1)
    keep = dist[iu] <= epsilon
    rows, cols = iu[0][keep], iu[1][keep]
    return ImageGraph(n=n, epsilon=float(epsilon),
                      edges=np.stack([rows, cols], axis=1).astype(np.int64),
                      distances=dist[rows, cols], rotations=rot[rows, cols],
                      all_distances=dist)


def project_all(density: Density, frames, side: int, extent: float, snr: float | None = None,
                rng: np.random.Generator | None = None, seed: int | None = None):
    """Projections for every frame; noise (if any) uses one substream per image."""
    images = [xray_project(density, f, side, extent) for f in frames]
    if snr is None:
        return images
    if seed is None:
        seed = int(rng.integers(2**63)) if rng is not None else 0
    streams = np.random.SeedSequence(seed).spawn(len(images))
    return [add_noise(im, snr, np.random.default_rng(s)) for im, s in zip(images, streams)]


def angular_errors(frames: np.ndarray, rot: np.ndarray, max_angle_deg: float = 10.0):
    """``|arg T~(i, j) - arg T(x_i, x_j)|`` in degrees for pairs ``i < j`` whose
    viewing directions are at most ``max_angle_deg`` apart.

    ``rot`` is the ``(n, n)`` array from :func:`pairwise_alignment`.
    """
    frames = np.asarray(frames)
    v = frames[:, :, 2]
    iu = np.triu_indices(len(v), 1)
    cos = np.clip(np.einsum("ij,ij->i", v[iu[0]], v[iu[1]]), -1.0, 1.0)
    near = np.degrees(np.arccos(cos)) <= max_angle_deg
    r, c = iu[0][near], iu[1][near]
    if not len(r):
        return np.empty(0)
    T = so3.transport_rotations(frames[r], frames[c])
    return np.degrees(np.abs(np.angle(rot[r, c] * np.conj(T))))


def edge_truth(graph: ImageGraph, frames: np.ndarray, h: float) -> np.ndarray:
    """Whether each graph edge joins viewing directions inside the cap of height ``h``."""
    v = np.asarray(frames)[:, :, 2]
    e = graph.edges
    return np.einsum("ij,ij->i", v[e[:, 0]], v[e[:, 1]]) > 1.0 - h
