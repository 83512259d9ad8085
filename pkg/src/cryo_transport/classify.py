"""Intrinsic classification: viewing-direction inner products from the top-3 eigenspace."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse

from . import so3
from .errors import NoSpectralGap
from .operator import CLUSTER_REL_TOL, TransportMatrix, assemble, cap_pairs, top_eigenpairs


@dataclass(frozen=True)
class IntrinsicModel:
    """Top-3 eigenspace of a transport matrix.

    ``basis`` has shape ``(n, 3)``; its columns are orthonormal. ``scale`` is
    the discrete-to-continuum normalisation (the frame count), so that
    ``(2/3) * scale * conj(basis[i]) . basis[j]`` approximates
    ``<delta_{x_i}, delta_{x_j}>``.
    """

    n: int
    eigenvalues: np.ndarray
    basis: np.ndarray
    scale: float
    fourth_eigenvalue: float
    normalization: str = "degree"

    @property
    def threshold(self) -> float:
        """Eigenvalue cut separating the top-3 eigenspace from the rest."""
        return 0.5 * (float(self.eigenvalues[-1]) + self.fourth_eigenvalue)


NORMALIZATIONS = ("degree", "none")


def degree_normalized(M: TransportMatrix) -> TransportMatrix:
    """``dbar * D^(-1/2) M D^(-1/2)`` with ``D`` the per-row entry count.

    Multiplying by the mean degree ``dbar`` keeps eigenvalues on the scale of
    ``M``; the symmetric form keeps the matrix Hermitian.
    """
    deg = np.diff(M.matrix.indptr).astype(float)
    s = scipy.sparse.diags(np.sqrt(deg.mean() / deg))
    return TransportMatrix(n=M.n, h=M.h, matrix=(s @ M.matrix @ s).tocsr())


def intrinsic_model(M: TransportMatrix, gap_tol: float = CLUSTER_REL_TOL,
                    normalization: str = "degree") -> IntrinsicModel:
    """Eigendecompose ``M`` and keep the top three eigenvectors.

    ``normalization="degree"`` first evens out per-row neighbour counts
    (see :func:`degree_normalized`), which suppresses the amplitude jitter
    that uneven sampling puts into the eigenvectors; ``"none"`` uses ``M``
    as given. Raises :class:`NoSpectralGap` when
    ``lambda_3 - lambda_4 <= gap_tol * |lambda_3|``.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    if M.n < 4:
        raise NoSpectralGap(f"need at least 4 frames, got {M.n}")
    if normalization == "degree":
        M = degree_normalized(M)
    vals, vecs = top_eigenpairs(M, 4)
    gap = vals[2] - vals[3]
    if not gap > gap_tol * abs(vals[2]):
        raise NoSpectralGap(
            f"eigenvalues 3 and 4 ({vals[2]:.6g}, {vals[3]:.6g}) are not separated; "
            "the sampling is too sparse for this cap or the cap is too wide")
    basis = np.ascontiguousarray(vecs[:, :3])
    basis.setflags(write=False)
    return IntrinsicModel(n=M.n, eigenvalues=vals[:3].copy(), basis=basis,
                          scale=float(M.n), fourth_eigenvalue=float(vals[3]),
                          normalization=normalization)


def _phi_inner_parts(basis: np.ndarray, i, j):
    # re/im of sum_k conj(b[i,k]) b[j,k], written out so swapping i and j
    # negates the imaginary part exactly
    a = basis[i]
    b = basis[j]
    ar, ai, br, bi = a.real, a.imag, b.real, b.imag
    re = ar[..., 0] * br[..., 0] + ai[..., 0] * bi[..., 0]
    im = ar[..., 0] * bi[..., 0] - ai[..., 0] * br[..., 0]
    for k in (1, 2):
        re = re + (ar[..., k] * br[..., k] + ai[..., k] * bi[..., k])
        im = im + (ar[..., k] * bi[..., k] - ai[..., k] * br[..., k])
    return re, im


def pairwise_phi_inner(model: IntrinsicModel, i, j):
    """``<phi_i, phi_j>``, the intrinsic stand-in for ``<delta_{x_i}, delta_{x_j}>``.

    Accepts scalar or array indices.
    """
    re, im = _phi_inner_parts(model.basis, i, j)
    c = (2.0 / 3.0) * model.scale
    out = c * re + 1j * (c * im)
    return complex(out) if np.ndim(out) == 0 else out


def estimate_viewing_inner_raw(model: IntrinsicModel, i, j, rescale: bool = True):
    """``|<phi_i, phi_j>| - 1`` without clamping.

    With ``rescale`` each ``phi_i`` is first scaled to norm ``sqrt(2)``, the
    norm every ``delta_x`` has; otherwise the moduli are used as they come.
    """
    re, im = _phi_inner_parts(model.basis, i, j)
    mod = np.hypot(re, im)
    if rescale:
        ni = np.sum(np.abs(model.basis[i]) ** 2, axis=-1)
        nj = np.sum(np.abs(model.basis[j]) ** 2, axis=-1)
        return 2.0 * mod / np.sqrt(ni * nj) - 1.0
    return (2.0 / 3.0) * model.scale * mod - 1.0


def estimate_pairs(model: IntrinsicModel, i, j, rescale: bool = True):
    """Clamped estimates of ``(pi(x_i), pi(x_j))`` and the number of clamped values."""
    raw = np.asarray(estimate_viewing_inner_raw(model, i, j, rescale), dtype=float)
    clamped = np.clip(raw, -1.0, 1.0)
    return clamped, int(np.count_nonzero(clamped != raw))


def estimate_viewing_inner(model: IntrinsicModel, i: int, j: int, rescale: bool = True) -> float:
    """Estimate of ``(pi(x_i), pi(x_j))`` clamped to ``[-1, 1]``."""
    return float(np.clip(estimate_viewing_inner_raw(model, i, j, rescale), -1.0, 1.0))


def estimate_matrix(model: IntrinsicModel, rescale: bool = True, block: int = 1024) -> np.ndarray:
    """Dense ``(n, n)`` array of clamped estimates."""
    n = model.n
    b = model.basis
    norms = np.sqrt(np.sum(np.abs(b) ** 2, axis=1))
    out = np.empty((n, n))
    for s in range(0, n, block):
        g = np.abs(np.conj(b[s:s + block]) @ b.T)
        if rescale:
            out[s:s + block] = 2.0 * g / np.outer(norms[s:s + block], norms) - 1.0
        else:
            out[s:s + block] = (2.0 / 3.0) * model.scale * g - 1.0
    return np.clip(out, -1.0, 1.0, out=out)


@dataclass
class EdgeLabeling:
    edges: np.ndarray
    estimates: np.ndarray
    is_neighbor: np.ndarray
    threshold: float
    clamp_count: int = 0
    is_true_neighbor: np.ndarray | None = None

    @property
    def precision(self) -> float | None:
        if self.is_true_neighbor is None:
            return None
        flagged = np.count_nonzero(self.is_neighbor)
        if flagged == 0:
            return 1.0
        return np.count_nonzero(self.is_neighbor & self.is_true_neighbor) / flagged

    @property
    def recall(self) -> float | None:
        if self.is_true_neighbor is None:
            return None
        actual = np.count_nonzero(self.is_true_neighbor)
        if actual == 0:
            return 1.0
        return np.count_nonzero(self.is_neighbor & self.is_true_neighbor) / actual


def classify_edges(model: IntrinsicModel, edges, threshold: float,
                   truth=None, rescale: bool = True) -> EdgeLabeling:
    """Label each edge a neighbour iff its estimated inner product reaches ``threshold``."""
    if not -1.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (-1, 1), got {threshold!r}")
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(edges):
        est, clamps = estimate_pairs(model, edges[:, 0], edges[:, 1], rescale)
    else:
        est, clamps = np.empty(0), 0
    truth = None if truth is None else np.asarray(truth, dtype=bool)
    return EdgeLabeling(edges=edges, estimates=est, is_neighbor=est >= threshold,
                        threshold=float(threshold), clamp_count=clamps,
                        is_true_neighbor=truth)


@dataclass
class GeometricDataset:
    frames: np.ndarray
    matrix: TransportMatrix
    edges: np.ndarray
    labels: np.ndarray

    @property
    def outlier_fraction(self) -> float:
        return float(np.count_nonzero(~self.labels) / max(len(self.labels), 1))


def sample_outlier_pairs(frames: np.ndarray, h: float, count: int,
                         rng: np.random.Generator) -> np.ndarray:
    """``count`` distinct pairs ``i < j`` whose viewing directions lie outside the cap."""
    n = len(frames)
    v = frames[:, :, 2]
    chosen: set = set()
    out = []
    while len(out) < count:
        m = 2 * (count - len(out)) + 16
        i = rng.integers(0, n, m)
        j = rng.integers(0, n, m)
        for a, b in zip(i.tolist(), j.tolist()):
            if a == b:
                continue
            a, b = (a, b) if a < b else (b, a)
            if (a, b) in chosen or float(v[a] @ v[b]) > 1.0 - h:
                continue
            chosen.add((a, b))
            out.append((a, b))
            if len(out) == count:
                break
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def generate_geometric_dataset(n: int, h: float, outlier_frac: float,
                               rng: np.random.Generator) -> GeometricDataset:
    """Haar frames, geometric transport on in-cap pairs, plus planted outlier edges.

    Outliers make up ``outlier_frac`` of all edges. They join pairs outside
    the cap and carry independent uniform unit-complex entries.
    """
    if n < 2:
        raise ValueError("need at least two frames")
    if not 0.0 <= outlier_frac < 1.0:
        raise ValueError(f"outlier_frac must lie in [0, 1), got {outlier_frac!r}")
    frames = so3.sample_haar_frames(rng, n)
    rows, cols = cap_pairs(frames, h)
    vals = so3.transport_rotations(frames[rows], frames[cols]) if len(rows) else np.empty(0)
    n_out = int(round(outlier_frac / (1.0 - outlier_frac) * len(rows)))
    bad = sample_outlier_pairs(frames, h, n_out, rng)
    bad_vals = so3.random_unit_complex(rng, len(bad))
    edges = np.concatenate([np.stack([rows, cols], axis=1), bad]).astype(np.int64)
    labels = np.concatenate([np.ones(len(rows), bool), np.zeros(len(bad), bool)])
    M = assemble(n, edges[:, 0], edges[:, 1], np.concatenate([vals, bad_vals]), h)
    return GeometricDataset(frames=frames, matrix=M, edges=edges, labels=labels)


def true_inner_products(frames: np.ndarray, i, j) -> np.ndarray:
    v = np.asarray(frames)[:, :, 2]
    return np.einsum("...k,...k->...", v[i], v[j])


def median_abs_error(model: IntrinsicModel, frames: np.ndarray, rescale: bool = True) -> float:
    """Median over all unordered pairs ``i < j`` of ``|estimate - (pi_i, pi_j)|``."""
    v = np.asarray(frames)[:, :, 2]
    n = len(v)
    est = estimate_matrix(model, rescale)
    iu = np.triu_indices(n, 1)
    err = np.abs(est[iu] - (v @ v.T)[iu])
    return float(np.median(err))
