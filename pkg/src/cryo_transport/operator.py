"""Monte-Carlo discretisation of the localized parallel transport operator."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from . import so3
from .errors import AntipodalPoints, ConvergenceFailure
from .spectral import eigenvalue_numeric

DENSE_LIMIT = 4096
CLUSTER_REL_TOL = 0.15
_BLOCK = 512


@dataclass(frozen=True)
class TransportMatrix:
    """Sparse Hermitian matrix with entries ``T(x_i, x_j) / n`` inside the cap.

    ``matrix`` is a CSR matrix; ``entry(j, i)`` is the exact conjugate of
    ``entry(i, j)`` because the lower triangle is built by conjugating the
    upper one.
    """

    n: int
    h: float
    matrix: scipy.sparse.csr_matrix

    def entry(self, i: int, j: int) -> complex:
        return complex(self.matrix[i, j])

    @property
    def nnz_offdiag(self) -> int:
        return int(self.matrix.nnz - self.n)

    def neighbor_fraction(self) -> float:
        """Fraction of unordered off-diagonal pairs that carry an entry."""
        return self.nnz_offdiag / (self.n * (self.n - 1))

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()


def cap_pairs(frames: np.ndarray, h: float):
    """Index pairs ``i < j`` with ``(pi(x_i), pi(x_j)) > 1 - h``; brute-force scan."""
    v = np.asarray(frames)[:, :, 2]
    n = len(v)
    rows, cols = [], []
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        dots = v[start:stop] @ v.T
        ii, jj = np.nonzero(dots > 1.0 - h)
        ii = ii + start
        keep = jj > ii
        rows.append(ii[keep])
        cols.append(jj[keep])
    return np.concatenate(rows), np.concatenate(cols)


def assemble(n: int, rows, cols, values, h: float) -> TransportMatrix:
    """Hermitian matrix from upper-triangle ``values`` (unit modulus) plus the diagonal."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    values = np.asarray(values, dtype=complex) / n
    diag = np.arange(n)
    r = np.concatenate([rows, cols, diag])
    c = np.concatenate([cols, rows, diag])
    d = np.concatenate([values, np.conj(values), np.full(n, 1.0 / n, dtype=complex)])
    m = scipy.sparse.csr_matrix((d, (r, c)), shape=(n, n))
    m.sort_indices()
    return TransportMatrix(n=n, h=float(h), matrix=m)


def build_transport_matrix(frames: np.ndarray, h: float) -> TransportMatrix:
    """Discretised ``T_h``: entry ``(i, j)`` is ``T(x_i, x_j) / N`` when the
    viewing directions lie within the cap of height ``h``."""
    frames = np.asarray(frames, dtype=float)
    n = len(frames)
    if n < 2:
        raise ValueError("need at least two frames")
    if not 0.0 < h <= 2.0:
        raise ValueError(f"h must lie in (0, 2], got {h!r}")
    rows, cols = cap_pairs(frames, h)
    try:
        vals = so3.transport_rotations(frames[rows], frames[cols]) if len(rows) else []
    except AntipodalPoints as exc:
        raise AntipodalPoints(f"cap h={h} contains antipodal viewing directions") from exc
    return assemble(n, rows, cols, vals, h)


def top_eigenpairs(M: TransportMatrix, k: int):
    """Largest ``k`` eigenvalues (descending) and eigenvectors (columns)."""
    n = M.n
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    if n <= DENSE_LIMIT:
        vals, vecs = scipy.linalg.eigh(M.to_dense(), subset_by_index=[n - k, n - 1])
    else:
        try:
            vals, vecs = scipy.sparse.linalg.eigsh(M.matrix, k=k, which="LA")
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            raise ConvergenceFailure(str(exc)) from exc
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def cluster_eigenvalues(eigenvalues, rel_tol: float = CLUSTER_REL_TOL):
    """Split a descending list where consecutive gaps exceed
    ``rel_tol * (max - min)`` of the list. Returns ``[(mean, multiplicity)]``."""
    ev = np.asarray(eigenvalues, dtype=float)
    if ev.size == 0:
        return []
    span = float(ev[0] - ev[-1])
    tol = rel_tol * span
    clusters = []
    start = 0
    for i in range(1, ev.size):
        if ev[i - 1] - ev[i] > tol:
            clusters.append((float(ev[start:i].mean()), i - start))
            start = i
    clusters.append((float(ev[start:].mean()), ev.size - start))
    return clusters


@dataclass
class SpectrumReport:
    eigenvalues: list
    clusters: list
    gaps: list = field(default_factory=list)

    @property
    def multiplicities(self) -> list:
        return [m for _, m in self.clusters]

    def to_dict(self, h: float | None = None) -> dict:
        d = {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "clusters": [{"mean": float(m), "multiplicity": int(k)} for m, k in self.clusters],
            "gaps": [float(g) for g in self.gaps],
        }
        if h is not None:
            d["predicted"] = predicted_clusters(h, len(self.clusters))
        return d


def predicted_clusters(h: float, count: int) -> list:
    return [{"n": n, "lambda": eigenvalue_numeric(n, h), "multiplicity": 2 * n + 1}
            for n in range(1, count + 1)]


def spectrum(M: TransportMatrix, k: int, rel_tol: float = CLUSTER_REL_TOL) -> SpectrumReport:
    """Top-``k`` eigenvalues of ``M`` grouped into clusters."""
    vals, _ = top_eigenpairs(M, k)
    clusters = cluster_eigenvalues(vals, rel_tol)
    gaps = [clusters[i][0] - clusters[i + 1][0] for i in range(len(clusters) - 1)]
    return SpectrumReport(eigenvalues=list(map(float, vals)), clusters=clusters, gaps=gaps)


def weight_test_vector(frames: np.ndarray, k: int, direction=(0.36, -0.48, 0.8)) -> np.ndarray:
    """Samples of a function with ``f(x <| g) = g^k f(x)``.

    ``k = 0`` is the constant function; otherwise a power of
    ``(delta_x, u)`` (weight +1) or of its conjugate (weight -1).
    """
    frames = np.asarray(frames)
    if k == 0:
        return np.ones(len(frames), dtype=complex)
    u = np.asarray(direction, dtype=float)
    base = so3.deltas(frames) @ u
    if k < 0:
        base = np.conj(base)
    return base ** abs(k)


def kernel_residual(M: TransportMatrix, frames: np.ndarray, k: int) -> float:
    """``||M v|| / ||v||`` for the weight-``k`` test vector ``v``."""
    v = weight_test_vector(frames, k)
    return float(np.linalg.norm(M.matrix @ v) / np.linalg.norm(v))


def simulate(n_frames: int, h: float, seed: int, k: int = 15) -> tuple:
    """Sample frames, build the matrix and report its top-``k`` spectrum."""
    rng = np.random.default_rng(seed)
    frames = so3.sample_haar_frames(rng, n_frames)
    M = build_transport_matrix(frames, h)
    return frames, M, spectrum(M, min(k, n_frames))
