"""The four experiment pipelines, each driven by an :class:`ExperimentConfig`.

Every ``run_*`` returns plain Python data (dicts, lists, floats) so the CLI
only has to serialise it.
"""

from __future__ import annotations

import numpy as np

from . import classify as cl
from . import imaging as im
from . import so3
from .config import ExperimentConfig
from .errors import NoSpectralGap
from .operator import simulate
from .spectral import EXACT_ORDER_CAP, eigenvalue_polynomial, eigenvalue_table

SPECTRUM_COLUMNS = ("n", "h", "lambda", "quadratic_approx", "upper_bound", "gap")


def spectrum_rows(n_max: int, h_grid) -> list:
    """Rows ``(n, h, lambda_n, quadratic, sqrt(h)/sqrt(4n+2), lambda_1 - lambda_2)``."""
    h = np.asarray(h_grid, dtype=float)
    lam = eigenvalue_table(max(n_max, 2), h)
    gap = lam[0] - lam[1]
    rows = []
    for n in range(1, n_max + 1):
        quad = 0.5 * h - (1 + (n + 2) * (n - 1)) * h * h / 8.0
        bound = np.sqrt(h) / np.sqrt(4 * n + 2)
        for k in range(h.size):
            rows.append((n, float(h[k]), float(lam[n - 1, k]), float(quad[k]),
                         float(bound[k]), float(gap[k])))
    return rows


def coefficient_table(n_max: int) -> list:
    """Exact coefficients of ``lambda_n(h)`` (lowest degree first) as ``"p/q"`` strings."""
    out = []
    for n in range(1, min(n_max, EXACT_ORDER_CAP) + 1):
        poly = eigenvalue_polynomial(n)
        out.append({"n": n, "coefficients": [str(c) for c in poly.coefficients]})
    return out


def run_spectrum(cfg: ExperimentConfig) -> dict:
    rows = spectrum_rows(cfg.n_max, cfg.h_values())
    return {"columns": list(SPECTRUM_COLUMNS), "rows": rows,
            "exact_coefficients": coefficient_table(cfg.n_max)}


def run_simulate(cfg: ExperimentConfig) -> dict:
    _, _, report = simulate(cfg.n_frames, cfg.h, cfg.seed, k=cfg.k)
    d = report.to_dict(cfg.h)
    return {"n": cfg.n_frames, "h": cfg.h, "seed": cfg.seed,
            "eigenvalues": d["eigenvalues"],
            "clusters": d["clusters"],
            "multiplicities": report.multiplicities,
            "predicted": d["predicted"]}


def _labeling_summary(model, labeling, frames, rescale) -> dict:
    return {"median_abs_error": cl.median_abs_error(model, frames, rescale),
            "precision": labeling.precision,
            "recall": labeling.recall,
            "clamp_count": labeling.clamp_count,
            "threshold": labeling.threshold,
            "eigenvalues": [float(v) for v in model.eigenvalues],
            "fourth_eigenvalue": model.fourth_eigenvalue}


def run_classify(cfg: ExperimentConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    data = cl.generate_geometric_dataset(cfg.n_frames, cfg.h, cfg.outlier_frac, rng)
    model = cl.intrinsic_model(data.matrix, cfg.gap_tol, cfg.normalization)
    labeling = cl.classify_edges(model, data.edges, cfg.effective_threshold,
                                 truth=data.labels, rescale=cfg.rescale)
    out = {"n": cfg.n_frames, "h": cfg.h, "outlier_frac": cfg.outlier_frac, "seed": cfg.seed,
           "edge_count": int(len(data.edges))}
    out.update(_labeling_summary(model, labeling, data.frames, cfg.rescale))
    truth = cl.true_inner_products(data.frames, data.edges[:, 0], data.edges[:, 1])
    out["_estimates"] = [(int(i), int(j), float(e), float(t)) for (i, j), e, t
                         in zip(data.edges, labeling.estimates, truth)]
    return out


def run_imaging(cfg: ExperimentConfig) -> dict:
    """Project, align, threshold; optionally classify the resulting graph.

    Private keys (leading underscore) carry arrays for the CLI's file outputs.
    """
    rng = np.random.default_rng(cfg.seed)
    frames = so3.sample_haar_frames(rng, cfg.n_frames)
    images = im.project_all(im.three_blob_phantom(), frames, cfg.side, cfg.extent,
                            snr=cfg.snr, seed=cfg.seed)
    dist, rot = im.pairwise_alignment(images, cfg.n_angles, cfg.refine)
    eps = cfg.epsilon if cfg.epsilon is not None else im.calibrate_epsilon(dist, cfg.h)
    graph = im.graph_from_alignment(dist, rot, eps)
    truth = im.edge_truth(graph, frames, cfg.h)
    errs = im.angular_errors(frames, rot, 10.0)
    out = {"n": cfg.n_frames, "h": cfg.h, "seed": cfg.seed, "epsilon": float(eps),
           "edge_count": int(len(graph.edges)),
           "edges_in_cap_fraction": float(truth.mean()) if len(truth) else None,
           "near_pair_count": int(errs.size),
           "median_angle_error_deg": float(np.median(errs)) if errs.size else None,
           "_images": images, "_graph": graph}
    if cfg.end_to_end:
        try:
            model = cl.intrinsic_model(graph.transport_matrix(cfg.h), cfg.gap_tol,
                                       cfg.normalization)
        except NoSpectralGap as exc:
            # the graph outputs are still useful; the CLI reports the failure
            out["classification"] = {"error": type(exc).__name__, "message": str(exc)}
            out["_failure"] = exc
            return out
        labeling = cl.classify_edges(model, graph.edges, cfg.effective_threshold,
                                     truth=truth, rescale=cfg.rescale)
        out["classification"] = _labeling_summary(model, labeling, frames, cfg.rescale)
    return out


RUNNERS = {"spectrum": run_spectrum, "simulate": run_simulate,
           "classify": run_classify, "imaging": run_imaging}
