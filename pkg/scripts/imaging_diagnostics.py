"""Diagnostics for the simulated imaging loop.

Aligns a clean (or noisy) projection stack once, then for each cap size h
reports the calibrated epsilon, the fraction of graph edges whose views really
lie in the cap, the rotation error over near pairs, and the end-to-end
precision and recall of the classifier with the spectral-gap guard disabled.
"""

import argparse
import sys

import numpy as np

from cryo_transport import classify as cl
from cryo_transport import imaging as im
from cryo_transport import so3
from cryo_transport.io import write_rows_csv

COLUMNS = ("h", "epsilon", "edges", "edges_in_cap", "median_angle_error_deg",
           "precision", "recall")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-frames", type=int, default=200)
    ap.add_argument("--side", type=int, default=64)
    ap.add_argument("--n-angles", type=int, default=72)
    ap.add_argument("--snr", type=float, default=None)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--h", type=float, nargs="+", default=[0.05, 0.1, 0.2, 0.3, 0.5, 0.7])
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    fr = so3.sample_haar_frames(np.random.default_rng(args.seed), args.n_frames)
    images = im.project_all(im.three_blob_phantom(), fr, args.side, 1.0,
                            snr=args.snr, seed=args.seed)
    dist, rot = im.pairwise_alignment(images, args.n_angles)
    rows = []
    for h in args.h:
        graph = im.graph_from_alignment(dist, rot, im.calibrate_epsilon(dist, h))
        truth = im.edge_truth(graph, fr, h)
        errs = im.angular_errors(fr, rot, float(np.degrees(np.arccos(1 - h))))
        model = cl.intrinsic_model(graph.transport_matrix(h), gap_tol=0.0)
        lab = cl.classify_edges(model, graph.edges, 1 - h, truth=truth)
        rows.append((h, graph.epsilon, len(graph.edges), float(truth.mean()),
                     float(np.median(errs)), lab.precision, lab.recall))
    write_rows_csv(args.out or sys.stdout, COLUMNS, rows)


if __name__ == "__main__":
    main()
