"""Localized parallel transport on the frame manifold: spectrum, simulation,
intrinsic classification of viewing directions and a synthetic imaging loop."""

from .classify import (IntrinsicModel, classify_edges, estimate_viewing_inner,
                       generate_geometric_dataset, intrinsic_model, median_abs_error)
from .config import ExperimentConfig
from .errors import (AntipodalPoints, ConvergenceFailure, CryoTransportError, DomainError,
                     InvalidConfig, NoSpectralGap, OrderExceeded, ShapeMismatch)
from .imaging import (Density, ImageGraph, ProjectionImage, add_noise, build_image_graph,
                      invariant_distance, rotate_image, three_blob_phantom, xray_project)
from .operator import SpectrumReport, TransportMatrix, build_transport_matrix, spectrum
from .series import RationalPolynomial, TruncatedSeries
from .so3 import Frame, delta, hermitian_product, sample_haar_frames, transport_rotation
from .spectral import (J_coefficient, eigenvalue_numeric, eigenvalue_polynomial,
                       eigenvalue_upper_bound, legendre_Q, quadratic_approx, spectral_gap,
                       trace_partial_sum)

__version__ = "0.1.0"
