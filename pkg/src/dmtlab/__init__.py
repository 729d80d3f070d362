"""Diversity-multiplexing tradeoff laboratory for real and quaternionic
lattice space-time codes: closed-form tradeoff curves with independent
oracles, concrete non-vanishing-determinant orders, and Monte Carlo
outage / ML-error slope estimation."""

from .channel import (ChannelSample, SystemConfig, apply_channel,
                      capacity_quaternion, mutual_info_real, power_check,
                      quaternion_lift, realify, sample_channel)
from .dmt import (Lemma2Problem, PiecewiseLinearCurve, a0_membership,
                  classical_dmt, d1_curve, d2_curve, delta_k,
                  exponent_quaternion, exponent_real,
                  laplace_exponent_estimate, lemma2_bruteforce,
                  lemma2_closed_form)
from .lattice import (Codebook, MatrixLattice, ResourceLimitError,
                      build_hamilton_order, build_split_order,
                      enumerate_shell, fixed_codebook, lattice_from_json,
                      lattice_to_json, codebook_to_json, load_lattice,
                      matrix_lattice, min_det, shape_codebook,
                      structure_check)
from .linalg import (IterationError, conj_transpose, determinant,
                     frobenius_norm, hermitian_eigenvalues)
from .sim import (EigenProfile, SlopeEstimate, check_mismatched_bound,
                  check_nvd_product_bound, chi2_tail,
                  density_ratio_check_real, estimate_error_prob,
                  estimate_outage, fit_slope, min_received_distance,
                  sample_wishart_quaternion, sample_wishart_real)

__version__ = "0.1.0"
