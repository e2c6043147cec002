"""esslab: essential spectra of Jacobi and CMV operators via right limits."""

from .config import DEFAULT, Tolerances
from .sequences import ParamWindow, ScenarioSpec, d_metric, distance_to_torus, spec_from_json, window
from .spectra import (CircleSpectralSet, PointCloud, RealSpectralSet,
                      cloud_to_set, hausdorff_distance, sample, union_and_close)
from .jacobi import FiniteJacobi, PeriodicJacobi, band_spectrum, discriminant, eigenvalues, truncate
from .cmv import (FiniteCMV, PeriodicVerblunsky, build_cmv, cmv_band_arcs,
                  cmv_discriminant, paraorthogonal_zeros, szego_phi, theta)
from .limits import detect_right_limits, limit_spectrum, right_limit_set
from .esscore import essential_spectrum, truncation_spectrum, verify_theorem

__version__ = "0.1.0"
