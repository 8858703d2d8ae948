"""CTMC lab: drift-criterion certificates, exact truncation solvers and Monte Carlo
for continuous-time Markov chains on countable state spaces."""

__version__ = "0.1.0"

from .chain import (AuditError, EncodingError, Model, NumericError, ScalarField, StateSet, Window,
                    apply_generator, audit_model, embedded_step_distribution, make_window, mean_drift,
                    moment_drift, window_box, window_range)
from .itlog import DomainError, LogPowerScale, iterated_exp, iterated_log, log_product
from .models import (ParameterError, QuadrantGeometry, RateProfile, harmonic_field, make_biased_walk,
                     make_lamperti, make_mock_tree, make_pure_birth, make_pure_death, make_quadrant,
                     make_srw, make_srw_half_line, make_two_ray)

__all__ = [
    "AuditError", "EncodingError", "Model", "NumericError", "ScalarField", "StateSet", "Window",
    "apply_generator", "audit_model", "embedded_step_distribution", "make_window", "mean_drift",
    "moment_drift", "window_box", "window_range", "DomainError", "LogPowerScale", "iterated_exp",
    "iterated_log", "log_product", "ParameterError", "QuadrantGeometry", "RateProfile",
    "harmonic_field", "make_biased_walk", "make_lamperti", "make_mock_tree", "make_pure_birth",
    "make_pure_death", "make_quadrant", "make_srw", "make_srw_half_line", "make_two_ray",
]
