"""Random compositions of hyperbolic toral automorphisms.

Exact integer lattice arithmetic for cone verification, Lyapunov exponent
estimation, Fourier-side correlation functions and their decay envelopes,
and desk-scale sweeps of the orbit bounds behind them.
"""
from .cones import (Cone, ConeAnalysis, analyze_cones, default_quadrant_cones, escape_data, tilde_cones,
                    transversality_constant, verify_cone_property)
from .correlations import (CorrelationSeries, correlation_exact, correlation_quadrature, correlation_series,
                           correlation_skew, correlation_skew_mean, decay_envelope, decay_envelope_lyapunov,
                           fit_decay_rate)
from .errors import *  # noqa: F401,F403
from .lattice import Automorphism, EigenData, IntMatrix, MatrixFamily, Word, eigen_data, tilde, word_product
from .observables import TrigObservable, bnorm, random_observable
from .random_model import CylinderFunction, OmegaStream, sample_word, sample_words, skew_orbit, sigma_value
from .spectrum import SpectrumEstimate, estimate_limit_matrix, estimate_top_exponent, stable_direction
from .verification import (SweepReport, contraction_time, diophantine_sweep, estimate_lemma2_constant,
                           verify_lemma_bounds, verify_product_hyperbolicity)

__version__ = "0.1.0"
