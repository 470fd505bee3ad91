"""Smoothed large-sieve numerics: weight kernels, transform chain, quadratic forms and local spectra."""

from .arith import ArithCache, CharacterTable, build_arith_cache, character_table, gauss_sum, ramanujan_sum
from .kernel import I0, PiecewisePoly, WeightKernel, build_weight, conv_power, fourier_pm, mellin_W
from .localspec import GridFunction, PullbackVector, Spectrum, nystrom_spectrum
from .lsq import ComplexSequence, SieveParams, raw_form, smoothed_form
from .report import CheckReport
from .sequences import SequenceSpec, generate_sequence
from .transform import AccuracyError, TransformConfig, w_hat_star, w_star

__version__ = "0.1.0"
