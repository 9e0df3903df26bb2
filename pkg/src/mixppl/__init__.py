"""Probabilistic programs over discrete-continuous mixtures.

Models are written in a small BLOG dialect, resolved into a :class:`Model`,
and queried with lexicographic likelihood weighting, the lexicographic
particle filter, their naive counterparts, or iterative refinement.
"""
from .dist import Density, LikelihoodTerm, Mass, builtin_catalog, cdf_at, evaluate_at, sample_kernel
from .dsl import load_model, parse, parse_model, resolve, tokenize
from .errors import InferenceError, MixPPLError, ModelError
from .infer import (LexWeight, PosteriorEstimate, alpha_n, cell_probability, irlw_run, llw_run,
                    lpf_run, naive_lw_run, naive_pf_run, update_lexweight)
from .model import Model, check_consistency, eval_expr, sample_world, uniform_choice

__version__ = "0.1.0"
