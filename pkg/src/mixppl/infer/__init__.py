"""Inference engines over lexicographic weights."""
from .engines import (CHUNK, PosteriorEstimate, alpha_n, cell_probability, irlw_run, llw_run,
                      lpf_run, naive_lw_run, naive_pf_run, trace_rows)
from .weights import (LexWeight, effective_sample_size, fold_terms, lexicographic_estimate,
                      normalized_weights, surviving, update_lexweight)
