"""Lexicographic importance weights and the min-d weighted estimator."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dist import LikelihoodTerm
from ..errors import ZeroWeightError

NEG_INF = -math.inf


@dataclass(frozen=True)
class LexWeight:
    """A sample weight ``(d, logw)``: density-factor count and log weight."""

    d: int = 0
    logw: float = 0.0

    @property
    def w(self):
        return math.exp(self.logw)


def _log(x):
    return math.log(x) if x > 0 else NEG_INF


def update_lexweight(lw, term: LikelihoodTerm, lexicographic=True):
    """Fold one likelihood term into a weight.

    A mass keeps ``d``; a density increments it. With ``lexicographic=False``
    the counter is left alone, which is ordinary likelihood weighting.
    """
    d = lw.d + (0 if term.is_mass or not lexicographic else 1)
    return LexWeight(d, lw.logw + _log(term.value))


def fold_terms(d, logw, is_mass, value, lexicographic=True):
    """Vectorised :func:`update_lexweight` over sample lanes."""
    with np.errstate(divide="ignore"):
        logw = logw + np.log(np.asarray(value, dtype=float))
    if lexicographic:
        d = d + (~np.asarray(is_mass, dtype=bool)).astype(np.int64)
    return d, logw


def surviving(d, logw):
    """Mask of samples with nonzero weight and minimal ``d``; and that ``d``."""
    d = np.asarray(d)
    logw = np.asarray(logw, dtype=float)
    alive = logw > NEG_INF
    if not alive.any():
        return alive, None
    d_star = int(d[alive].min())
    return alive & (d == d_star), d_star


def _scaled(d, logw):
    keep, d_star = surviving(d, logw)
    if d_star is None:
        return keep, None, None
    lw = np.asarray(logw, dtype=float)[keep]
    return keep, d_star, np.exp(lw - lw.max())


def lexicographic_estimate(d, logw, f):
    """Weighted mean of ``f`` over samples at the minimal density count.

    Returns ``(estimate, d_star, surviving_mask)``. Raises
    :class:`ZeroWeightError` when every sample has zero weight.
    """
    keep, d_star, e = _scaled(d, logw)
    if d_star is None:
        raise ZeroWeightError(f"all {len(keep)} samples have zero weight")
    fk = np.asarray(f, dtype=float)[keep]
    return float(np.sum(e * fk) / np.sum(e)), d_star, keep


def normalized_weights(d, logw):
    """Per-sample normalised weights; discarded samples get exactly 0."""
    keep, d_star, e = _scaled(d, logw)
    out = np.zeros(len(keep))
    if d_star is None:
        return out
    out[keep] = e / np.sum(e)
    return out


def effective_sample_size(d, logw):
    keep, d_star, e = _scaled(d, logw)
    if d_star is None:
        return 0.0
    return float(np.sum(e) ** 2 / np.sum(e * e))
