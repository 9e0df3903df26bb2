"""Vectorised sampling of many worlds that share one variable layout.

When a model has no number statements and every random function is applied
to deterministic arguments, each sample instantiates the same basic random
variables. A :class:`BatchWorld` then stores one array per variable, with one
lane per sample, and evaluates kernels with array-valued parameters.
"""
from __future__ import annotations

import numpy as np

from .. import dist as D
from ..errors import EvaluationError, WellFoundednessError
from .evaluator import Evaluator
from .values import BasicRV, ObjectRef, Timestep

_DTYPES = {"Real": float, "Integer": np.int64, "Bool": bool}


def as_lanes(value, n, type_name=None):
    """Broadcast a scalar or array value to a length-``n`` lane array."""
    if isinstance(value, np.ndarray) and value.shape == (n,):
        arr = value
    elif value is None or isinstance(value, (ObjectRef, Timestep)):
        arr = np.empty(n, dtype=object)
        arr[:] = [value] * n
    else:
        arr = np.broadcast_to(np.asarray(value), (n,)).copy()
    dtype = _DTYPES.get(type_name)
    if dtype is not None and arr.dtype != object:
        arr = arr.astype(dtype, copy=False)
    return arr


class BatchWorld(Evaluator):
    batch = True

    def __init__(self, model, size, rng=None, *, atom_tol=0.0):
        if not model.batchable:
            raise EvaluationError("model has data-dependent structure; use the per-world sampler")
        self.model = model
        self.size = size
        self.rng = rng
        self.atom_tol = atom_tol
        self.values = {}
        self.order = []
        self.observed = {}
        self.kernels = {}
        self.terms = {}
        self._pending = set()

    def lookup(self, brv):
        if brv in self.values:
            return self.values[brv]
        if brv in self._pending:
            raise WellFoundednessError(f"dependency cycle while sampling at {brv}")
        self._pending.add(brv)
        try:
            kernel = self.kernel_for(brv)
            vtype = self.value_type(brv)
            if brv in self.observed:
                value = as_lanes(self.observed[brv], self.size, vtype)
                self.kernels[brv] = kernel
                is_mass, v = kernel.evaluate(value, self.atom_tol)
                self.terms[brv] = (as_lanes(is_mass, self.size, "Bool"), as_lanes(v, self.size, "Real"))
            else:
                value = as_lanes(kernel.sample(self.rng, self.size), self.size, vtype)
        finally:
            self._pending.discard(brv)
        self.values[brv] = value
        self.order.append(brv)
        return value

    def objects(self, type_name):
        if type_name == "Bool":
            return [False, True]
        if type_name in ("Integer", "Real"):
            raise EvaluationError(f"cannot enumerate the objects of {type_name}")
        return list(self.model.constants_by_type.get(type_name, ()))

    def observe(self, evidence):
        self.evidence_rv = {}
        for ev in evidence:
            args = tuple(self.eval(a, {}) for a in ev.args)
            brv = BasicRV("function", ev.fn, args)
            if brv in self.observed:
                raise EvaluationError(f"{ev.label} names the same variable as another observation")
            self.observed[brv] = ev.value
            self.evidence_rv[ev] = brv

    def evidence_term(self, ev):
        """Instantiate one evidence variable; returns (is_mass, value) lane arrays."""
        brv = self.evidence_rv[ev]
        self.lookup(brv)
        return self.terms[brv]

    def evidence_kernel(self, ev):
        return self.kernels[self.evidence_rv[ev]]

    def lanes(self, value, type_name=None):
        return as_lanes(value, self.size, type_name)

    def take(self, idx):
        """A new batch made of the lanes ``idx`` (used by resampling)."""
        idx = np.asarray(idx)
        out = BatchWorld.__new__(BatchWorld)
        out.__dict__.update(self.__dict__)
        out.size = len(idx)
        out.values = {k: v[idx] for k, v in self.values.items()}
        out.order = list(self.order)
        out.observed = dict(self.observed)
        out.kernels = {}
        out.terms = {}
        out._pending = set()
        return out

    @staticmethod
    def concat(parts):
        """Join batches sampled for the same variables into one."""
        first = parts[0]
        out = BatchWorld.__new__(BatchWorld)
        out.__dict__.update(first.__dict__)
        out.size = sum(p.size for p in parts)
        out.values = {k: np.concatenate([p.values[k] for p in parts]) for k in first.values}
        out.order = list(first.order)
        out.kernels = {}
        out.terms = {}
        out._pending = set()
        return out


__all__ = ["BatchWorld", "as_lanes"]
