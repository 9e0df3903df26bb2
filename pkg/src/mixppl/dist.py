"""Distribution kernels with mass/density evaluation.

Every kernel is a frozen parameterisation (``Gaussian(0.0, 1.0)``). Parameters
may be scalars or equal-length arrays, so one object can describe a batch of
conditional distributions, one per sample lane. Three operations matter to the
inference engines:

``sample(rng, size)``
    draw values.
``evaluate(x, atol)``
    return ``(is_mass, value)``: the point mass ``F(x)`` when ``x`` hits an
    atom, otherwise the Lebesgue density ``f(x)``. Purely discrete kernels
    always report a mass (possibly zero); out-of-support points of kernels
    with a continuous part report density zero.
``cdf(x)``
    ``P(Y <= x)`` with atoms at or below ``x`` included.

Parameters are validated lazily, when one of those operations runs, so that a
kernel built for a full batch can be restricted to the lanes that actually
select it before bad values in unused lanes are noticed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import EnumerationError, InvalidParametersError, UnsupportedModelError

MIX_TOL = 1e-9
POISSON_CDF_CAP = 10_000
_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


@dataclass(frozen=True)
class LikelihoodTerm:
    tag: str  # "mass" | "density"
    value: float

    @classmethod
    def mass(cls, p):
        return cls("mass", float(p))

    @classmethod
    def density(cls, f):
        return cls("density", float(f))

    @property
    def is_mass(self):
        return self.tag == "mass"

    def __repr__(self):
        return f"{'Mass' if self.is_mass else 'Density'}({self.value!r})"


def Mass(p):
    return LikelihoodTerm.mass(p)


def Density(f):
    return LikelihoodTerm.density(f)


def _f(x):
    return np.asarray(x, dtype=float)


def _is_numeric(v):
    return isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, (bool, np.bool_))


def _matches(x, loc, atol=0.0):
    """Atom equality: exact by default, ``|x - loc| <= atol`` when atol > 0."""
    x_arr = np.asarray(x)
    l_arr = np.asarray(loc)
    if x_arr.dtype == object or l_arr.dtype == object:
        if x_arr.ndim == 0 and l_arr.ndim == 0:
            a, b = x_arr.item(), l_arr.item()
            if a is None or b is None:
                return np.bool_(a is None and b is None)
            if atol > 0 and _is_numeric(a) and _is_numeric(b):
                return np.bool_(abs(a - b) <= atol)
            return np.bool_(a == b)
        return np.asarray(np.equal(x_arr, l_arr), dtype=bool)
    if x_arr.dtype == bool or l_arr.dtype == bool:
        return x_arr == l_arr
    if atol > 0:
        return np.abs(x_arr - l_arr) <= atol
    return x_arr == l_arr


def _restrict_param(p, idx):
    p_arr = np.asarray(p)
    if p_arr.ndim == 0:
        return p
    return p_arr[idx]


class Dist:
    """Base class. Subclasses set ``params`` and the class flags below."""

    name = "?"
    discrete = True  # has atoms only; evaluate always returns a mass
    real_valued = True

    def __init__(self, *params):
        self.params = params

    @property
    def continuous(self):
        return not self.discrete

    def restrict(self, idx):
        return type(self)(*(_restrict_param(p, idx) for p in self.params))

    def check(self):
        pass

    def sample(self, rng, size=None):
        self.check()
        return self._sample(rng, size)

    def evaluate(self, x, atol=0.0):
        self.check()
        return self._evaluate(x, atol)

    def cdf(self, x):
        if not self.real_valued:
            raise UnsupportedModelError(f"{self.name} is not real-valued; no CDF")
        self.check()
        return self._cdf(x)

    def support(self):
        raise EnumerationError(f"{self.name} does not have a finite support")

    def __repr__(self):
        inner = ", ".join(repr(p) for p in self.params)
        return f"{self.name}({inner})"


class Gaussian(Dist):
    """Normal distribution parameterised by mean and *variance*."""

    name = "Gaussian"
    discrete = False

    def __init__(self, mean, var):
        super().__init__(mean, var)

    def check(self):
        if not np.all(_f(self.params[1]) > 0):
            raise InvalidParametersError("Gaussian variance must be > 0")

    def _sample(self, rng, size):
        mean, var = self.params
        return rng.normal(mean, np.sqrt(var), size)

    def _evaluate(self, x, atol):
        mean, var = _f(self.params[0]), _f(self.params[1])
        z2 = (_f(x) - mean) ** 2 / var
        dens = np.exp(-0.5 * z2 - _LOG_SQRT_2PI - 0.5 * np.log(var))
        return np.zeros_like(dens, dtype=bool), dens

    def _cdf(self, x):
        mean, var = _f(self.params[0]), _f(self.params[1])
        return special.ndtr((_f(x) - mean) / np.sqrt(var))


def _log_ndtr_diff(u, v):
    """log(Phi(v) - Phi(u)) for u <= v, stable in both tails."""
    u, v = np.broadcast_arrays(_f(u), _f(v))
    with np.errstate(divide="ignore", invalid="ignore"):
        upper = special.log_ndtr(-u) + np.log1p(-np.exp(special.log_ndtr(-v) - special.log_ndtr(-u)))
        lower = special.log_ndtr(v) + np.log1p(-np.exp(special.log_ndtr(u) - special.log_ndtr(v)))
    return np.where(u > 0, upper, lower)


class TruncatedGauss(Dist):
    """Normal(mean, variance) restricted to ``[lo, hi]`` and renormalised."""

    name = "TruncatedGauss"
    discrete = False

    def __init__(self, mean, var, lo, hi):
        super().__init__(mean, var, lo, hi)

    def check(self):
        _, var, lo, hi = self.params
        if not np.all(_f(var) > 0):
            raise InvalidParametersError("TruncatedGauss variance must be > 0")
        if not np.all(_f(lo) < _f(hi)):
            raise InvalidParametersError("TruncatedGauss bounds inverted (need lo < hi)")

    def _standard(self):
        mean, var, lo, hi = (_f(p) for p in self.params)
        sd = np.sqrt(var)
        return mean, sd, (lo - mean) / sd, (hi - mean) / sd, lo, hi

    def _sample(self, rng, size):
        mean, sd, a, b, lo, hi = self._standard()
        u = rng.random(size)
        a, b = np.broadcast_arrays(a, b)
        flip = a > 0  # sample the mirrored problem so the mass sits in the lower tail
        aa = np.where(flip, -b, a)
        bb = np.where(flip, -a, b)
        pa, pb = special.ndtr(aa), special.ndtr(bb)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            z = special.ndtri(pa + u * (pb - pa))
            # far upper tail of the mirrored problem: exponential approximation
            rate = -bb
            width = bb - aa
            tail = bb + np.log1p(-u * -np.expm1(-rate * width)) / rate
        z = np.where((pb - pa) > 1e-300, z, tail)
        z = np.where(flip, -z, z)
        out = np.clip(mean + sd * z, lo, hi)
        return out if size is not None or out.ndim else float(out)

    def _evaluate(self, x, atol):
        mean, sd, a, b, lo, hi = self._standard()
        x = _f(x)
        z = (x - mean) / sd
        log_z = _log_ndtr_diff(a, b)
        with np.errstate(over="ignore"):
            dens = np.exp(-0.5 * z * z - _LOG_SQRT_2PI - np.log(sd) - log_z)
        dens = np.where((x >= lo) & (x <= hi), dens, 0.0)
        return np.zeros_like(dens, dtype=bool), dens

    def _cdf(self, x):
        mean, sd, a, b, lo, hi = self._standard()
        x = _f(x)
        z = np.clip((x - mean) / sd, a, b)
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = np.exp(_log_ndtr_diff(a, z) - _log_ndtr_diff(a, b))
        inner = np.where(z <= a, 0.0, inner)
        return np.clip(np.where(x >= hi, 1.0, np.where(x < lo, 0.0, inner)), 0.0, 1.0)


class Unif(Dist):
    name = "Unif"
    discrete = False

    def __init__(self, lo, hi):
        super().__init__(lo, hi)

    def check(self):
        if not np.all(_f(self.params[0]) < _f(self.params[1])):
            raise InvalidParametersError("Unif bounds inverted (need lo < hi)")

    def _sample(self, rng, size):
        return rng.uniform(self.params[0], self.params[1], size)

    def _evaluate(self, x, atol):
        lo, hi = _f(self.params[0]), _f(self.params[1])
        x = _f(x)
        dens = np.where((x >= lo) & (x <= hi), 1.0 / (hi - lo), 0.0)
        return np.zeros_like(dens, dtype=bool), dens

    def _cdf(self, x):
        lo, hi = _f(self.params[0]), _f(self.params[1])
        return np.clip((_f(x) - lo) / (hi - lo), 0.0, 1.0)


class Poisson(Dist):
    name = "Poisson"

    def __init__(self, rate):
        super().__init__(rate)

    def check(self):
        if not np.all(_f(self.params[0]) >= 0):
            raise InvalidParametersError("Poisson rate must be >= 0")

    def _sample(self, rng, size):
        return rng.poisson(self.params[0], size)

    def _log_pmf(self, k, lam):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = k * np.log(lam) - lam - special.gammaln(k + 1)
        # 0 * log(0) is 0
        return np.where((lam == 0), np.where(k == 0, 0.0, -np.inf), out)

    def _evaluate(self, x, atol):
        lam = _f(self.params[0])
        x = _f(x)
        k = np.round(x) if atol > 0 else x
        ok = (np.abs(x - k) <= atol) & (k >= 0) & np.isfinite(x) & (k == np.floor(k))
        kk = np.where(ok, k, 0.0)
        pmf = np.where(ok, np.exp(self._log_pmf(kk, lam)), 0.0)
        return np.ones_like(pmf, dtype=bool), pmf

    def _cdf(self, x):
        lam = _f(self.params[0])
        kmax = np.floor(_f(x))
        top = int(min(np.max(kmax, initial=0), POISSON_CDF_CAP))
        total = np.zeros(np.broadcast(lam, kmax).shape)
        for j in range(top + 1):
            total = total + np.where(kmax >= j, np.exp(self._log_pmf(float(j), lam)), 0.0)
        return np.clip(total, 0.0, 1.0)


class BooleanDistrib(Dist):
    name = "BooleanDistrib"
    real_valued = False

    def __init__(self, p):
        super().__init__(p)

    def check(self):
        p = _f(self.params[0])
        if not np.all((p >= 0) & (p <= 1)):
            raise InvalidParametersError("BooleanDistrib probability outside [0, 1]")

    def _sample(self, rng, size):
        out = rng.random(size) < self.params[0]
        return out if isinstance(out, np.ndarray) and out.ndim else bool(out)

    def _evaluate(self, x, atol):
        p = _f(self.params[0])
        mass = np.where(np.asarray(x, dtype=bool), p, 1.0 - p)
        return np.ones_like(mass, dtype=bool), mass

    def support(self):
        p = float(self.params[0])
        return [(True, p), (False, 1.0 - p)]


class Dirac(Dist):
    """Point mass at ``loc`` (``None`` stands for null)."""

    name = "Dirac"

    def __init__(self, loc):
        super().__init__(loc)

    @property
    def real_valued(self):
        loc = np.asarray(self.params[0])
        return loc.dtype != object and loc.dtype != bool

    def _sample(self, rng, size):
        loc = self.params[0]
        if size is None:
            return loc
        arr = np.asarray(loc)
        if arr.ndim:
            return arr
        if loc is None or not isinstance(loc, (bool, int, float, np.generic)):
            out = np.empty(size, dtype=object)
            out[...] = [loc] * int(np.prod(size))
            return out
        return np.full(size, loc)

    def _evaluate(self, x, atol):
        hit = _matches(x, self.params[0], atol)
        return np.ones_like(hit, dtype=bool), np.asarray(hit, dtype=float)

    def _cdf(self, x):
        loc = self.params[0]
        if loc is None:
            return np.zeros_like(_f(x))
        return np.asarray(_f(x) >= _f(loc), dtype=float)

    def support(self):
        return [(self.params[0], 1.0)]


class Categorical(Dist):
    """Finite distribution over ``values`` with probabilities ``probs``."""

    name = "Categorical"

    def __init__(self, values, probs):
        super().__init__(tuple(values), tuple(probs))

    def restrict(self, idx):
        return Categorical([_restrict_param(v, idx) for v in self.params[0]],
                           [_restrict_param(p, idx) for p in self.params[1]])

    @property
    def real_valued(self):
        return all(_is_numeric(v) or (isinstance(v, np.ndarray) and v.dtype.kind in "iuf")
                   for v in self.params[0])

    def check(self):
        probs = self.params[1]
        if not probs:
            raise InvalidParametersError("Categorical needs at least one outcome")
        total = sum(_f(p) for p in probs)
        if not all(np.all(_f(p) >= 0) for p in probs):
            raise InvalidParametersError("Categorical probabilities must be >= 0")
        if not np.all(np.abs(total - 1.0) <= MIX_TOL):
            raise InvalidParametersError("Categorical probabilities must sum to 1")

    def _sample(self, rng, size):
        values, probs = self.params
        u = rng.random(size)
        idx = np.zeros(np.shape(u), dtype=int)
        acc = 0.0
        for p in probs[:-1]:
            acc = acc + _f(p)
            idx = idx + (u >= acc)
        if size is None and all(np.ndim(v) == 0 for v in values):
            return values[int(idx)]
        stacked = _stack_values(values, np.shape(u))
        return np.take_along_axis(stacked, idx[..., None], axis=-1)[..., 0]

    def _evaluate(self, x, atol):
        values, probs = self.params
        mass = 0.0
        for v, p in zip(values, probs):
            mass = mass + np.where(_matches(x, v, atol), _f(p), 0.0)
        mass = np.asarray(mass, dtype=float)
        return np.ones_like(mass, dtype=bool), mass

    def _cdf(self, x):
        values, probs = self.params
        total = 0.0
        for v, p in zip(values, probs):
            total = total + np.where(_f(v) <= _f(x), _f(p), 0.0)
        return np.asarray(total, dtype=float)

    def support(self):
        merged = {}
        for v, p in zip(*self.params):
            merged[v] = merged.get(v, 0.0) + float(p)
        return list(merged.items())


def _stack_values(values, shape):
    arrays = [np.broadcast_to(np.asarray(v, dtype=object if not _numeric_like(v) else None), shape)
              for v in values]
    dtype = np.result_type(*arrays) if all(a.dtype != object for a in arrays) else object
    out = np.empty(tuple(shape) + (len(values),), dtype=dtype)
    for j, a in enumerate(arrays):
        out[..., j] = a
    return out


def _numeric_like(v):
    if isinstance(v, np.ndarray):
        return v.dtype != object
    return isinstance(v, (bool, int, float, np.generic))


class _UniformSet(Categorical):
    name = "UniformChoice"

    def check(self):
        pass

    def _sample(self, rng, size):
        values = self.params[0]
        idx = rng.integers(len(values), size=size)
        if size is None:
            return values[int(idx)]
        out = np.empty(np.shape(idx), dtype=object)
        out[...] = [values[i] for i in np.ravel(idx)]
        return out

    def restrict(self, idx):
        return self


def UniformChoice(objects):
    """Uniform draw from a finite set; the empty set yields null."""
    objects = list(objects)
    if not objects:
        return Dirac(None)
    p = 1.0 / len(objects)
    return _UniformSet(objects, [p] * len(objects))


class Mixture(Dist):
    """Weighted mixture of kernels; plain values become :class:`Dirac` atoms."""

    name = "Mix"

    def __init__(self, components):
        comps = []
        for comp, w in components:
            comps.append((comp if isinstance(comp, Dist) else Dirac(comp), w))
        super().__init__(tuple(comps))

    @property
    def components(self):
        return self.params[0]

    @property
    def discrete(self):
        return all(c.discrete for c, _ in self.components)

    @property
    def real_valued(self):
        return all(c.real_valued for c, _ in self.components)

    def restrict(self, idx):
        return Mixture([(c.restrict(idx), _restrict_param(w, idx)) for c, w in self.components])

    def check(self):
        comps = self.components
        if not comps:
            raise InvalidParametersError("Mix needs at least one component")
        total = sum(_f(w) for _, w in comps)
        if not all(np.all(_f(w) >= 0) for _, w in comps):
            raise InvalidParametersError("Mix weights must be >= 0")
        if not np.all(np.abs(total - 1.0) <= MIX_TOL):
            raise InvalidParametersError(f"Mix weights sum to {np.max(total)!r}, not 1")
        atoms = [c.params[0] for c, _ in comps if isinstance(c, Dirac)]
        for i in range(len(atoms)):
            for j in range(i + 1, len(atoms)):
                if np.any(_matches(atoms[i], atoms[j])):
                    raise InvalidParametersError("Mix atom locations must be distinct")

    def _pick(self, rng, size):
        u = rng.random(size)
        idx = np.zeros(np.shape(u), dtype=int)
        acc = 0.0
        for _, w in self.components[:-1]:
            acc = acc + _f(w)
            idx = idx + (u >= acc)
        return idx

    def _sample(self, rng, size):
        idx = self._pick(rng, size)
        if size is None and np.ndim(idx) == 0:
            return self.components[int(idx)][0].sample(rng)
        n = idx.shape[0]
        parts = []
        for j, (comp, _) in enumerate(self.components):
            lanes = np.flatnonzero(idx == j)
            if lanes.size:
                parts.append((lanes, np.asarray(comp.restrict(lanes).sample(rng, lanes.size))))
        return _assemble(n, parts)

    def _evaluate(self, x, atol):
        mass = 0.0
        dens = 0.0
        for comp, w in self.components:
            is_mass, val = comp.evaluate(x, atol)
            mass = mass + np.where(is_mass, _f(w) * val, 0.0)
            dens = dens + np.where(is_mass, 0.0, _f(w) * val)
        mass, dens = np.broadcast_arrays(_f(mass), _f(dens))
        is_mass = (mass > 0) | (not self.continuous)
        return np.asarray(is_mass), np.where(is_mass, mass, dens)

    def _cdf(self, x):
        total = 0.0
        for comp, w in self.components:
            total = total + _f(w) * comp.cdf(x)
        return np.asarray(total, dtype=float)

    def support(self):
        merged = {}
        for comp, w in self.components:
            for v, p in comp.support():
                merged[v] = merged.get(v, 0.0) + float(w) * p
        return list(merged.items())

    def __repr__(self):
        inner = ", ".join(f"{c!r} -> {w!r}" for c, w in self.components)
        return "Mix({" + inner + "})"


def _assemble(n, parts):
    """Scatter per-lane sub-results back into one length-``n`` array."""
    if not parts:
        return np.empty(0)
    if all(p.dtype != object for _, p in parts):
        dtype = np.result_type(*(p.dtype for _, p in parts))
    else:
        dtype = object
    out = np.empty(n, dtype=dtype)
    for lanes, vals in parts:
        out[lanes] = vals
    return out


class Piecewise(Dist):
    """Lane-wise selection between two kernels by a boolean array."""

    name = "Piecewise"

    def __init__(self, cond, then, orelse):
        super().__init__(np.asarray(cond, dtype=bool), then, orelse)

    @property
    def discrete(self):
        return self.params[1].discrete and self.params[2].discrete

    @property
    def real_valued(self):
        return self.params[1].real_valued and self.params[2].real_valued

    def restrict(self, idx):
        cond, a, b = self.params
        return Piecewise(cond[idx], a.restrict(idx), b.restrict(idx))

    def _split(self):
        cond, a, b = self.params
        yes = np.flatnonzero(cond)
        no = np.flatnonzero(~cond)
        return [(yes, a.restrict(yes)), (no, b.restrict(no))]

    def _sample(self, rng, size):
        n = self.params[0].shape[0]
        parts = []
        for lanes, d in self._split():
            if lanes.size:
                parts.append((lanes, np.asarray(d.sample(rng, lanes.size))))
        return _assemble(n, parts)

    def _lanes(self, fn, x):
        n = self.params[0].shape[0]
        x = np.asarray(x)
        outs = []
        for lanes, d in self._split():
            if lanes.size:
                xs = x[lanes] if x.ndim else x
                outs.append((lanes, fn(d, xs)))
        return n, outs

    def _evaluate(self, x, atol):
        n, outs = self._lanes(lambda d, xs: d.evaluate(xs, atol), x)
        is_mass = np.zeros(n, dtype=bool)
        value = np.zeros(n)
        for lanes, (m, v) in outs:
            is_mass[lanes] = m
            value[lanes] = v
        return is_mass, value

    def _cdf(self, x):
        n, outs = self._lanes(lambda d, xs: d.cdf(xs), x)
        value = np.zeros(n)
        for lanes, v in outs:
            value[lanes] = v
        return value


@dataclass(frozen=True)
class KernelSpec:
    name: str
    aliases: tuple
    param_types: tuple  # "Real" or a structural marker: "Map", "Set", "Any"
    result: str  # a type name, or "elem" for the element type of the argument
    factory: object
    real_valued: bool


_CATALOG = (
    KernelSpec("Gaussian", (), ("Real", "Real"), "Real", Gaussian, True),
    KernelSpec("TruncatedGauss", ("TruncatedGaussian",), ("Real",) * 4, "Real", TruncatedGauss, True),
    KernelSpec("Poisson", (), ("Real",), "Integer", Poisson, True),
    KernelSpec("BooleanDistrib", ("Bernoulli",), ("Real",), "Bool", BooleanDistrib, False),
    KernelSpec("Unif", ("UniformReal",), ("Real", "Real"), "Real", Unif, True),
    KernelSpec("UniformChoice", (), ("Set",), "elem", UniformChoice, False),
    KernelSpec("Categorical", (), ("Map",), "elem", None, False),
    KernelSpec("Dirac", ("PointMass",), ("Any",), "elem", Dirac, False),
    KernelSpec("Mix", ("mixed",), ("Map",), "elem", None, True),
)

_BY_NAME = {}
for _spec in _CATALOG:
    _BY_NAME[_spec.name] = _spec
    for _alias in _spec.aliases:
        _BY_NAME[_alias] = _spec


def builtin_catalog():
    """The kernels callable from model files (aliases listed per entry)."""
    return list(_CATALOG)


def lookup(name):
    return _BY_NAME.get(name)


def make_kernel(kernel, *params):
    """Build a kernel from a catalog name (or alias) or a :class:`Dist` subclass."""
    if isinstance(kernel, Dist):
        if params:
            raise TypeError("a constructed kernel takes no parameters")
        return kernel
    if isinstance(kernel, str):
        spec = lookup(kernel)
        if spec is None:
            raise KeyError(f"unknown kernel {kernel!r}")
        name = spec.name
        if name == "Mix":
            (components,) = params
            return Mixture(components)
        if name == "Categorical":
            (table,) = params
            items = list(table.items()) if isinstance(table, dict) else list(table)
            return Categorical([v for v, _ in items], [p for _, p in items])
        return spec.factory(*params)
    return kernel(*params)


def _params_tuple(params):
    if params is None:
        return ()
    return params if isinstance(params, tuple) else (params,)


def sample_kernel(kernel, params, rng):
    """Draw one value from ``kernel`` with ``params``."""
    value = make_kernel(kernel, *_params_tuple(params)).sample(rng)
    return value.item() if isinstance(value, np.generic) else value


def evaluate_at(kernel, params, value, atol=0.0):
    """Mass-or-density of ``value`` as a :class:`LikelihoodTerm`."""
    is_mass, v = make_kernel(kernel, *_params_tuple(params)).evaluate(value, atol)
    return LikelihoodTerm("mass" if bool(is_mass) else "density", float(v))


def cdf_at(kernel, params, x):
    return float(make_kernel(kernel, *_params_tuple(params)).cdf(x))
