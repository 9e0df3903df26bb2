"""Lazily instantiated possible worlds."""
from __future__ import annotations

import itertools

import numpy as np

from .. import dist as D
from ..dsl import ast as A
from ..errors import EvaluationError, ObjectCapError, WellFoundednessError
from .evaluator import Evaluator, values_equal
from .values import BasicRV, ObjectRef, Timestep, format_value

DEFAULT_OBJECT_CAP = 10_000


def coerce(value, type_name):
    """Normalise a sampled value to the Python type of ``type_name``."""
    if isinstance(value, np.ndarray) and value.ndim == 0:
        value = value.item()
    if isinstance(value, np.generic):
        value = value.item()
    if value is None:
        return None
    if type_name == "Real":
        return float(value)
    if type_name == "Integer":
        return int(value)
    if type_name == "Bool":
        return bool(value)
    return value


class World(Evaluator):
    """A finite partial world grown by lazy recursive instantiation.

    ``assignment`` holds random function applications and number variables in
    ``order``; ``derived`` holds the fixed and origin function applications
    that were read along the way. Observed variables are clamped to their
    evidence value and their kernel is kept in ``kernels`` so engines can
    score it.
    """

    def __init__(self, model, rng=None, *, object_cap=DEFAULT_OBJECT_CAP, atom_tol=0.0, draw=None):
        self.model = model
        self.rng = rng
        self.object_cap = object_cap
        self.atom_tol = atom_tol
        self.draw = draw
        self.assignment = {}
        self.order = []
        self.derived = {}
        self.parents = {}
        self.observed = {}
        self.kernels = {}
        self.terms = {}
        self._stack = []
        self._pending = set()
        self._objects = {}
        self._enumerating = set()

    # -- storage hooks ---------------------------------------------------
    def record(self, brv, value):
        self.derived[brv] = value

    def _note_parent(self, brv):
        if self._stack:
            self.parents[self._stack[-1]].add(brv)

    def lookup(self, brv):
        if brv in self.assignment:
            self._note_parent(brv)
            return self.assignment[brv]
        if brv in self._pending:
            chain = self._stack[self._stack.index(brv):] + [brv]
            raise WellFoundednessError("dependency cycle while sampling: "
                                       + " -> ".join(str(b) for b in chain))
        self._pending.add(brv)
        self._stack.append(brv)
        self.parents[brv] = set()
        try:
            for a in brv.args:
                if isinstance(a, ObjectRef) and a.generated:
                    stmt, oargs, _ = a.origin
                    self.parents[brv].add(BasicRV("number", stmt, oargs))
            kernel = self.kernel_for(brv)
            vtype = self.value_type(brv)
            if brv in self.observed:
                value = self.observed[brv]
                self.kernels[brv] = kernel
                is_mass, v = kernel.evaluate(value, self.atom_tol)
                self.terms[brv] = D.LikelihoodTerm("mass" if bool(is_mass) else "density", float(v))
            elif self.draw is not None:
                value = coerce(self.draw(brv, kernel), vtype)
            else:
                value = coerce(kernel.sample(self.rng), vtype)
            if brv.kind == "number":
                if value is None or value < 0:
                    raise EvaluationError(f"{brv} must be a nonnegative count, got {value!r}")
                if value > self.object_cap:
                    raise ObjectCapError(f"{brv} = {value} exceeds the object cap {self.object_cap}")
        finally:
            self._stack.pop()
            self._pending.discard(brv)
        self.assignment[brv] = value
        self.order.append(brv)
        self._note_parent(brv)
        return value

    def objects(self, type_name):
        """All objects of ``type_name`` valid in this world, in a fixed order."""
        if type_name in self._objects:
            for n in self.model.numbers_by_type.get(type_name, ()):
                for combo in self._origin_tuples(n):
                    self._note_parent(BasicRV("number", n.id, combo))
            return list(self._objects[type_name])
        if type_name in ("Integer", "Real"):
            raise EvaluationError(f"cannot enumerate the objects of {type_name}")
        if type_name == "Bool":
            return [False, True]
        if type_name in self._enumerating:
            raise WellFoundednessError(f"the number of {type_name} objects depends on itself")
        self._enumerating.add(type_name)
        try:
            out = list(self.model.constants_by_type.get(type_name, ()))
            for n in self.model.numbers_by_type.get(type_name, ()):
                for combo in self._origin_tuples(n):
                    count = self.lookup(BasicRV("number", n.id, combo))
                    out.extend(ObjectRef(type_name, origin=(n.id, combo, i)) for i in range(1, count + 1))
        finally:
            self._enumerating.discard(type_name)
        self._objects[type_name] = out
        return list(out)

    def _origin_tuples(self, n):
        return list(itertools.product(*(self.objects(t) for t in n.var_types)))

    # -- evidence ----------------------------------------------------------
    def observe(self, evidence):
        """Clamp the evidence variables; deterministic arguments are bound first."""
        static_first = sorted(evidence, key=lambda ev: not _literal_args(ev))
        self.evidence_rv = {}
        for ev in static_first:
            args = tuple(self.eval(a, {}) for a in ev.args)
            if any(a is None for a in args):
                self.evidence_rv[ev] = None
                continue
            brv = BasicRV("function", ev.fn, args)
            if brv in self.assignment:
                raise EvaluationError(f"{ev.label} was sampled before it could be observed")
            if brv in self.observed:
                raise EvaluationError(f"{ev.label} names the same variable as another observation")
            self.observed[brv] = ev.value
            self.evidence_rv[ev] = brv

    def evidence_term(self, ev):
        """Instantiate one evidence variable; returns (BasicRV or None, LikelihoodTerm)."""
        brv = self.evidence_rv.get(ev)
        if brv is None:
            # the observed function was applied to null: its value is null, never the observation
            return None, D.Mass(0.0)
        self.lookup(brv)
        return brv, self.terms[brv]

    def evidence_kernel(self, ev):
        brv = self.evidence_rv.get(ev)
        return D.Dirac(None) if brv is None else self.kernels[brv]

    # -- misc ----------------------------------------------------------------
    def copy(self):
        w = World.__new__(World)
        w.__dict__.update(self.__dict__)
        for name in ("assignment", "derived", "observed", "kernels", "terms", "_objects"):
            setattr(w, name, dict(getattr(self, name)))
        w.parents = {k: set(v) for k, v in self.parents.items()}
        w.order = list(self.order)
        w._stack, w._pending, w._enumerating = [], set(), set()
        if hasattr(self, "evidence_rv"):
            w.evidence_rv = dict(self.evidence_rv)
        return w

    def dump(self):
        """One ``BasicRV = value`` line per assignment, in instantiation order."""
        return "\n".join(f"{brv} = {format_value(self.assignment[brv])}" for brv in self.order)

    def __repr__(self):
        return f"World({len(self.order)} variables)"


def _literal_args(ev):
    return all(isinstance(a, (A.IntLit, A.RealLit, A.BoolLit, A.TimestepLit, A.Name)) for a in ev.args)


def query_targets(model, horizon=None):
    """(label, expression, bindings) for every query, with timestep queries unrolled."""
    return [(model.query_label(q, env), q, env) for q, env in model.expanded_queries(horizon)]


def sample_world(model, rng, targets=None, *, object_cap=DEFAULT_OBJECT_CAP, atom_tol=0.0, observe=True):
    """Sample a world holding every ancestor of ``targets``.

    ``targets`` may contain BasicRVs, expressions, or model source strings for
    expressions; by default it is the model's evidence plus its queries. With
    ``observe`` the evidence variables are clamped to their observed values.
    """
    from ..dsl.parser import parse_expr

    w = World(model, rng, object_cap=object_cap, atom_tol=atom_tol)
    w.observe(model.evidence if observe else ())
    if targets is None:
        for ev in model.evidence:
            if observe:
                w.evidence_term(ev)
            else:
                w.eval(ev.target, {})
        for _, q, env in query_targets(model):
            w.eval(q.expr, env)
        return w
    for t in targets:
        if isinstance(t, BasicRV):
            w.lookup(t)
        else:
            w.eval(parse_expr(t) if isinstance(t, str) else t, {})
    return w


def eval_expr(world, expr, bindings=None):
    """Evaluate an expression (or its source text) in ``world``."""
    from ..dsl.parser import parse_expr

    if isinstance(expr, str):
        expr = parse_expr(expr)
    return world.eval(expr, dict(bindings or {}))


def uniform_choice(world, rng, set_expr):
    """Uniform draw from the objects a set expression denotes; null if empty."""
    items = eval_expr(world, set_expr)
    return coerce(D.UniformChoice(items).sample(rng), None)


def check_consistency(world):
    """True iff the world satisfies the three consistency clauses."""
    model = world.model
    entries = list(world.assignment.items()) + list(world.derived.items())

    # generated objects must exist: their number variable is at least their index
    mentioned = set()
    for brv, value in entries:
        for v in brv.args + (value,):
            _collect_objects(v, mentioned)
    for obj in mentioned:
        stmt, oargs, i = obj.origin
        count = world.assignment.get(BasicRV("number", stmt, oargs))
        if count is None or count < i:
            return False

    # fixed functions take their declared interpretation; origin functions invert generation
    scratch = World(model)
    for brv, value in world.derived.items():
        f = model.functions.get(brv.decl)
        if f is None:
            return False
        try:
            if f.kind == "fixed":
                expected = scratch.apply(f, brv.args)
            elif f.kind == "origin":
                (obj,) = brv.args
                expected = None
                if isinstance(obj, ObjectRef) and obj.generated:
                    decl = model.number_decl(obj.origin[0])
                    if f.name in decl.origin_fns:
                        expected = obj.origin[1][decl.origin_fns.index(f.name)]
            else:
                return False
        except EvaluationError:
            return False
        if not values_equal(expected, value):
            return False
    for brv in world.assignment:
        if brv.kind == "function":
            f = model.functions.get(brv.decl)
            if f is None or f.kind != "random":
                return False
    return True


def _collect_objects(v, out):
    if isinstance(v, ObjectRef) and v.generated:
        out.add(v)
        for a in v.origin[1]:
            _collect_objects(a, out)


def topological_ok(world):
    """Every realised parent precedes its child in the instantiation order."""
    pos = {brv: i for i, brv in enumerate(world.order)}
    return all(pos[p] < pos[c] for c, ps in world.parents.items() if c in pos for p in ps if p in pos)


__all__ = ["World", "sample_world", "eval_expr", "uniform_choice", "check_consistency",
           "topological_ok", "query_targets", "coerce", "DEFAULT_OBJECT_CAP", "Timestep"]
