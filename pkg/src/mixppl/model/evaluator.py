"""Expression evaluation shared by single worlds and vectorised batches.

A subclass supplies variable storage by implementing ``lookup`` (instantiate a
basic random variable on demand), ``objects`` (enumerate the currently valid
objects of a type) and, optionally, ``record`` (remember fixed/origin function
values). Values are Python scalars in a single world; in a batch, any value
that depends on random variables is a numpy array with one lane per sample.
"""
from __future__ import annotations

import math

import numpy as np

from .. import dist as D
from ..dsl import ast as A
from ..errors import EvaluationError
from .values import BasicRV, ObjectRef, Timestep


def _is_array(v):
    return isinstance(v, np.ndarray)


def values_equal(a, b):
    """Equality with null semantics: null equals only null."""
    if _is_array(a) or _is_array(b):
        if (_is_array(a) and a.dtype == object) or (_is_array(b) and b.dtype == object) \
                or a is None or b is None:
            return np.asarray(np.equal(np.asarray(a, dtype=object), np.asarray(b, dtype=object)),
                              dtype=bool)
        return np.asarray(a == b)
    if a is None or b is None:
        return a is None and b is None
    return a == b


def _index(v):
    if isinstance(v, Timestep):
        return v.index
    return v


def substitute(expr, env):
    """Replace bound variables with literal nodes (used to label queries)."""
    if isinstance(expr, A.Name) and expr.id in env:
        v = env[expr.id]
        if isinstance(v, Timestep):
            return A.TimestepLit(v.index)
        if isinstance(v, ObjectRef) and v.name is not None:
            return A.Name(v.name)
        if isinstance(v, bool):
            return A.BoolLit(v)
        if isinstance(v, int):
            return A.IntLit(v)
        if isinstance(v, float):
            return A.RealLit(v)
        return expr
    if isinstance(expr, A.Call):
        return A.Call(expr.fn, tuple(substitute(a, env) for a in expr.args))
    if isinstance(expr, A.If):
        return A.If(substitute(expr.cond, env), substitute(expr.then, env), substitute(expr.orelse, env))
    if isinstance(expr, A.BinOp):
        return A.BinOp(expr.op, substitute(expr.left, env), substitute(expr.right, env))
    if isinstance(expr, A.UnaryOp):
        return A.UnaryOp(expr.op, substitute(expr.operand, env))
    return expr


class Evaluator:
    batch = False

    # subclasses: model, lookup(brv), objects(type_name)
    def record(self, brv, value):
        pass

    def eval(self, e, env):
        """Evaluate ``e`` with variable bindings ``env``; may return a kernel."""
        if isinstance(e, (A.IntLit, A.RealLit, A.BoolLit)):
            return e.value
        if isinstance(e, A.NullLit):
            return None
        if isinstance(e, A.TimestepLit):
            return Timestep(e.index)
        if isinstance(e, A.Name):
            if e.id in env:
                return env[e.id]
            obj = self.model.constants.get(e.id)
            if obj is not None:
                return obj
            f = self.model.functions.get(e.id)
            if f is None:
                raise EvaluationError(f"unbound identifier {e.id!r}")
            return self.apply(f, ())
        if isinstance(e, A.Call):
            return self.eval_call(e, env)
        if isinstance(e, A.If):
            return self.eval_if(e, env)
        if isinstance(e, A.BinOp):
            return self.eval_binop(e, env)
        if isinstance(e, A.UnaryOp):
            v = self.eval(e.operand, env)
            if e.op == "!":
                return np.logical_not(v) if _is_array(v) else (None if v is None else not v)
            return None if v is None else -v
        if isinstance(e, A.SetComp):
            return self.eval_setcomp(e, env)
        if isinstance(e, A.SetLit):
            return _dedupe(self.eval(x, env) for x in e.items)
        raise EvaluationError(f"cannot evaluate {e!r}")

    def eval_if(self, e, env):
        c = self.eval(e.cond, env)
        if not _is_array(c):
            return self.eval(e.then if c else e.orelse, env)
        a = self.eval(e.then, env)
        b = self.eval(e.orelse, env)
        if isinstance(a, D.Dist) or isinstance(b, D.Dist):
            return D.Piecewise(c, _as_dist(a), _as_dist(b))
        if any(x is None or (_is_array(x) and x.dtype == object) or isinstance(x, (ObjectRef, Timestep))
               for x in (a, b)):
            out = np.empty(c.shape, dtype=object)
            out[:] = list(np.broadcast_to(np.asarray(a, dtype=object), c.shape))
            other = np.broadcast_to(np.asarray(b, dtype=object), c.shape)
            out[~c] = other[~c]
            return out
        return np.where(c, a, b)

    def eval_binop(self, e, env):
        op = e.op
        if op in ("&&", "||"):
            a = self.eval(e.left, env)
            if not _is_array(a):
                if op == "&&" and not a:
                    return False
                if op == "||" and a:
                    return True
                b = self.eval(e.right, env)
                return b if _is_array(b) else bool(b)
            b = self.eval(e.right, env)
            return np.logical_and(a, b) if op == "&&" else np.logical_or(a, b)
        a = self.eval(e.left, env)
        b = self.eval(e.right, env)
        if op == "==":
            return values_equal(a, b)
        if op == "!=":
            eq = values_equal(a, b)
            return np.logical_not(eq) if _is_array(eq) else not eq
        if a is None or b is None:
            return False if op in ("<", "<=", ">", ">=") else None
        a, b = _index(a), _index(b)
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if np.any(np.asarray(b) == 0):
                raise EvaluationError(f"division by zero in {e!r}")
            return np.true_divide(a, b) if (_is_array(a) or _is_array(b)) else a / b
        raise EvaluationError(f"unknown operator {op}")

    def eval_setcomp(self, e, env):
        if e.cond is None and isinstance(e.elem, A.Name) and e.elem.id == e.var:
            return self.objects(e.type)
        out = []
        for obj in self.objects(e.type):
            inner = dict(env)
            inner[e.var] = obj
            if e.cond is not None:
                keep = self.eval(e.cond, inner)
                if _is_array(keep):
                    raise EvaluationError("set filters over random values need the per-world sampler")
                if not keep:
                    continue
            out.append(self.eval(e.elem, inner))
        return _dedupe(out)

    def eval_call(self, e, env):
        fn = e.fn
        model = self.model
        if fn == "prev" and fn not in model.functions:
            t = self.eval(e.args[0], env)
            if t is None:
                return None
            if t.index <= 0:
                raise EvaluationError("prev(@0) has no predecessor")
            return Timestep(t.index - 1)
        if fn == "dist" and fn not in model.functions:
            x, y, r = (self.eval(a, env) for a in e.args)
            px = self.apply(model.functions["pos_x"], (r,))
            py = self.apply(model.functions["pos_y"], (r,))
            if any(v is None for v in (x, y, px, py)):
                return None
            if _is_array(x) or _is_array(y) or _is_array(px):
                return np.hypot(np.asarray(x, float) - px, np.asarray(y, float) - py)
            return math.hypot(x - px, y - py)
        spec = D.lookup(fn)
        if spec is not None:
            return self.eval_kernel(spec, e, env)
        f = model.functions.get(fn)
        if f is None:
            raise EvaluationError(f"unknown function {fn!r}")
        return self.apply(f, tuple(self.eval(a, env) for a in e.args))

    def eval_kernel(self, spec, e, env):
        name = spec.name
        if name in ("Mix", "Categorical"):
            items = [(self.eval(k, env), self.eval(w, env)) for k, w in e.args[0].items]
            if name == "Mix":
                return D.Mixture(items)
            return D.Categorical([k for k, _ in items], [w for _, w in items])
        if name == "UniformChoice":
            return D.UniformChoice(self.eval(e.args[0], env))
        if name == "Dirac":
            return D.Dirac(self.eval(e.args[0], env))
        params = [self.eval(a, env) for a in e.args]
        if any(p is None for p in params):
            return D.Dirac(None)
        return spec.factory(*params)

    def apply(self, f, args):
        if any(a is None for a in args):
            return None
        if f.kind == "random":
            if any(_is_array(a) for a in args):
                raise EvaluationError(f"{f.name} applied to random arguments in a vectorised batch")
            return self.lookup(BasicRV("function", f.name, tuple(args)))
        if f.kind == "origin":
            (obj,) = args
            if _is_array(obj):
                return _map_objects(obj, lambda o: _origin_of(self.model, f.name, o))
            value = _origin_of(self.model, f.name, obj)
            self.record(BasicRV("function", f.name, (obj,)), value)
            return value
        # fixed
        if f.table is not None:
            (obj,) = args
            if _is_array(obj):
                return _map_objects(obj, lambda o: _table_get(f, o), numeric=f.ret_type in ("Real", "Integer"))
            value = _table_get(f, obj)
        else:
            value = self.eval(f.body, dict(zip(f.param_names, args)))
            if f.ret_type == "Real" and not _is_array(value) and value is not None:
                value = float(value)
        if not any(_is_array(a) for a in args):
            self.record(BasicRV("function", f.name, tuple(args)), value)
        return value

    def kernel_for(self, brv):
        """The conditional distribution of ``brv`` given the current world."""
        if brv.kind == "number":
            decl = self.model.number_decl(brv.decl)
            env = dict(zip(decl.vars, brv.args))
            body = decl.body
        else:
            decl = self.model.functions[brv.decl]
            env = dict(zip(decl.param_names, brv.args))
            body = decl.body
        k = self.eval(body, env)
        return k if isinstance(k, D.Dist) else D.Dirac(k)

    def value_type(self, brv):
        if brv.kind == "number":
            return "Integer"
        return self.model.functions[brv.decl].ret_type


def _as_dist(v):
    return v if isinstance(v, D.Dist) else D.Dirac(v)


def _dedupe(items):
    return list(dict.fromkeys(items))


def _table_get(f, obj):
    try:
        return f.table[obj]
    except KeyError:
        raise EvaluationError(f"fixed function {f.name} has no entry for {obj}") from None


def _origin_of(model, fn, obj):
    if not isinstance(obj, ObjectRef) or not obj.generated:
        return None
    stmt_id, args, _ = obj.origin
    decl = model.number_decl(stmt_id)
    if fn not in decl.origin_fns:
        return None
    return args[decl.origin_fns.index(fn)]


def _map_objects(arr, fn, numeric=False):
    cache = {}
    out = []
    for o in arr:
        if o not in cache:
            cache[o] = fn(o)
        out.append(cache[o])
    if numeric:
        return np.asarray(out, dtype=float)
    res = np.empty(len(out), dtype=object)
    res[:] = out
    return res
