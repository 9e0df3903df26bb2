"""Name resolution and type checking: ModelAST -> Model."""
from __future__ import annotations

from .. import dist
from ..errors import (MixWeightError, OriginSignatureError, ResolveError,
                      StaticCycleError, TypeMismatchError, UnknownIdentifierError)
from ..model.model import (BUILTIN_TYPES, TYPE_ALIASES, Evidence, FunctionDecl, Model,
                           NumberDecl, Query)
from ..model.values import ObjectRef, Timestep
from . import ast as A
from .printer import format_expr

NUMERIC = ("Integer", "Real")
BUILTIN_FUNCTIONS = ("prev", "dist")


def _where(node):
    pos = getattr(node, "pos", None)
    return f" (line {pos[0]}, column {pos[1]})" if pos else ""


def _is_dist(t):
    return isinstance(t, tuple) and t[0] == "Dist"


def _is_set(t):
    return isinstance(t, tuple) and t[0] == "Set"


def _show(t):
    if isinstance(t, tuple):
        return f"{t[0]}[{_show(t[1])}]"
    return t


def assignable(src, dst):
    return src == dst or src == "Null" or (src == "Integer" and dst == "Real")


def unify(a, b, node=None):
    if a == b:
        return a
    if _is_dist(a) or _is_dist(b):
        ea = a[1] if _is_dist(a) else a
        eb = b[1] if _is_dist(b) else b
        return ("Dist", unify(ea, eb, node))
    if isinstance(a, tuple) or isinstance(b, tuple):
        raise TypeMismatchError(f"cannot combine {_show(a)} and {_show(b)}{_where(node)}")
    if a == "Null":
        return b
    if b == "Null":
        return a
    if {a, b} == {"Integer", "Real"}:
        return "Real"
    raise TypeMismatchError(f"cannot combine {a} and {b}{_where(node)}")


def const_number(e):
    """Fold literal arithmetic to a number, or None if not constant."""
    if isinstance(e, (A.IntLit, A.RealLit)):
        return e.value
    if isinstance(e, A.UnaryOp) and e.op == "-":
        v = const_number(e.operand)
        return None if v is None else -v
    if isinstance(e, A.BinOp) and e.op in "+-*/":
        a, b = const_number(e.left), const_number(e.right)
        if a is None or b is None:
            return None
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        return a / b if b != 0 else None
    return None


class _Resolver:
    def __init__(self, ast):
        self.ast = ast
        self.types = []
        self.constants = {}
        self.constants_by_type = {}
        self.functions = {}
        self.numbers = []

    # -- declarations --------------------------------------------------
    def norm_type(self, name, node=None):
        name = TYPE_ALIASES.get(name, name)
        if name not in BUILTIN_TYPES and name not in self.types:
            raise UnknownIdentifierError(f"unknown type {name!r}{_where(node)}")
        return name

    def declare_function(self, decl):
        name = decl.name
        if name in self.functions or name in self.constants:
            raise ResolveError(f"{name!r} is declared twice{_where(decl)}")
        if dist.lookup(name) or name in BUILTIN_FUNCTIONS:
            raise ResolveError(f"{name!r} shadows a builtin{_where(decl)}")
        self.functions[name] = decl

    def run(self):
        ast = self.ast
        for t in ast.type_decls:
            if t in BUILTIN_TYPES or t in self.types or t in TYPE_ALIASES:
                raise ResolveError(f"type {t!r} is declared twice or shadows a builtin")
            self.types.append(t)
        for d in ast.distinct_decls:
            t = self.norm_type(d.type, d)
            if t in BUILTIN_TYPES:
                raise TypeMismatchError(f"distinct constants need a declared type, not {t}{_where(d)}")
            for name in d.expanded():
                if name in self.constants:
                    raise ResolveError(f"constant {name!r} declared twice{_where(d)}")
                obj = ObjectRef(t, name=name)
                self.constants[name] = obj
                self.constants_by_type.setdefault(t, []).append(obj)
        for o in ast.origin_decls:
            ret = self.norm_type(o.ret_type, o)
            arg = self.norm_type(o.arg_type, o)
            self.declare_function(FunctionDecl(o.name, "origin", ret, (arg,), ("x",)))
        for f in ast.fixed_fns + ast.random_fns:
            ptypes = tuple(self.norm_type(t, f) for t, _ in f.params)
            pnames = tuple(n for _, n in f.params)
            if len(set(pnames)) != len(pnames):
                raise ResolveError(f"repeated parameter name in {f.name}{_where(f)}")
            self.declare_function(FunctionDecl(f.name, f.kind, self.norm_type(f.ret_type, f),
                                               ptypes, pnames, f.body))
        seen_ids = {}
        for n in ast.number_stmts:
            gen = self.norm_type(n.generated_type, n)
            if gen in BUILTIN_TYPES:
                raise TypeMismatchError(f"number statements generate declared types only{_where(n)}")
            fns, vars_, vtypes = [], [], []
            for g, v in n.origin_bindings:
                decl = self.functions.get(g)
                if decl is None or decl.kind != "origin":
                    raise OriginSignatureError(f"{g!r} is not an origin function{_where(n)}")
                if decl.param_types[0] != gen:
                    raise OriginSignatureError(
                        f"origin function {g} takes {decl.param_types[0]}, "
                        f"but #{gen} generates {gen}{_where(n)}")
                fns.append(g)
                vars_.append(v)
                vtypes.append(decl.ret_type)
            base = f"#{gen}" + (f"({','.join(fns)})" if fns else "")
            k = seen_ids.get(base, 0)
            seen_ids[base] = k + 1
            sid = base if k == 0 else f"{base}/{k}"
            self.numbers.append(NumberDecl(sid, gen, tuple(fns), tuple(vars_), tuple(vtypes), n.body))

        # -- bodies ----------------------------------------------------
        for name, f in list(self.functions.items()):
            if f.kind == "origin":
                continue
            env = dict(zip(f.param_names, f.param_types))
            if f.kind == "fixed" and isinstance(f.body, A.MapLit):
                self.functions[name] = self.fixed_table(f)
                continue
            t = self.typeof(f.body, env)
            if f.kind == "fixed" and _is_dist(t):
                raise TypeMismatchError(f"fixed function {name} cannot be random{_where(f.body)}")
            self.check_kernel_type(t, f.ret_type, name, f.body)
            check_prev_guards(f.body, {n: 0 for n, ty in env.items() if ty == "Timestep"})
        for n in self.numbers:
            env = dict(zip(n.vars, n.var_types))
            t = self.typeof(n.body, env)
            self.check_kernel_type(t, "Integer", n.id, n.body)
            check_prev_guards(n.body, {})

        evidence = tuple(self.evidence(o) for o in ast.obs_stmts)
        seen = set()
        for e in evidence:
            if e.label in seen:
                raise ResolveError(f"{e.label} is observed twice")
            seen.add(e.label)
        queries = tuple(self.query(q) for q in ast.query_stmts)
        edges = self.static_edges()
        self.check_static_cycles(edges)
        model = Model(
            ast=ast, types=tuple(self.types), constants=dict(self.constants),
            constants_by_type={k: list(v) for k, v in self.constants_by_type.items()},
            functions=dict(self.functions), number_stmts=tuple(self.numbers),
            evidence=evidence, queries=queries, edges=edges, batchable=False)
        model.batchable = is_batchable(model)
        return model

    def check_kernel_type(self, t, ret, name, node):
        elem = t[1] if _is_dist(t) else t
        if isinstance(elem, tuple) or not assignable(elem, ret):
            raise TypeMismatchError(f"{name} is declared {ret} but its body yields {_show(elem)}{_where(node)}")

    def fixed_table(self, f):
        if len(f.param_types) != 1:
            raise TypeMismatchError(f"table-defined fixed function {f.name} must take one argument{_where(f)}")
        table = {}
        for k, v in f.body.items:
            if not isinstance(k, A.Name) or k.id not in self.constants:
                raise TypeMismatchError(f"table keys of {f.name} must be constants{_where(k)}")
            key = self.constants[k.id]
            if key.type != f.param_types[0]:
                raise TypeMismatchError(f"table key {k.id} is not a {f.param_types[0]}{_where(k)}")
            table[key] = self.literal_value(v, f.ret_type)
        return FunctionDecl(f.name, "fixed", f.ret_type, f.param_types, f.param_names, f.body, table)

    def literal_value(self, e, ret_type):
        t = self.typeof(e, {})
        if not assignable(t, ret_type) or t == "Null":
            raise TypeMismatchError(f"expected a {ret_type} literal, got {_show(t)}{_where(e)}")
        if isinstance(e, A.BoolLit):
            return e.value
        if isinstance(e, A.TimestepLit):
            return Timestep(e.index)
        if isinstance(e, A.Name) and e.id in self.constants:
            return self.constants[e.id]
        v = const_number(e)
        if v is None:
            raise TypeMismatchError(f"expected a literal value{_where(e)}")
        return float(v) if ret_type == "Real" else int(v)

    def evidence(self, o):
        target = o.target
        if isinstance(target, A.Name):
            fn, args = target.id, ()
        elif isinstance(target, A.Call):
            fn, args = target.fn, target.args
        else:
            raise TypeMismatchError(f"observations must name a random function application{_where(o)}")
        decl = self.functions.get(fn)
        if decl is None:
            raise UnknownIdentifierError(f"unknown function {fn!r}{_where(o)}")
        if decl.kind != "random":
            raise TypeMismatchError(f"only random functions can be observed, not {fn}{_where(o)}")
        self.typeof(target, {})
        if isinstance(o.value, A.NullLit):
            raise TypeMismatchError(f"cannot observe null{_where(o)}")
        value = self.literal_value(o.value, decl.ret_type)
        return Evidence(fn, tuple(args), value, format_expr(target))

    def query(self, q):
        env = {}
        if q.binding is not None:
            env[q.binding[1]] = self.norm_type(q.binding[0], q)
        t = self.typeof(q.expr, env)
        if _is_dist(t) or _is_set(t):
            raise TypeMismatchError(f"query must be a value expression{_where(q)}")
        check_prev_guards(q.expr, {})
        return Query(q.expr, format_expr(q.expr), t, q.binding)

    # -- expressions ---------------------------------------------------
    def typeof(self, e, env):
        if isinstance(e, A.IntLit):
            return "Integer"
        if isinstance(e, A.RealLit):
            return "Real"
        if isinstance(e, A.BoolLit):
            return "Bool"
        if isinstance(e, A.NullLit):
            return "Null"
        if isinstance(e, A.TimestepLit):
            return "Timestep"
        if isinstance(e, A.Name):
            if e.id in env:
                return env[e.id]
            if e.id in self.constants:
                return self.constants[e.id].type
            f = self.functions.get(e.id)
            if f is not None:
                if f.arity:
                    raise TypeMismatchError(f"{e.id} expects {f.arity} argument(s){_where(e)}")
                return f.ret_type
            raise UnknownIdentifierError(f"unknown identifier {e.id!r}{_where(e)}")
        if isinstance(e, A.Call):
            return self.type_call(e, env)
        if isinstance(e, A.If):
            c = self.typeof(e.cond, env)
            if c not in ("Bool", "Null"):
                raise TypeMismatchError(f"if-condition must be Bool, got {_show(c)}{_where(e)}")
            return unify(self.typeof(e.then, env), self.typeof(e.orelse, env), e)
        if isinstance(e, A.BinOp):
            a, b = self.typeof(e.left, env), self.typeof(e.right, env)
            for t in (a, b):
                if isinstance(t, tuple):
                    raise TypeMismatchError(f"operator {e.op} needs values, got {_show(t)}{_where(e)}")
            if e.op in ("&&", "||"):
                if a not in ("Bool", "Null") or b not in ("Bool", "Null"):
                    raise TypeMismatchError(f"{e.op} needs Bool operands{_where(e)}")
                return "Bool"
            if e.op in ("==", "!="):
                unify(a, b, e)
                return "Bool"
            if e.op in ("<", "<=", ">", ">="):
                if not ((a in NUMERIC and b in NUMERIC) or (a == b == "Timestep")):
                    raise TypeMismatchError(f"cannot order {a} and {b}{_where(e)}")
                return "Bool"
            if a not in NUMERIC or b not in NUMERIC:
                raise TypeMismatchError(f"arithmetic on {a} and {b}{_where(e)}")
            if e.op == "/" or "Real" in (a, b):
                return "Real"
            return "Integer"
        if isinstance(e, A.UnaryOp):
            t = self.typeof(e.operand, env)
            if e.op == "!" and t == "Bool":
                return "Bool"
            if e.op == "-" and t in NUMERIC:
                return t
            raise TypeMismatchError(f"operator {e.op} on {_show(t)}{_where(e)}")
        if isinstance(e, A.SetComp):
            t = self.norm_type(e.type, e)
            inner = dict(env)
            inner[e.var] = t
            if e.cond is not None and self.typeof(e.cond, inner) != "Bool":
                raise TypeMismatchError(f"set filter must be Bool{_where(e)}")
            return ("Set", self.typeof(e.elem, inner))
        if isinstance(e, A.SetLit):
            t = "Null"
            for item in e.items:
                t = unify(t, self.typeof(item, env), item)
            return ("Set", t)
        if isinstance(e, A.MapLit):
            raise TypeMismatchError(f"a {{k -> v}} table is only allowed in Mix, Categorical "
                                    f"or a fixed-function definition{_where(e)}")
        raise TypeMismatchError(f"unsupported expression {e!r}")

    def type_call(self, e, env):
        fn, args = e.fn, e.args
        if fn == "prev":
            if len(args) != 1 or self.typeof(args[0], env) != "Timestep":
                raise TypeMismatchError(f"prev takes one Timestep{_where(e)}")
            return "Timestep"
        if fn == "dist" and fn not in self.functions:
            if len(args) != 3:
                raise TypeMismatchError(f"dist takes (Real, Real, object){_where(e)}")
            for a in args[:2]:
                if not assignable(self.typeof(a, env), "Real"):
                    raise TypeMismatchError(f"dist coordinates must be Real{_where(a)}")
            obj = self.typeof(args[2], env)
            for coord in ("pos_x", "pos_y"):
                f = self.functions.get(coord)
                if f is None or f.kind != "fixed" or f.param_types != (obj,):
                    raise UnknownIdentifierError(
                        f"dist needs fixed functions pos_x/pos_y over {obj}{_where(e)}")
            return "Real"
        spec = dist.lookup(fn)
        if spec is not None:
            return self.type_kernel(spec, e, env)
        f = self.functions.get(fn)
        if f is None:
            raise UnknownIdentifierError(f"unknown function {fn!r}{_where(e)}")
        if len(args) != f.arity:
            raise TypeMismatchError(f"{fn} expects {f.arity} argument(s), got {len(args)}{_where(e)}")
        for a, pt in zip(args, f.param_types):
            at = self.typeof(a, env)
            if isinstance(at, tuple) or not assignable(at, pt):
                raise TypeMismatchError(f"{fn} expects {pt}, got {_show(at)}{_where(a)}")
        return f.ret_type

    def type_kernel(self, spec, e, env):
        args = e.args
        if len(args) != len(spec.param_types):
            raise TypeMismatchError(f"{e.fn} expects {len(spec.param_types)} argument(s){_where(e)}")
        if spec.name in ("Mix", "Categorical"):
            (table,) = args
            if not isinstance(table, A.MapLit):
                raise TypeMismatchError(f"{e.fn} takes a {{value -> weight}} table{_where(e)}")
            elem = "Null"
            weights = []
            for k, w in table.items:
                kt = self.typeof(k, env)
                if spec.name == "Categorical" and _is_dist(kt):
                    raise TypeMismatchError(f"Categorical outcomes must be values{_where(k)}")
                if _is_set(kt):
                    raise TypeMismatchError(f"{e.fn} components cannot be sets{_where(k)}")
                elem = unify(elem, kt[1] if _is_dist(kt) else kt, k)
                wt = self.typeof(w, env)
                if not assignable(wt, "Real") or wt == "Null":
                    raise TypeMismatchError(f"{e.fn} weights must be Real{_where(w)}")
                weights.append(const_number(w))
            if all(w is not None for w in weights):
                total = sum(weights)
                if abs(total - 1.0) > dist.MIX_TOL:
                    raise MixWeightError(f"{e.fn} weights sum to {total!r}, not 1{_where(e)}")
                if any(w < 0 for w in weights):
                    raise MixWeightError(f"{e.fn} weights must be nonnegative{_where(e)}")
            return ("Dist", elem)
        if spec.name == "UniformChoice":
            st = self.typeof(args[0], env)
            if not _is_set(st):
                raise TypeMismatchError(f"UniformChoice takes a set{_where(e)}")
            return ("Dist", st[1])
        if spec.name == "Dirac":
            t = self.typeof(args[0], env)
            if isinstance(t, tuple):
                raise TypeMismatchError(f"Dirac takes a value{_where(e)}")
            return ("Dist", t)
        for a in args:
            at = self.typeof(a, env)
            if isinstance(at, tuple) or not assignable(at, "Real") or at == "Null":
                raise TypeMismatchError(f"{e.fn} parameters must be Real, got {_show(at)}{_where(a)}")
        return ("Dist", spec.result)

    # -- structure -----------------------------------------------------
    def static_edges(self):
        edges = {}
        by_type = {}
        for n in self.numbers:
            by_type.setdefault(n.type, []).append(n.id)
        for f in self.functions.values():
            if f.body is not None and f.table is None:
                edges[f.name] = tuple(sorted(referenced(f.body, by_type, self.functions)))
            else:
                edges[f.name] = ()
        for n in self.numbers:
            edges[n.id] = tuple(sorted(referenced(n.body, by_type, self.functions)))
        return edges

    def check_static_cycles(self, edges):
        untimed = {name for name, f in self.functions.items() if not f.timestep_indexed}
        untimed |= {n.id for n in self.numbers}
        state = {}

        def visit(node, path):
            state[node] = "active"
            for nxt in edges.get(node, ()):
                if nxt not in untimed:
                    continue
                if state.get(nxt) == "active":
                    cycle = path[path.index(nxt):] + [nxt] if nxt in path else [node, nxt]
                    raise StaticCycleError("static dependency cycle: " + " -> ".join(cycle))
                if nxt not in state:
                    visit(nxt, path + [nxt])
            state[node] = "done"

        for node in sorted(untimed):
            if node not in state:
                visit(node, [node])


def referenced(e, numbers_by_type, functions):
    """Declarations an expression reads: functions and number statements."""
    out = set()

    def walk(x):
        if isinstance(x, A.Name):
            if x.id in functions:
                out.add(x.id)
        elif isinstance(x, A.Call):
            if x.fn in functions:
                out.add(x.fn)
            elif x.fn == "dist":
                out.update(("pos_x", "pos_y"))
            for a in x.args:
                walk(a)
        elif isinstance(x, A.SetComp):
            out.update(numbers_by_type.get(x.type, ()))
            walk(x.elem)
            if x.cond is not None:
                walk(x.cond)
        else:
            for child in children(x):
                walk(child)

    walk(e)
    return out


def children(x):
    if isinstance(x, A.Call):
        return x.args
    if isinstance(x, A.If):
        return (x.cond, x.then, x.orelse)
    if isinstance(x, A.BinOp):
        return (x.left, x.right)
    if isinstance(x, A.UnaryOp):
        return (x.operand,)
    if isinstance(x, A.MapLit):
        return tuple(v for kv in x.items for v in kv)
    if isinstance(x, A.SetLit):
        return x.items
    if isinstance(x, A.SetComp):
        return (x.elem,) + ((x.cond,) if x.cond is not None else ())
    return ()


# -- prev() reachability ------------------------------------------------

def _lower_bound(e, bounds):
    if isinstance(e, A.TimestepLit):
        return e.index
    if isinstance(e, A.Name):
        return bounds.get(e.id, 0)
    if isinstance(e, A.Call) and e.fn == "prev" and len(e.args) == 1:
        return _lower_bound(e.args[0], bounds) - 1
    return 0


def _guard(cond, bounds):
    """Lower bounds implied on the then- and else-branch by a timestep test."""
    then_b, else_b = dict(bounds), dict(bounds)
    if isinstance(cond, A.BinOp) and cond.op == "&&":
        t1, _ = _guard(cond.left, bounds)
        t2, _ = _guard(cond.right, t1)
        return t2, else_b
    if not isinstance(cond, A.BinOp):
        return then_b, else_b
    left, right, op = cond.left, cond.right, cond.op
    if isinstance(left, A.TimestepLit) and isinstance(right, A.Name):
        left, right = right, left
        op = {"<": ">", "<=": ">=", ">": "<", ">=": "<="}.get(op, op)
    if not (isinstance(left, A.Name) and left.id in bounds and isinstance(right, A.TimestepLit)):
        return then_b, else_b
    v, k = left.id, right.index
    cur = bounds[v]

    def raise_to(d, lo):
        d[v] = max(cur, lo)

    if op == "==":
        raise_to(then_b, k)
        if k == 0:
            raise_to(else_b, 1)
    elif op == "!=":
        raise_to(else_b, k)
        if k == 0:
            raise_to(then_b, 1)
    elif op == ">":
        raise_to(then_b, k + 1)
    elif op == ">=":
        raise_to(then_b, k)
    elif op == "<":
        raise_to(else_b, k)
    elif op == "<=":
        raise_to(else_b, k + 1)
    return then_b, else_b


def check_prev_guards(e, bounds):
    """Reject ``prev`` applications that can reach ``@0``."""
    if isinstance(e, A.If):
        check_prev_guards(e.cond, bounds)
        then_b, else_b = _guard(e.cond, bounds)
        check_prev_guards(e.then, then_b)
        check_prev_guards(e.orelse, else_b)
        return
    if isinstance(e, A.Call) and e.fn == "prev":
        if _lower_bound(e.args[0], bounds) < 1:
            raise ResolveError(f"{format_expr(e)} can be evaluated at @0; "
                               f"guard it with 'if t == @0 then ... else ...'{_where(e)}")
    if isinstance(e, A.SetComp):
        inner = dict(bounds)
        inner.pop(e.var, None)
        for c in children(e):
            check_prev_guards(c, inner)
        return
    for c in children(e):
        check_prev_guards(c, bounds)


# -- vectorisation eligibility -----------------------------------------

def is_batchable(model):
    """True when every random function is applied to deterministic arguments.

    Such closed-universe models instantiate the same basic random variables in
    every sample, so a batch of samples can share one variable layout.
    """
    if model.number_stmts:
        return False
    functions = model.functions

    def static(x):
        if isinstance(x, A.Name):
            f = functions.get(x.id)
            return f is None or f.kind == "fixed"
        if isinstance(x, A.Call):
            f = functions.get(x.fn)
            if f is not None and f.kind != "fixed":
                return False
            if dist.lookup(x.fn) is not None:
                return False
            return all(static(a) for a in x.args)
        return all(static(c) for c in children(x))

    ok = True

    def walk(x):
        nonlocal ok
        if isinstance(x, A.Call):
            f = functions.get(x.fn)
            if f is not None and f.kind in ("random", "origin"):
                if not all(static(a) for a in x.args):
                    ok = False
        for c in children(x):
            walk(c)

    for f in functions.values():
        if f.body is not None and f.table is None:
            walk(f.body)
    for ev in model.evidence:
        for a in ev.args:
            if not static(a):
                return False
    for q in model.queries:
        walk(q.expr)
    return ok


def resolve(ast):
    """Type-check ``ast`` and build a :class:`~mixppl.model.model.Model`."""
    return _Resolver(ast).run()
