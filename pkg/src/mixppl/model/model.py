"""Resolved model: declarations, kernels-as-expressions, evidence and queries."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional

from ..dsl import ast as A
from ..dsl.printer import format_expr, format_model
from .values import ObjectRef, Timestep

BUILTIN_TYPES = ("Bool", "Integer", "Real", "Timestep")
TYPE_ALIASES = {"NaturalNum": "Integer", "Boolean": "Bool"}


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    kind: str  # "random" | "fixed" | "origin"
    ret_type: str
    param_types: tuple = ()
    param_names: tuple = ()
    body: Optional[A.Expr] = None
    table: Optional[dict] = field(default=None, compare=False)

    @property
    def arity(self):
        return len(self.param_types)

    @property
    def timestep_indexed(self):
        return "Timestep" in self.param_types


@dataclass(frozen=True)
class NumberDecl:
    id: str
    type: str
    origin_fns: tuple
    vars: tuple
    var_types: tuple
    body: A.Expr


@dataclass(frozen=True)
class Evidence:
    fn: str
    args: tuple  # argument expressions
    value: object
    label: str

    @property
    def target(self):
        return A.Call(self.fn, self.args) if self.args else A.Name(self.fn)


@dataclass(frozen=True)
class Query:
    expr: A.Expr
    label: str
    value_type: str
    binding: Optional[tuple] = None  # (type, var)

    @property
    def kind(self):
        """How the estimate is reported: probability, mean, or distribution."""
        if self.value_type == "Bool":
            return "probability"
        if self.value_type in ("Real", "Integer"):
            return "mean"
        return "distribution"


@dataclass
class Model:
    ast: A.ModelAST
    types: tuple
    constants: dict
    constants_by_type: dict
    functions: dict
    number_stmts: tuple
    evidence: tuple
    queries: tuple
    edges: dict
    batchable: bool

    @property
    def numbers_by_type(self):
        out = {}
        for n in self.number_stmts:
            out.setdefault(n.type, []).append(n)
        return out

    def number_decl(self, stmt_id):
        for n in self.number_stmts:
            if n.id == stmt_id:
                return n
        raise KeyError(stmt_id)

    # -- state-space structure -----------------------------------------
    def is_ssm(self):
        """Every random function is indexed by a Timestep and evidence is time-stamped."""
        randoms = [f for f in self.functions.values() if f.kind == "random"]
        if not randoms or self.number_stmts:
            return False
        if not all(f.timestep_indexed for f in randoms):
            return False
        return all(self.evidence_step(e) is not None for e in self.evidence)

    def evidence_step(self, ev):
        decl = self.functions[ev.fn]
        for ptype, arg in zip(decl.param_types, ev.args):
            if ptype == "Timestep":
                return arg.index if isinstance(arg, A.TimestepLit) else None
        return None

    @property
    def horizon(self):
        steps = [self.evidence_step(e) for e in self.evidence]
        steps = [s for s in steps if s is not None]
        return max(steps) if steps else 0

    def expanded_queries(self, horizon=None):
        """Queries with ``for Timestep t`` unrolled over ``@0..@horizon``."""
        horizon = self.horizon if horizon is None else horizon
        out = []
        for q in self.queries:
            if q.binding is None:
                out.append((q, {}))
            elif q.binding[0] == "Timestep":
                var = q.binding[1]
                for t in range(horizon + 1):
                    out.append((q, {var: Timestep(t)}))
            else:
                for obj in self.constants_by_type.get(q.binding[0], []):
                    out.append((q, {q.binding[1]: obj}))
        return out

    @staticmethod
    def query_label(query, env):
        if not env:
            return query.label
        from .evaluator import substitute
        return format_expr(substitute(query.expr, env))

    # -- derived models ------------------------------------------------
    def with_fixed(self, **overrides):
        """Re-resolve with zero-argument fixed functions replaced by constants."""
        fixed = []
        seen = set()
        for f in self.ast.fixed_fns:
            if f.name in overrides:
                if f.params:
                    raise ValueError(f"{f.name} takes arguments; only constants can be overridden")
                value = overrides[f.name]
                f = replace(f, body=_literal(value))
                seen.add(f.name)
            fixed.append(f)
        missing = set(overrides) - seen
        if missing:
            raise KeyError(f"no zero-argument fixed function(s): {sorted(missing)}")
        from ..dsl.resolver import resolve
        return resolve(replace(self.ast, fixed_fns=tuple(fixed)))

    def with_evidence(self, text):
        """Model with the ``obs``/``query`` statements in ``text`` appended."""
        from ..dsl.parser import parse
        from ..dsl.resolver import resolve
        return resolve(self.ast.merged(parse(text)))

    def without_evidence(self):
        from ..dsl.resolver import resolve
        return resolve(replace(self.ast, obs_stmts=()))

    # -- serialisation -------------------------------------------------
    def serialize(self):
        """Deterministic JSON description of the resolved structure."""
        doc = {
            "source": format_model(self.ast),
            "types": list(self.types),
            "constants": {t: [str(c) for c in cs] for t, cs in sorted(self.constants_by_type.items())},
            "functions": {
                name: {"kind": f.kind, "ret": f.ret_type, "params": list(f.param_types)}
                for name, f in sorted(self.functions.items())
            },
            "number_stmts": [{"id": n.id, "type": n.type, "origins": list(n.origin_fns)}
                             for n in self.number_stmts],
            "evidence": [{"target": e.label, "value": _jsonable(e.value)} for e in self.evidence],
            "queries": [q.label for q in self.queries],
            "edges": {k: list(v) for k, v in sorted(self.edges.items())},
            "batchable": self.batchable,
        }
        return json.dumps(doc, sort_keys=True, indent=1)

    def __str__(self):
        return format_model(self.ast)


def _literal(value):
    if isinstance(value, bool):
        return A.BoolLit(value)
    if isinstance(value, int):
        return A.IntLit(value) if value >= 0 else A.UnaryOp("-", A.IntLit(-value))
    value = float(value)
    return A.RealLit(value) if value >= 0 else A.UnaryOp("-", A.RealLit(-value))


def _jsonable(v):
    if isinstance(v, (ObjectRef, Timestep)):
        return str(v)
    return v
