"""Syntax tree for model files.

Nodes are frozen dataclasses; source positions are excluded from equality so
that two parses of equivalent text compare equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

Pos = Optional[tuple]


def _pos():
    return field(default=None, compare=False, repr=False)


class Expr:
    pass


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class RealLit(Expr):
    value: float
    pos: Pos = _pos()


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool
    pos: Pos = _pos()


@dataclass(frozen=True)
class NullLit(Expr):
    pos: Pos = _pos()


@dataclass(frozen=True)
class TimestepLit(Expr):
    index: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class Name(Expr):
    """Variable, constant (``R[0]`` included) or zero-argument function."""

    id: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    args: tuple
    pos: Pos = _pos()


@dataclass(frozen=True)
class If(Expr):
    cond: Expr
    then: Expr
    orelse: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # + - * / == != < <= > >= && ||
    left: Expr
    right: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class UnaryOp(Expr):
    op: str  # - !
    operand: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class MapLit(Expr):
    items: tuple  # ((key, value), ...)
    pos: Pos = _pos()


@dataclass(frozen=True)
class SetLit(Expr):
    items: tuple
    pos: Pos = _pos()


@dataclass(frozen=True)
class SetComp(Expr):
    """``{a for Applicant a}`` with an optional ``: cond`` filter."""

    elem: Expr
    type: str
    var: str
    cond: Optional[Expr] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class DistinctDecl:
    type: str
    names: tuple  # ((name, count or None), ...)
    pos: Pos = _pos()

    def expanded(self):
        out = []
        for name, count in self.names:
            if count is None:
                out.append(name)
            else:
                out.extend(f"{name}[{i}]" for i in range(count))
        return out


@dataclass(frozen=True)
class NumberStmt:
    generated_type: str
    origin_bindings: tuple  # ((origin fn, bound var), ...)
    body: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class OriginDecl:
    ret_type: str
    name: str
    arg_type: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class FuncDecl:
    kind: str  # "fixed" | "random"
    ret_type: str
    name: str
    params: tuple  # ((type, name), ...)
    body: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class ObsStmt:
    target: Expr
    value: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class QueryStmt:
    expr: Expr
    binding: Optional[tuple] = None  # (type, var) for "query e for T v"
    pos: Pos = _pos()


@dataclass(frozen=True)
class ModelAST:
    type_decls: tuple = ()
    distinct_decls: tuple = ()
    number_stmts: tuple = ()
    origin_decls: tuple = ()
    fixed_fns: tuple = ()
    random_fns: tuple = ()
    obs_stmts: tuple = ()
    query_stmts: tuple = ()

    def merged(self, other):
        return ModelAST(*(getattr(self, f) + getattr(other, f) for f in _FIELDS))


_FIELDS = ("type_decls", "distinct_decls", "number_stmts", "origin_decls",
           "fixed_fns", "random_fns", "obs_stmts", "query_stmts")
