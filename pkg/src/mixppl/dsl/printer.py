"""Canonical pretty-printer; ``parse(pretty(ast)) == ast``."""
from __future__ import annotations

from . import ast as A

_BIN_LEVEL = {"||": 1, "&&": 2, "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4,
              ">=": 4, "+": 5, "-": 5, "*": 6, "/": 6}


def _level(e):
    if isinstance(e, A.If):
        return 0
    if isinstance(e, A.BinOp):
        return _BIN_LEVEL[e.op]
    if isinstance(e, A.UnaryOp):
        return 3 if e.op == "!" else 7
    return 8


def _wrap(e, min_level):
    s = format_expr(e)
    return f"({s})" if _level(e) < min_level else s


def format_expr(e):
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.RealLit):
        return repr(float(e.value))
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.NullLit):
        return "null"
    if isinstance(e, A.TimestepLit):
        return f"@{e.index}"
    if isinstance(e, A.Name):
        return e.id
    if isinstance(e, A.Call):
        return f"{e.fn}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, A.If):
        return (f"if {format_expr(e.cond)} then {format_expr(e.then)} "
                f"else {format_expr(e.orelse)}")
    if isinstance(e, A.BinOp):
        lvl = _BIN_LEVEL[e.op]
        if lvl == 4:
            return f"{_wrap(e.left, 5)} {e.op} {_wrap(e.right, 5)}"
        return f"{_wrap(e.left, lvl)} {e.op} {_wrap(e.right, lvl + 1)}"
    if isinstance(e, A.UnaryOp):
        if e.op == "!":
            return f"!{_wrap(e.operand, 3)}"
        return f"-{_wrap(e.operand, 7)}"
    if isinstance(e, A.MapLit):
        inner = ", ".join(f"{format_expr(k)} -> {format_expr(v)}" for k, v in e.items)
        return "{" + inner + "}"
    if isinstance(e, A.SetLit):
        return "{" + ", ".join(format_expr(x) for x in e.items) + "}"
    if isinstance(e, A.SetComp):
        cond = f" : {format_expr(e.cond)}" if e.cond is not None else ""
        return f"{{{format_expr(e.elem)} for {e.type} {e.var}{cond}}}"
    raise TypeError(f"not an expression: {e!r}")


def _params(params):
    return "(" + ", ".join(f"{t} {n}" for t, n in params) + ")" if params else ""


def format_model(ast):
    lines = []
    if ast.type_decls:
        lines.append(f"type {', '.join(ast.type_decls)};")
    for d in ast.distinct_decls:
        names = ", ".join(n if c is None else f"{n}[{c}]" for n, c in d.names)
        lines.append(f"distinct {d.type} {names};")
    for o in ast.origin_decls:
        lines.append(f"origin {o.ret_type} {o.name}({o.arg_type});")
    for n in ast.number_stmts:
        binds = ""
        if n.origin_bindings:
            binds = "(" + ", ".join(f"{g} = {v}" for g, v in n.origin_bindings) + ")"
        lines.append(f"#{n.generated_type}{binds} ~ {format_expr(n.body)};")
    for f in ast.fixed_fns:
        lines.append(f"fixed {f.ret_type} {f.name}{_params(f.params)} = {format_expr(f.body)};")
    for f in ast.random_fns:
        lines.append(f"random {f.ret_type} {f.name}{_params(f.params)} ~ {format_expr(f.body)};")
    for o in ast.obs_stmts:
        lines.append(f"obs {format_expr(o.target)} = {format_expr(o.value)};")
    for q in ast.query_stmts:
        suffix = f" for {q.binding[0]} {q.binding[1]}" if q.binding else ""
        lines.append(f"query {format_expr(q.expr)}{suffix};")
    return "\n".join(lines) + "\n"
