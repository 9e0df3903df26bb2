"""Recursive-descent parser producing a :class:`ModelAST`."""
from __future__ import annotations

from ..errors import ParseError
from . import ast as A
from .lexer import Token, tokenize

_CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")


class _Parser:
    def __init__(self, tokens):
        self.tokens = list(tokens)
        if self.tokens and self.tokens[-1].kind == "eof":
            self.tokens.pop()
        last = self.tokens[-1] if self.tokens else None
        eof_line = last.line if last else 1
        eof_col = last.column + len(last.text) if last else 1
        self.tokens.append(Token("eof", "<end of input>", eof_line, eof_col))
        self.i = 0

    # -- token helpers -------------------------------------------------
    @property
    def tok(self):
        return self.tokens[self.i]

    def peek(self, offset=1):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def at(self, *texts):
        t = self.tok
        return t.kind in ("keyword", "op") and t.text in texts

    def advance(self):
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, expected):
        t = self.tok
        return ParseError(f"expected {expected}, found {t.text!r}", t.line, t.column)

    def expect(self, *texts):
        if not self.at(*texts):
            raise self.error(" or ".join(repr(t) for t in texts))
        return self.advance()

    def expect_ident(self, what="identifier"):
        if self.tok.kind != "ident":
            raise self.error(what)
        return self.advance().text

    def pos(self):
        return (self.tok.line, self.tok.column)

    # -- statements ----------------------------------------------------
    def model(self):
        buckets = {f: [] for f in A._FIELDS}
        while self.tok.kind != "eof":
            field, node = self.statement()
            if field == "type_decls":
                buckets[field].extend(node)
            else:
                buckets[field].append(node)
        return A.ModelAST(**{k: tuple(v) for k, v in buckets.items()})

    def statement(self):
        t = self.tok
        if self.at("type", "Type"):
            self.advance()
            names = [self.expect_ident("type name")]
            while self.at(","):
                self.advance()
                names.append(self.expect_ident("type name"))
            self.expect(";")
            return "type_decls", names
        if self.at("distinct"):
            return "distinct_decls", self.distinct()
        if self.at("#"):
            return "number_stmts", self.number_stmt()
        if self.at("origin"):
            pos = self.pos()
            self.advance()
            ret = self.expect_ident("type name")
            name = self.expect_ident("origin function name")
            self.expect("(")
            arg = self.expect_ident("type name")
            self.expect(")")
            self.expect(";")
            return "origin_decls", A.OriginDecl(ret, name, arg, pos=pos)
        if self.at("fixed", "random"):
            return self.func_decl()
        if self.at("obs"):
            pos = self.pos()
            self.advance()
            target = self.expr()
            self.expect("=")
            value = self.expr()
            self.expect(";")
            return "obs_stmts", A.ObsStmt(target, value, pos=pos)
        if self.at("query"):
            pos = self.pos()
            self.advance()
            e = self.expr()
            if self.at("="):
                self.advance()
                e = A.BinOp("==", e, self.expr(), pos=pos)
            binding = None
            if self.at("for"):
                self.advance()
                binding = (self.expect_ident("type name"), self.expect_ident("variable"))
            self.expect(";")
            return "query_stmts", A.QueryStmt(e, binding, pos=pos)
        raise ParseError(f"expected a statement, found {t.text!r}", t.line, t.column)

    def distinct(self):
        pos = self.pos()
        self.advance()
        type_name = self.expect_ident("type name")
        names = []
        while True:
            name = self.expect_ident("constant name")
            count = None
            if self.at("["):
                self.advance()
                if self.tok.kind != "int":
                    raise self.error("array size")
                count = self.advance().value
                self.expect("]")
            names.append((name, count))
            if not self.at(","):
                break
            self.advance()
        self.expect(";")
        return A.DistinctDecl(type_name, tuple(names), pos=pos)

    def number_stmt(self):
        pos = self.pos()
        self.expect("#")
        type_name = self.expect_ident("type name")
        bindings = []
        if self.at("("):
            self.advance()
            while True:
                fn = self.expect_ident("origin function")
                self.expect("=")
                var = self.expect_ident("variable")
                bindings.append((fn, var))
                if not self.at(","):
                    break
                self.advance()
            self.expect(")")
        self.expect("~")
        body = self.expr()
        self.expect(";")
        return A.NumberStmt(type_name, tuple(bindings), body, pos=pos)

    def func_decl(self):
        pos = self.pos()
        kind = self.advance().text
        ret = self.expect_ident("type name")
        name = self.expect_ident("function name")
        params = []
        if self.at("("):
            self.advance()
            if not self.at(")"):
                while True:
                    ptype = self.expect_ident("parameter type")
                    pname = self.expect_ident("parameter name")
                    params.append((ptype, pname))
                    if not self.at(","):
                        break
                    self.advance()
            self.expect(")")
        self.expect("=" if kind == "fixed" else "~")
        body = self.expr()
        self.expect(";")
        return ("fixed_fns" if kind == "fixed" else "random_fns",
                A.FuncDecl(kind, ret, name, tuple(params), body, pos=pos))

    # -- expressions ---------------------------------------------------
    def expr(self):
        if self.at("if"):
            return self.if_expr()
        return self.or_expr()

    def if_expr(self):
        pos = self.pos()
        self.expect("if")
        cond = self.expr()
        self.expect("then")
        then = self.expr()
        self.expect("else")
        orelse = self.expr()
        return A.If(cond, then, orelse, pos=pos)

    def or_expr(self):
        left = self.and_expr()
        while self.at("||", "|"):
            pos = self.pos()
            self.advance()
            left = A.BinOp("||", left, self.and_expr(), pos=pos)
        return left

    def and_expr(self):
        left = self.not_expr()
        while self.at("&&", "&"):
            pos = self.pos()
            self.advance()
            left = A.BinOp("&&", left, self.not_expr(), pos=pos)
        return left

    def not_expr(self):
        if self.at("!"):
            pos = self.pos()
            self.advance()
            return A.UnaryOp("!", self.not_expr(), pos=pos)
        return self.cmp_expr()

    def cmp_expr(self):
        left = self.add_expr()
        if self.at(*_CMP_OPS):
            pos = self.pos()
            op = self.advance().text
            left = A.BinOp(op, left, self.add_expr(), pos=pos)
        return left

    def add_expr(self):
        left = self.mul_expr()
        while self.at("+", "-"):
            pos = self.pos()
            op = self.advance().text
            left = A.BinOp(op, left, self.mul_expr(), pos=pos)
        return left

    def mul_expr(self):
        left = self.unary()
        while self.at("*", "/"):
            pos = self.pos()
            op = self.advance().text
            left = A.BinOp(op, left, self.unary(), pos=pos)
        return left

    def unary(self):
        if self.at("-"):
            pos = self.pos()
            self.advance()
            return A.UnaryOp("-", self.unary(), pos=pos)
        return self.primary()

    def primary(self):
        t = self.tok
        pos = (t.line, t.column)
        if t.kind == "int":
            self.advance()
            return A.IntLit(t.value, pos=pos)
        if t.kind == "real":
            self.advance()
            return A.RealLit(t.value, pos=pos)
        if t.kind == "timestep":
            self.advance()
            return A.TimestepLit(t.value, pos=pos)
        if self.at("true", "false"):
            self.advance()
            return A.BoolLit(t.text == "true", pos=pos)
        if self.at("null"):
            self.advance()
            return A.NullLit(pos=pos)
        if self.at("if"):
            return self.if_expr()
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if self.at("{"):
            return self.braces()
        if t.kind == "ident":
            self.advance()
            if self.at("["):
                self.advance()
                if self.tok.kind != "int":
                    raise self.error("constant index")
                idx = self.advance().value
                self.expect("]")
                return A.Name(f"{t.text}[{idx}]", pos=pos)
            if self.at("("):
                self.advance()
                args = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.at(","):
                        self.advance()
                        args.append(self.expr())
                self.expect(")")
                return A.Call(t.text, tuple(args), pos=pos)
            return A.Name(t.text, pos=pos)
        raise self.error("an expression")

    def braces(self):
        pos = self.pos()
        self.expect("{")
        if self.at("}"):
            self.advance()
            return A.SetLit((), pos=pos)
        first = self.expr()
        if self.at("->"):
            self.advance()
            items = [(first, self.expr())]
            while self.at(","):
                self.advance()
                k = self.expr()
                self.expect("->")
                items.append((k, self.expr()))
            self.expect("}")
            return A.MapLit(tuple(items), pos=pos)
        if self.at("for"):
            self.advance()
            type_name = self.expect_ident("type name")
            var = self.expect_ident("variable")
            cond = None
            if self.at(":"):
                self.advance()
                cond = self.expr()
            self.expect("}")
            return A.SetComp(first, type_name, var, cond, pos=pos)
        items = [first]
        while self.at(","):
            self.advance()
            items.append(self.expr())
        self.expect("}")
        return A.SetLit(tuple(items), pos=pos)


def parse_model(tokens):
    """Parse a token stream (from :func:`tokenize`) into a :class:`ModelAST`."""
    return _Parser(tokens).model()


def parse_expr(text):
    p = _Parser(tokenize(text))
    e = p.expr()
    if p.tok.kind != "eof":
        raise p.error("end of expression")
    return e


def parse(text):
    return parse_model(tokenize(text))
