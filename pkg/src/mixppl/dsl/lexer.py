"""Tokenizer for model files."""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import LexError

KEYWORDS = frozenset({
    "type", "Type", "distinct", "origin", "fixed", "random", "obs", "query",
    "if", "then", "else", "for", "true", "false", "null",
})

# longest operators first
_OPERATORS = ["->", "==", "!=", "<=", ">=", "&&", "||",
              "(", ")", "{", "}", "[", "]", ",", ";", "~", "=", "<", ">",
              "+", "-", "*", "/", "#", "!", "&", "|", ":"]

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<real>(?:\d+\.\d+(?:[eE][+-]?\d+)?)|(?:\d+[eE][+-]?\d+))
  | (?P<int>\d+)
  | (?P<timestep>@\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>""" + "|".join(re.escape(op) for op in _OPERATORS) + r""")
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | ident | int | real | timestep | op | eof
    text: str
    line: int
    column: int

    @property
    def value(self):
        if self.kind == "int":
            return int(self.text)
        if self.kind == "real":
            return float(self.text)
        if self.kind == "timestep":
            return int(self.text[1:])
        return self.text

    def __str__(self):
        if self.kind in ("keyword", "op"):
            return f"[{self.text}]"
        return f"[{self.kind} {self.text}]"


def tokenize(text):
    """Split model text into tokens, dropping whitespace and ``//`` comments."""
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise LexError(f"illegal character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        column = pos - line_start + 1
        pos = m.end()
        if kind == "nl":
            line += 1
            line_start = pos
            continue
        if kind in ("ws", "comment"):
            continue
        lexeme = m.group()
        if kind == "ident" and lexeme in KEYWORDS:
            kind = "keyword"
        tokens.append(Token(kind, lexeme, line, column))
    return tokens
