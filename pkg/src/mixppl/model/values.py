"""Runtime values and basic random variable identities."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True, order=True)
class Timestep:
    index: int

    def __str__(self):
        return f"@{self.index}"

    __repr__ = __str__


class ObjectRef:
    """A possible element of the universe.

    Distinct constants carry their ``name``. Generated objects carry
    ``origin = (statement id, origin argument tuple, index)`` with the index
    counted from 1. Equality is equality of these provenance fields.
    """

    __slots__ = ("type", "name", "origin", "_hash")

    def __init__(self, type: str, name: Optional[str] = None, origin: Optional[tuple] = None):
        if (name is None) == (origin is None):
            raise ValueError("an object has exactly one of name/origin")
        if origin is not None and origin[2] < 1:
            raise ValueError("generated object index starts at 1")
        object.__setattr__(self, "type", type)
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "_hash", hash((type, name, origin)))

    def __setattr__(self, key, value):
        raise AttributeError("ObjectRef is immutable")

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, ObjectRef):
            return NotImplemented
        return (self._hash == other._hash and self.type == other.type and self.name == other.name
                and self.origin == other.origin)

    def __hash__(self):
        return self._hash

    def __reduce__(self):
        return (ObjectRef, (self.type, self.name, self.origin))

    @property
    def generated(self):
        return self.origin is not None

    def __str__(self):
        if self.name is not None:
            return self.name
        stmt, args, index = self.origin
        inner = ",".join(format_value(a) for a in args)
        return f"{self.type}<{stmt}({inner})#{index}>"

    __repr__ = __str__


@dataclass(frozen=True)
class BasicRV:
    """Number variable ``V_nu[u]`` or function application variable ``V_f[u]``."""

    kind: str  # "number" | "function"
    decl: str
    args: tuple = ()

    def __str__(self):
        inner = ", ".join(format_value(a) for a in self.args)
        if self.kind == "number":
            return f"{self.decl}[{inner}]"
        return f"{self.decl}({inner})" if self.args else self.decl

    __repr__ = __str__


def format_value(value):
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)
