"""Weak-head values: constructor values with suspended arguments, neutrals,
closures, and memoizing thunks."""

from __future__ import annotations

from dataclasses import dataclass, field

from .sizes import NormalSize
from .syntax import Annot, Expr, Ident


class Thunk:
    """A suspended (env, expr) pair, memoized after the first force."""

    __slots__ = ("env", "expr", "value")

    def __init__(self, env: dict | None, expr: Expr | None, value: "Value | None" = None):
        self.env = env
        self.expr = expr
        self.value = value

    @classmethod
    def of(cls, value: "Value") -> "Thunk":
        return cls(None, None, value)

    def __repr__(self):
        return f"Thunk({self.value!r})" if self.value is not None else "Thunk(<suspended>)"


# Spine entries keep the application annotation so conversion can skip
# parametric arguments.
Spine = list[tuple[Thunk, Annot]]


@dataclass
class Closure:
    env: dict
    binder: Ident
    body: Expr


class Value:
    pass


@dataclass
class VSet(Value):
    pass


@dataclass
class VSizeU(Value):
    pass


@dataclass
class VSize(Value):
    size: NormalSize


@dataclass
class VPi(Value):
    annot: Annot
    binder: Ident
    domain: Value
    closure: Closure


@dataclass
class VLam(Value):
    binder: Ident
    closure: Closure


@dataclass
class VCon(Value):
    """Constructor value; args cover parameters, the size index and the
    proper arguments, all suspended."""

    con: Ident
    args: list[Thunk]


@dataclass
class VData(Value):
    """A (possibly partially applied) data type former."""

    name: Ident
    args: list[Thunk]


@dataclass
class VNe(Value):
    """Neutral: a variable applied to a spine."""

    head: Ident
    spine: Spine = field(default_factory=list)


@dataclass
class VDef(Value):
    """A defined function (fun/cofun) applied to a spine; unfolds on demand."""

    name: Ident
    spine: Spine = field(default_factory=list)
    stuck: bool = False
