"""The checked global environment: data/codata entries, constructors,
functions with elaborated clauses and totality verdicts, and lets."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .sizes import NormalSize, SizeCtx
from .syntax import Annot, Expr, Ident, Pattern, Polarity, Pos
from .values import Thunk, Value


class Totality(Enum):
    ASSUMED = "assumed-under-check"
    CHECKED = "checked"


@dataclass
class DataEntry:
    name: Ident
    sized: bool
    coinductive: bool
    params: list[tuple[Ident, Polarity]]
    kind_value: Value
    n_indices: int  # indices after the parameters, including the size
    constructors: list[Ident] = field(default_factory=list)


@dataclass
class ConEntry:
    name: Ident
    data: Ident
    type_expr: Expr  # internal type: data parameters prepended parametrically
    type_value: Value
    n_params: int
    has_size: bool
    annots: list[Annot]  # per telescope position
    arity: int


@dataclass
class ElabClause:
    patterns: list[Pattern]
    rhs: Expr  # elaborated, size holes substituted
    lhs_size: NormalSize | None  # value matched at the recursion size parameter
    sctx: SizeCtx
    pos: Pos


@dataclass
class CallSite:
    """One recursive occurrence, recorded while checking a clause body."""

    args: list[Expr]
    size_arg: NormalSize | None
    sctx: SizeCtx
    lhs_size: NormalSize | None
    clause_index: int
    pos: Pos


@dataclass
class FunEntry:
    name: Ident
    coinductive: bool
    type_expr: Expr
    type_value: Value
    arity: int = 0
    size_param: int | None = None
    clauses: list[ElabClause] = field(default_factory=list)
    calls: list[CallSite] = field(default_factory=list)
    totality: Totality = Totality.ASSUMED
    report: object = None  # TotalityReport once checked


@dataclass
class LetEntry:
    name: Ident
    type_value: Value
    body: Expr
    eval: bool = False
    thunk: Thunk | None = None


Entry = DataEntry | ConEntry | FunEntry | LetEntry


class Signature:
    """Append-only map from resolved idents to checked entries."""

    def __init__(self):
        self.entries: dict[int, Entry] = {}
        self.order: list[Ident] = []
        self.by_text: dict[str, Ident] = {}

    def add(self, name: Ident, entry: Entry):
        assert name.uid not in self.entries
        self.entries[name.uid] = entry
        self.order.append(name)
        self.by_text.setdefault(name.text, name)

    def __contains__(self, name: Ident) -> bool:
        return name.uid in self.entries

    def __getitem__(self, name: Ident) -> Entry:
        return self.entries[name.uid]

    def get(self, name: Ident) -> Entry | None:
        return self.entries.get(name.uid)

    def lookup_text(self, text: str) -> Entry | None:
        ident = self.by_text.get(text)
        return self.entries.get(ident.uid) if ident else None

    def data(self, name: Ident) -> DataEntry:
        e = self.entries[name.uid]
        assert isinstance(e, DataEntry)
        return e

    def con(self, name: Ident) -> ConEntry:
        e = self.entries[name.uid]
        assert isinstance(e, ConEntry)
        return e

    def fun(self, name: Ident) -> FunEntry:
        e = self.entries[name.uid]
        assert isinstance(e, FunEntry)
        return e

    def __len__(self):
        return len(self.entries)
