"""Abstract syntax shared by every other module.

Terms, types, cast annotations, coercions and the structural measures
(substitution, alpha-equivalence, type extraction, height, size).  All values
are immutable after construction and safe to share between threads.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union


class Mode(enum.Enum):
    """Which semantics evaluates the shared syntax."""

    CLASSIC = "classic"
    FORGETFUL = "forgetful"
    HEEDFUL = "heedful"
    EIDETIC = "eidetic"

    @property
    def short(self) -> str:
        return {"classic": "C", "forgetful": "F", "heedful": "H", "eidetic": "E"}[self.value]

    @classmethod
    def parse(cls, name: str) -> "Mode":
        name = name.strip().lower()
        for m in cls:
            if name in (m.value, m.short.lower()):
                return m
        raise ValueError(f"unknown mode: {name!r}")


ALL_MODES = (Mode.CLASSIC, Mode.FORGETFUL, Mode.HEEDFUL, Mode.EIDETIC)


# A label is either a named blame label (a string) or the empty label (None),
# which only shows up on eidetic casts after coercion translation.
Label = Optional[str]


class BaseType(enum.Enum):
    BOOL = "Bool"
    INT = "Int"


class Status(enum.Enum):
    """Whether a coercion stack's target type has been (or is being) checked."""

    CHECKED = "ok"
    UNCHECKED = "pending"


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True, eq=False)
class Refinement:
    """{binder : base | predicate} -- constants of `base` satisfying the predicate."""

    binder: str
    base: BaseType
    predicate: "Term"


@dataclass(frozen=True, eq=False)
class Fun:
    dom: "Type"
    cod: "Type"


Type = Union[Refinement, Fun]


def raw(base: BaseType) -> Refinement:
    binder = "b" if base is BaseType.BOOL else "x"
    return Refinement(binder, base, Const(True))


def is_raw(t: Type) -> bool:
    return isinstance(t, Refinement) and isinstance(t.predicate, Const) and t.predicate.value is True


# ---------------------------------------------------------------------------
# Annotations and coercions


@dataclass(frozen=True, eq=False)
class EmptyAnn:
    """The bullet annotation carried by every source-program cast."""


EMPTY_ANN = EmptyAnn()


@dataclass(frozen=True, eq=False)
class RefEntry:
    """One labeled refinement in a refinement list."""

    ref: Refinement
    label: str


@dataclass(frozen=True, eq=False)
class Refs:
    entries: tuple[RefEntry, ...]


@dataclass(frozen=True, eq=False)
class FunC:
    dom: "Coercion"
    cod: "Coercion"


Coercion = Union[Refs, FunC]


@dataclass(frozen=True, eq=False)
class TypeSet:
    """Duplicate-free set of types, canonically ordered by printed alpha-normal form."""

    members: tuple[Type, ...]

    @staticmethod
    def of(types: Iterable[Type]) -> "TypeSet":
        seen: dict[str, Type] = {}
        for t in types:
            seen.setdefault(canon(t), t)
        ordered = tuple(seen[k] for k in sorted(seen))
        return TypeSet(ordered)

    def __iter__(self) -> Iterator[Type]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, t: Type) -> bool:
        key = canon(t)
        return any(canon(m) == key for m in self.members)

    def union(self, other: "TypeSet") -> "TypeSet":
        return TypeSet.of(self.members + other.members)

    def add(self, t: Type) -> "TypeSet":
        return TypeSet.of(self.members + (t,))

    def remove(self, t: Type) -> "TypeSet":
        key = canon(t)
        return TypeSet(tuple(m for m in self.members if canon(m) != key))


EMPTY_SET = TypeSet(())


@dataclass(frozen=True, eq=False)
class Types:
    """Heedful annotation: the set of intermediate types a cast remembers."""

    types: TypeSet


@dataclass(frozen=True, eq=False)
class Coerce:
    """Eidetic annotation: the cast's full checking plan."""

    coercion: Coercion


Annotation = Union[EmptyAnn, Types, Coerce]


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True, eq=False)
class Var:
    name: str


@dataclass(frozen=True, eq=False)
class Const:
    value: Union[bool, int]

    @property
    def base(self) -> BaseType:
        return BaseType.BOOL if isinstance(self.value, bool) else BaseType.INT


@dataclass(frozen=True, eq=False)
class Abs:
    binder: str
    annot: Type
    body: "Term"


@dataclass(frozen=True, eq=False)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True, eq=False)
class Op:
    name: str
    args: tuple["Term", ...]


@dataclass(frozen=True, eq=False)
class Cast:
    src: Type
    ann: Annotation
    tgt: Type
    label: Label
    subject: "Term"


@dataclass(frozen=True, eq=False)
class ActiveCheck:
    """In-flight predicate evaluation: <target, current, scrutinee>^label."""

    tgt: Refinement
    current: "Term"
    scrutinee: Const
    label: Label


@dataclass(frozen=True, eq=False)
class Blame:
    label: Label


@dataclass(frozen=True, eq=False)
class CoercionStack:
    """Eidetic runtime form draining a refinement list against a constant."""

    tgt: Refinement
    status: Status
    pending: tuple[RefEntry, ...]
    scrutinee: Const
    current: "Term"


@dataclass(frozen=True, eq=False)
class Cond:
    guard: "Term"
    then: "Term"
    orelse: "Term"


@dataclass(frozen=True, eq=False)
class Fix:
    binder: str
    annot: Type
    body: "Term"


Term = Union[Var, Const, Abs, App, Op, Cast, ActiveCheck, Blame, CoercionStack, Cond, Fix]

Node = Union[Term, Type]


# ---------------------------------------------------------------------------
# Free variables

_fresh_counter = itertools.count(1)


def _cache(node, attr: str, value):
    object.__setattr__(node, attr, value)
    return value


def free_vars(node: Node) -> frozenset[str]:
    cached = getattr(node, "_fv", None)
    if cached is not None:
        return cached
    if isinstance(node, Var):
        fv = frozenset((node.name,))
    elif isinstance(node, (Const, Blame)):
        fv = frozenset()
    elif isinstance(node, Refinement):
        fv = free_vars(node.predicate) - {node.binder}
    elif isinstance(node, Fun):
        fv = free_vars(node.dom) | free_vars(node.cod)
    elif isinstance(node, (Abs, Fix)):
        fv = free_vars(node.annot) | (free_vars(node.body) - {node.binder})
    elif isinstance(node, App):
        fv = free_vars(node.fn) | free_vars(node.arg)
    elif isinstance(node, Op):
        fv = frozenset().union(*(free_vars(a) for a in node.args)) if node.args else frozenset()
    elif isinstance(node, Cast):
        fv = free_vars(node.src) | free_vars(node.tgt) | free_vars(node.subject) | _ann_free_vars(node.ann)
    elif isinstance(node, ActiveCheck):
        fv = free_vars(node.tgt) | free_vars(node.current)
    elif isinstance(node, CoercionStack):
        fv = free_vars(node.tgt) | free_vars(node.current)
        for entry in node.pending:
            fv |= free_vars(entry.ref)
    elif isinstance(node, Cond):
        fv = free_vars(node.guard) | free_vars(node.then) | free_vars(node.orelse)
    else:
        raise TypeError(f"free_vars: not a term or type: {node!r}")
    return _cache(node, "_fv", fv)


def _ann_free_vars(ann: Annotation) -> frozenset[str]:
    if isinstance(ann, EmptyAnn):
        return frozenset()
    if isinstance(ann, Types):
        out: frozenset[str] = frozenset()
        for t in ann.types:
            out |= free_vars(t)
        return out
    return _coercion_free_vars(ann.coercion)


def _coercion_free_vars(c: Coercion) -> frozenset[str]:
    if isinstance(c, Refs):
        out: frozenset[str] = frozenset()
        for entry in c.entries:
            out |= free_vars(entry.ref)
        return out
    return _coercion_free_vars(c.dom) | _coercion_free_vars(c.cod)


def fresh_name(base: str, avoid: frozenset[str]) -> str:
    root = base.rstrip("0123456789_") or "v"
    while True:
        candidate = f"{root}_{next(_fresh_counter)}"
        if candidate not in avoid:
            return candidate


# ---------------------------------------------------------------------------
# Substitution


def subst(e: Term, x: str, v: Term) -> Term:
    """Capture-avoiding substitution of v for free occurrences of x in e."""

    if x not in free_vars(e):
        return e
    if isinstance(e, Var):
        return v if e.name == x else e
    if isinstance(e, (Const, Blame)):
        return e
    if isinstance(e, (Abs, Fix)):
        ctor = type(e)
        annot = subst_type(e.annot, x, v)
        if e.binder == x:
            return ctor(e.binder, annot, e.body)
        binder, body = e.binder, e.body
        if binder in free_vars(v):
            renamed = fresh_name(binder, free_vars(v) | free_vars(body))
            body = subst(body, binder, Var(renamed))
            binder = renamed
        return ctor(binder, annot, subst(body, x, v))
    if isinstance(e, App):
        return App(subst(e.fn, x, v), subst(e.arg, x, v))
    if isinstance(e, Op):
        return Op(e.name, tuple(subst(a, x, v) for a in e.args))
    if isinstance(e, Cast):
        return Cast(
            subst_type(e.src, x, v),
            _subst_ann(e.ann, x, v),
            subst_type(e.tgt, x, v),
            e.label,
            subst(e.subject, x, v),
        )
    if isinstance(e, ActiveCheck):
        return ActiveCheck(subst_type(e.tgt, x, v), subst(e.current, x, v), e.scrutinee, e.label)
    if isinstance(e, CoercionStack):
        pending = tuple(RefEntry(subst_type(t.ref, x, v), t.label) for t in e.pending)
        return CoercionStack(subst_type(e.tgt, x, v), e.status, pending, e.scrutinee, subst(e.current, x, v))
    if isinstance(e, Cond):
        return Cond(subst(e.guard, x, v), subst(e.then, x, v), subst(e.orelse, x, v))
    raise TypeError(f"subst: not a term: {e!r}")


def subst_type(t: Type, x: str, v: Term) -> Type:
    if x not in free_vars(t):
        return t
    if isinstance(t, Refinement):
        binder, pred = t.binder, t.predicate
        if binder == x:
            return t
        if binder in free_vars(v):
            renamed = fresh_name(binder, free_vars(v) | free_vars(pred))
            pred = subst(pred, binder, Var(renamed))
            binder = renamed
        return Refinement(binder, t.base, subst(pred, x, v))
    return Fun(subst_type(t.dom, x, v), subst_type(t.cod, x, v))


def _subst_ann(ann: Annotation, x: str, v: Term) -> Annotation:
    if isinstance(ann, EmptyAnn):
        return ann
    if isinstance(ann, Types):
        return Types(TypeSet.of(subst_type(t, x, v) for t in ann.types))
    return Coerce(_subst_coercion(ann.coercion, x, v))


def _subst_coercion(c: Coercion, x: str, v: Term) -> Coercion:
    if isinstance(c, Refs):
        return Refs(tuple(RefEntry(subst_type(t.ref, x, v), t.label) for t in c.entries))
    return FunC(_subst_coercion(c.dom, x, v), _subst_coercion(c.cod, x, v))


# ---------------------------------------------------------------------------
# Alpha-equivalence via a canonical de-Bruijn rendering


def canon(node: Node) -> str:
    """Canonical string: identical for alpha-equivalent terms/types."""

    cached = getattr(node, "_canon", None)
    if cached is not None:
        return cached
    out: list[str] = []
    _canon_into(node, {}, 0, out)
    return _cache(node, "_canon", "".join(out))


def _canon_into(node: Node, env: dict[str, int], depth: int, out: list[str]) -> None:
    if isinstance(node, Var):
        if node.name in env:
            out.append(f"#{depth - env[node.name]}")
        else:
            out.append(f"${node.name}")
    elif isinstance(node, Const):
        out.append(repr(node.value) if isinstance(node.value, bool) else str(node.value))
    elif isinstance(node, Blame):
        out.append(f"(blame {node.label or ''})")
    elif isinstance(node, Refinement):
        out.append("{" + node.base.value + "|")
        _canon_into(node.predicate, {**env, node.binder: depth + 1}, depth + 1, out)
        out.append("}")
    elif isinstance(node, Fun):
        out.append("(")
        _canon_into(node.dom, env, depth, out)
        out.append("->")
        _canon_into(node.cod, env, depth, out)
        out.append(")")
    elif isinstance(node, (Abs, Fix)):
        out.append("(fix " if isinstance(node, Fix) else "(lam ")
        _canon_into(node.annot, env, depth, out)
        out.append(".")
        _canon_into(node.body, {**env, node.binder: depth + 1}, depth + 1, out)
        out.append(")")
    elif isinstance(node, App):
        out.append("(app ")
        _canon_into(node.fn, env, depth, out)
        out.append(" ")
        _canon_into(node.arg, env, depth, out)
        out.append(")")
    elif isinstance(node, Op):
        out.append(f"(op {node.name}")
        for a in node.args:
            out.append(" ")
            _canon_into(a, env, depth, out)
        out.append(")")
    elif isinstance(node, Cast):
        out.append("(cast ")
        _canon_into(node.src, env, depth, out)
        out.append("=>")
        _canon_into(node.tgt, env, depth, out)
        out.append(f"@{node.label or ''}^")
        _canon_ann(node.ann, env, depth, out)
        out.append(" ")
        _canon_into(node.subject, env, depth, out)
        out.append(")")
    elif isinstance(node, ActiveCheck):
        out.append("(check ")
        _canon_into(node.tgt, env, depth, out)
        out.append(",")
        _canon_into(node.current, env, depth, out)
        out.append(",")
        _canon_into(node.scrutinee, env, depth, out)
        out.append(f"@{node.label or ''})")
    elif isinstance(node, CoercionStack):
        out.append("(stack ")
        _canon_into(node.tgt, env, depth, out)
        out.append("," + node.status.name + ",[")
        for entry in node.pending:
            _canon_into(entry.ref, env, depth, out)
            out.append(f"^{entry.label},")
        out.append("],")
        _canon_into(node.scrutinee, env, depth, out)
        out.append(",")
        _canon_into(node.current, env, depth, out)
        out.append(")")
    elif isinstance(node, Cond):
        out.append("(if ")
        _canon_into(node.guard, env, depth, out)
        out.append(" ")
        _canon_into(node.then, env, depth, out)
        out.append(" ")
        _canon_into(node.orelse, env, depth, out)
        out.append(")")
    else:
        raise TypeError(f"canon: not a term or type: {node!r}")


def _canon_ann(ann: Annotation, env: dict[str, int], depth: int, out: list[str]) -> None:
    if isinstance(ann, EmptyAnn):
        out.append("*")
    elif isinstance(ann, Types):
        out.append("{")
        for t in ann.types:
            _canon_into(t, env, depth, out)
            out.append(",")
        out.append("}")
    else:
        _canon_coercion(ann.coercion, env, depth, out)


def _canon_coercion(c: Coercion, env: dict[str, int], depth: int, out: list[str]) -> None:
    if isinstance(c, Refs):
        out.append("[")
        for entry in c.entries:
            _canon_into(entry.ref, env, depth, out)
            out.append(f"^{entry.label},")
        out.append("]")
    else:
        out.append("(")
        _canon_coercion(c.dom, env, depth, out)
        out.append("|->")
        _canon_coercion(c.cod, env, depth, out)
        out.append(")")


def alpha_eq(a: Node, b: Node) -> bool:
    """True iff a and b are equal up to consistent bound-variable renaming."""

    if a is b:
        return True
    return canon(a) == canon(b)


# ---------------------------------------------------------------------------
# Type extraction, height, size


def type_keys(node: Node) -> frozenset[str]:
    """Canonical keys of types_of(node); cached per node for cheap unions."""

    cached = getattr(node, "_tkeys", None)
    if cached is not None:
        return cached
    collected: dict[str, Type] = {}
    _collect_types(node, collected)
    return _cache(node, "_tkeys", frozenset(collected))


def types_of(e: Node) -> TypeSet:
    """All types (with their structural subparts) occurring in e."""

    collected: dict[str, Type] = {}
    _collect_types(e, collected)
    return TypeSet.of(collected.values())


def _collect_types(node: Node, acc: dict[str, Type]) -> None:
    if isinstance(node, (Var, Const, Blame)):
        return
    if isinstance(node, Refinement):
        acc.setdefault(canon(node), node)
        _collect_types(node.predicate, acc)
    elif isinstance(node, Fun):
        acc.setdefault(canon(node), node)
        _collect_types(node.dom, acc)
        _collect_types(node.cod, acc)
    elif isinstance(node, (Abs, Fix)):
        _collect_types(node.annot, acc)
        _collect_types(node.body, acc)
    elif isinstance(node, App):
        _collect_types(node.fn, acc)
        _collect_types(node.arg, acc)
    elif isinstance(node, Op):
        for a in node.args:
            _collect_types(a, acc)
    elif isinstance(node, Cast):
        _collect_types(node.src, acc)
        _collect_types(node.tgt, acc)
        _collect_ann_types(node.ann, acc)
        _collect_types(node.subject, acc)
    elif isinstance(node, ActiveCheck):
        _collect_types(node.tgt, acc)
        _collect_types(node.current, acc)
    elif isinstance(node, CoercionStack):
        _collect_types(node.tgt, acc)
        for entry in node.pending:
            acc.setdefault(canon(entry.ref), entry.ref)
        _collect_types(node.current, acc)
    elif isinstance(node, Cond):
        _collect_types(node.guard, acc)
        _collect_types(node.then, acc)
        _collect_types(node.orelse, acc)
    else:
        raise TypeError(f"types_of: not a term or type: {node!r}")


def _collect_ann_types(ann: Annotation, acc: dict[str, Type]) -> None:
    if isinstance(ann, EmptyAnn):
        return
    if isinstance(ann, Types):
        for t in ann.types:
            _collect_types(t, acc)
        return
    _collect_coercion_types(ann.coercion, acc)


def _collect_coercion_types(c: Coercion, acc: dict[str, Type]) -> None:
    # A refinement-list entry contributes the refinement itself, nothing more.
    if isinstance(c, Refs):
        for entry in c.entries:
            acc.setdefault(canon(entry.ref), entry.ref)
    else:
        _collect_coercion_types(c.dom, acc)
        _collect_coercion_types(c.cod, acc)


def height(t: Type) -> int:
    if isinstance(t, Refinement):
        return 1
    return 1 + max(height(t.dom), height(t.cod))


def term_size(e: Term) -> int:
    """Node count of the term proper; types and annotations are not counted."""

    size = 0
    todo: list[Term] = [e]
    while todo:
        node = todo.pop()
        size += 1
        if isinstance(node, (Var, Const, Blame)):
            continue
        if isinstance(node, (Abs, Fix)):
            todo.append(node.body)
        elif isinstance(node, App):
            todo.append(node.fn)
            todo.append(node.arg)
        elif isinstance(node, Op):
            todo.extend(node.args)
        elif isinstance(node, Cast):
            todo.append(node.subject)
        elif isinstance(node, (ActiveCheck, CoercionStack)):
            todo.append(node.current)
            todo.append(node.scrutinee)
        elif isinstance(node, Cond):
            todo.append(node.guard)
            todo.append(node.then)
            todo.append(node.orelse)
        else:
            raise TypeError(f"term_size: not a term: {node!r}")
    return size
