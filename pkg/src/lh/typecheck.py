"""Mode-indexed type system.

Bidirectional: `infer` synthesizes where the syntax determines the type and
`check` pushes expected types down to the places where typing is not
syntax-directed (constants against refinements, blame, branches).  The
runtime rules for active checks and coercion stacks replay predicate
evaluation with a step budget, so re-typechecking whole traces is decidable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from . import semantics
from .semantics import DEFAULT_ORACLE, ImplicationOracle, OutcomeKind, implies
from .syntax import (
    ALL_MODES,
    Abs,
    ActiveCheck,
    App,
    BaseType,
    Blame,
    Cast,
    Coerce,
    Coercion,
    CoercionStack,
    Cond,
    Const,
    EmptyAnn,
    Fix,
    Fun,
    FunC,
    Mode,
    Op,
    Refinement,
    Refs,
    Status,
    Term,
    Type,
    Types,
    Var,
    alpha_eq,
    canon,
    is_raw,
    raw,
    subst,
)

PREDICATE_BUDGET = 10_000

ErrorKind = str  # one of the kinds below

NOT_SIMILAR = "NotSimilar"
ILL_FORMED_TYPE = "IllFormedType"
ILL_FORMED_ANNOTATION = "IllFormedAnnotation"
UNBOUND_VAR = "UnboundVar"
NOT_A_FUNCTION = "NotAFunction"
OP_ARITY = "OpArity"
PREDICATE_NOT_BOOL = "PredicateNotBool"
SOURCE_VIOLATION = "SourceViolation"


class TypeCheckError(Exception):
    def __init__(self, kind: ErrorKind, path: str, detail: str):
        super().__init__(f"{kind} at {path or '<top>'}: {detail}")
        self.kind = kind
        self.path = path
        self.detail = detail


# ---------------------------------------------------------------------------
# Operation and constant signatures

RAW_INT = raw(BaseType.INT)
RAW_BOOL = raw(BaseType.BOOL)
NONZERO = Refinement("y", BaseType.INT, Op("<>", (Var("y"), Const(0))))

_OP_SIGS: dict[str, tuple[tuple[Refinement, ...], Refinement]] = {
    "not": ((RAW_BOOL,), RAW_BOOL),
    "&&": ((RAW_BOOL, RAW_BOOL), RAW_BOOL),
    "||": ((RAW_BOOL, RAW_BOOL), RAW_BOOL),
    "=": ((RAW_INT, RAW_INT), RAW_BOOL),
    "<>": ((RAW_INT, RAW_INT), RAW_BOOL),
    "<": ((RAW_INT, RAW_INT), RAW_BOOL),
    "<=": ((RAW_INT, RAW_INT), RAW_BOOL),
    ">": ((RAW_INT, RAW_INT), RAW_BOOL),
    ">=": ((RAW_INT, RAW_INT), RAW_BOOL),
    "+": ((RAW_INT, RAW_INT), RAW_INT),
    "-": ((RAW_INT, RAW_INT), RAW_INT),
    "*": ((RAW_INT, RAW_INT), RAW_INT),
    # the domain refinements exactly guard the denotation's partiality
    "div": ((RAW_INT, NONZERO), RAW_INT),
    "mod": ((RAW_INT, NONZERO), RAW_INT),
}


def op_signature(name: str) -> tuple[tuple[Refinement, ...], Refinement]:
    if name not in _OP_SIGS:
        raise TypeCheckError(OP_ARITY, "", f"unknown operation {name!r}")
    return _OP_SIGS[name]


def signatures(name: Union[str, bool, int]) -> Union[Type, BaseType]:
    """ty(op) as a first-order type, or ty(k) as a base type."""

    if isinstance(name, bool) or name in ("true", "false"):
        return BaseType.BOOL
    if isinstance(name, int):
        return BaseType.INT
    doms, cod = op_signature(name)
    t: Type = cod
    for d in reversed(doms):
        t = Fun(d, t)
    return t


# ---------------------------------------------------------------------------
# Similarity


def similar(t1: Type, t2: Type) -> bool:
    """Same simple-type skeleton: the precondition for casting."""

    if isinstance(t1, Refinement) and isinstance(t2, Refinement):
        return t1.base is t2.base
    if isinstance(t1, Fun) and isinstance(t2, Fun):
        return similar(t1.dom, t2.dom) and similar(t1.cod, t2.cod)
    return False


# ---------------------------------------------------------------------------
# Checker

_PREMISE_CACHE: dict[tuple[Mode, str], Union[bool, str]] = {}
_REPLAY_CACHE: dict[tuple[Mode, str, str], Union[bool, str]] = {}


@dataclass
class Checker:
    mode: Mode
    source: bool = False
    oracle: ImplicationOracle = DEFAULT_ORACLE
    budget: int = PREDICATE_BUDGET

    # -- premise evaluation

    def _evals_true(self, instance: Term, path: str) -> bool:
        key = (self.mode, canon(instance))
        hit = _PREMISE_CACHE.get(key)
        if hit is None:
            outcome = semantics.machine(self.mode).eval(instance, self.budget)
            if outcome.kind is OutcomeKind.BUDGET:
                hit = "budget"
            else:
                hit = outcome.kind is OutcomeKind.VALUE and isinstance(outcome.term, Const) and outcome.term.value is True
            _PREMISE_CACHE[key] = hit
        if hit == "budget":
            raise TypeCheckError(NOT_SIMILAR, path, "predicate evaluation exceeded the step budget")
        return bool(hit)

    def _reaches(self, start: Term, goal: Term, path: str) -> bool:
        key = (self.mode, canon(start), canon(goal))
        hit = _REPLAY_CACHE.get(key)
        if hit is None:
            hit = self._replay(start, goal)
            _REPLAY_CACHE[key] = hit
        if hit == "budget":
            raise TypeCheckError(NOT_SIMILAR, path, "predicate replay exceeded the step budget")
        return bool(hit)

    def _replay(self, start: Term, goal: Term) -> Union[bool, str]:
        mach = semantics.machine(self.mode)
        term = start
        for _ in range(self.budget):
            if alpha_eq(term, goal):
                return True
            out = mach.step(term)
            if isinstance(out, semantics.Stepped):
                term = out.term
                continue
            if isinstance(out, semantics.IsBlame):
                return isinstance(goal, Blame) and goal.label == term.label
            return alpha_eq(term, goal)
        return "budget"

    # -- well-formedness

    def wf_type(self, t: Type, path: str = "") -> None:
        if isinstance(t, Refinement):
            if is_raw(t):
                return  # WF-Base: raw types are axiomatically well formed
            pred_t = self._infer({t.binder: raw(t.base)}, t.predicate, path + "/pred", source=False)
            if not (isinstance(pred_t, Refinement) and pred_t.base is BaseType.BOOL):
                raise TypeCheckError(PREDICATE_NOT_BOOL, path, "refinement predicate is not boolean")
            return
        self.wf_type(t.dom, path + "/dom")
        self.wf_type(t.cod, path + "/cod")

    def wf_annotation(self, ann, t1: Type, t2: Type, path: str = "") -> None:
        self.wf_type(t1, path + "/src")
        self.wf_type(t2, path + "/tgt")
        if not similar(t1, t2):
            raise TypeCheckError(NOT_SIMILAR, path, "cast between dissimilar types")
        if isinstance(ann, EmptyAnn):
            return
        if isinstance(ann, Types):
            if self.mode is not Mode.HEEDFUL:
                raise TypeCheckError(ILL_FORMED_ANNOTATION, path, "type-set annotation outside heedful mode")
            for t in ann.types:
                self.wf_type(t, path + "/set")
                if not similar(t, t1):
                    raise TypeCheckError(ILL_FORMED_ANNOTATION, path, "type-set member dissimilar to the cast")
            return
        if self.mode is not Mode.EIDETIC:
            raise TypeCheckError(ILL_FORMED_ANNOTATION, path, "coercion annotation outside eidetic mode")
        self._wf_coercion(ann.coercion, t1, t2, path)

    def _wf_coercion(self, c: Coercion, t1: Type, t2: Type, path: str) -> None:
        if isinstance(c, Refs):
            if not (isinstance(t1, Refinement) and isinstance(t2, Refinement)):
                raise TypeCheckError(ILL_FORMED_ANNOTATION, path, "refinement list on a function cast")
            seen: set[str] = set()
            for entry in c.entries:
                if not (isinstance(entry.ref, Refinement) and entry.ref.base is t2.base):
                    raise TypeCheckError(ILL_FORMED_ANNOTATION, path, "refinement list entry at the wrong base type")
                self.wf_type(entry.ref, path + "/entry")
                key = canon(entry.ref)
                if key in seen:
                    raise TypeCheckError(ILL_FORMED_ANNOTATION, path, "duplicate refinement in list")
                seen.add(key)
            if not any(implies(self.oracle, entry.ref, t2) for entry in c.entries):
                raise TypeCheckError(ILL_FORMED_ANNOTATION, path, "no entry implies the target refinement")
            return
        if not (isinstance(t1, Fun) and isinstance(t2, Fun)):
            raise TypeCheckError(ILL_FORMED_ANNOTATION, path, "function coercion on a refinement cast")
        self._wf_coercion(c.dom, t2.dom, t1.dom, path + "/dom")
        self._wf_coercion(c.cod, t1.cod, t2.cod, path + "/cod")

    # -- typing

    def infer(self, env: Mapping[str, Type], e: Term, path: str = "") -> Type:
        return self._infer(dict(env), e, path, self.source)

    def check(self, env: Mapping[str, Type], e: Term, t: Type, path: str = "") -> None:
        self._check(dict(env), e, t, path, self.source)

    def _infer(self, env: dict[str, Type], e: Term, path: str, source: bool) -> Type:
        if isinstance(e, Var):
            if e.name not in env:
                raise TypeCheckError(UNBOUND_VAR, path, f"unbound variable {e.name!r}")
            return env[e.name]
        if isinstance(e, Const):
            return raw(e.base)
        if isinstance(e, Abs):
            self.wf_type(e.annot, path + "/annot")
            body_t = self._infer({**env, e.binder: e.annot}, e.body, path + "/body", source)
            return Fun(e.annot, body_t)
        if isinstance(e, Fix):
            self.wf_type(e.annot, path + "/annot")
            self._check({**env, e.binder: e.annot}, e.body, e.annot, path + "/body", source)
            return e.annot
        if isinstance(e, App):
            fn_t = self._infer(env, e.fn, path + "/fn", source)
            if not isinstance(fn_t, Fun):
                raise TypeCheckError(NOT_A_FUNCTION, path, "application of a non-function")
            self._check(env, e.arg, fn_t.dom, path + "/arg", source)
            return fn_t.cod
        if isinstance(e, Op):
            doms, cod = op_signature(e.name)
            if len(doms) != len(e.args):
                raise TypeCheckError(OP_ARITY, path, f"{e.name!r} expects {len(doms)} arguments")
            for i, (arg, dom) in enumerate(zip(e.args, doms)):
                self._check(env, arg, dom, f"{path}/arg{i}", source)
            return cod
        if isinstance(e, Cast):
            if source:
                if not isinstance(e.ann, EmptyAnn):
                    raise TypeCheckError(SOURCE_VIOLATION, path, "source casts carry empty annotations")
                if e.label is None:
                    raise TypeCheckError(SOURCE_VIOLATION, path, "source casts carry named blame labels")
            self.wf_annotation(e.ann, e.src, e.tgt, path)
            self._check(env, e.subject, e.src, path + "/subject", source)
            return e.tgt
        if isinstance(e, Cond):
            self._check_guard(env, e.guard, path + "/guard", source)
            try:
                t = self._infer(env, e.then, path + "/then", source)
            except TypeCheckError:
                t = self._infer(env, e.orelse, path + "/else", source)
                self._check(env, e.then, t, path + "/then", source)
                return t
            self._check(env, e.orelse, t, path + "/else", source)
            return t
        if isinstance(e, Blame):
            if source:
                raise TypeCheckError(SOURCE_VIOLATION, path, "blame is a runtime-only form")
            raise TypeCheckError(ILL_FORMED_TYPE, path, "cannot infer a type for blame")
        if isinstance(e, ActiveCheck):
            if source:
                raise TypeCheckError(SOURCE_VIOLATION, path, "active checks are runtime-only forms")
            return self._infer_check_form(e, path)
        if isinstance(e, CoercionStack):
            if source:
                raise TypeCheckError(SOURCE_VIOLATION, path, "coercion stacks are runtime-only forms")
            return self._infer_stack(e, path)
        raise TypeCheckError(ILL_FORMED_TYPE, path, f"unknown term {type(e).__name__}")

    def _check_guard(self, env: dict[str, Type], guard: Term, path: str, source: bool) -> None:
        if isinstance(guard, Blame) and not source:
            return
        t = self._infer(env, guard, path, source)
        if not (isinstance(t, Refinement) and t.base is BaseType.BOOL):
            raise TypeCheckError(PREDICATE_NOT_BOOL, path, "conditional guard is not boolean")

    def _check(self, env: dict[str, Type], e: Term, t: Type, path: str, source: bool) -> None:
        if isinstance(e, Const):
            if not isinstance(t, Refinement):
                raise TypeCheckError(NOT_SIMILAR, path, "constant checked against a function type")
            if e.base is not t.base:
                raise TypeCheckError(NOT_SIMILAR, path, "constant at the wrong base type")
            if is_raw(t):
                return
            if source:
                raise TypeCheckError(SOURCE_VIOLATION, path, "source constants have raw types")
            self.wf_type(t, path)
            if not self._evals_true(subst(t.predicate, t.binder, e), path):
                raise TypeCheckError(NOT_SIMILAR, path, "constant does not satisfy the refinement")
            return
        if isinstance(e, Blame):
            if source:
                raise TypeCheckError(SOURCE_VIOLATION, path, "blame is a runtime-only form")
            self.wf_type(t, path)
            return
        if isinstance(e, Abs) and isinstance(t, Fun):
            if not alpha_eq(e.annot, t.dom):
                raise TypeCheckError(NOT_SIMILAR, path, "lambda annotation differs from the expected domain")
            self.wf_type(e.annot, path + "/annot")
            self._check({**env, e.binder: e.annot}, e.body, t.cod, path + "/body", source)
            return
        if isinstance(e, Cond):
            self._check_guard(env, e.guard, path + "/guard", source)
            self._check(env, e.then, t, path + "/then", source)
            self._check(env, e.orelse, t, path + "/else", source)
            return
        if isinstance(e, App) and isinstance(e.fn, Abs):
            # push the expected type through the redex so substituted
            # constants can be checked against refined codomains
            self._check(env, e.fn, Fun(e.fn.annot, t), path + "/fn", source)
            self._check(env, e.arg, e.fn.annot, path + "/arg", source)
            return
        if isinstance(e, App) and isinstance(e.fn, Blame) and not source:
            # blame stands at any type, including function types
            self.wf_type(t, path)
            if not isinstance(e.arg, Blame):
                self._infer(env, e.arg, path + "/arg", source)
            return
        inferred = self._infer(env, e, path, source)
        if not alpha_eq(inferred, t):
            raise TypeCheckError(NOT_SIMILAR, path, "inferred type differs from the expected type")

    # -- runtime forms

    def _infer_check_form(self, e: ActiveCheck, path: str) -> Type:
        self.wf_type(e.tgt, path + "/tgt")
        if e.scrutinee.base is not e.tgt.base:
            raise TypeCheckError(NOT_SIMILAR, path, "active-check scrutinee at the wrong base type")
        start = subst(e.tgt.predicate, e.tgt.binder, e.scrutinee)
        if not self._reaches(start, e.current, path):
            raise TypeCheckError(NOT_SIMILAR, path, "active-check state unreachable from the predicate")
        return e.tgt

    def _infer_stack(self, e: CoercionStack, path: str) -> Type:
        self.wf_type(e.tgt, path + "/tgt")
        if e.scrutinee.base is not e.tgt.base:
            raise TypeCheckError(NOT_SIMILAR, path, "stack scrutinee at the wrong base type")
        seen: set[str] = set()
        for entry in e.pending:
            if entry.ref.base is not e.tgt.base:
                raise TypeCheckError(ILL_FORMED_ANNOTATION, path, "stack entry at the wrong base type")
            self.wf_type(entry.ref, path + "/entry")
            key = canon(entry.ref)
            if key in seen:
                raise TypeCheckError(ILL_FORMED_ANNOTATION, path, "duplicate refinement in stack")
            seen.add(key)
        if isinstance(e.current, Blame):
            pass  # a failed inner check raises out of the stack on the next step
        elif isinstance(e.current, ActiveCheck):
            if e.current.scrutinee.value != e.scrutinee.value:
                raise TypeCheckError(NOT_SIMILAR, path, "stack check on a different scrutinee")
            self._infer_check_form(e.current, path + "/current")
        elif not (isinstance(e.current, Const) and e.current.value == e.scrutinee.value):
            raise TypeCheckError(NOT_SIMILAR, path, "stack term is neither the scrutinee nor a check on it")
        if e.status is Status.UNCHECKED:
            if not any(implies(self.oracle, entry.ref, e.tgt) for entry in e.pending):
                raise TypeCheckError(ILL_FORMED_ANNOTATION, path, "unchecked target not covered by the pending list")
        else:
            # no premise while the target's own check is running or has raised
            in_flight = isinstance(e.current, Blame) or (
                isinstance(e.current, ActiveCheck) and alpha_eq(e.current.tgt, e.tgt)
            )
            if not in_flight and not self._evals_true(
                subst(e.tgt.predicate, e.tgt.binder, e.scrutinee), path
            ):
                raise TypeCheckError(NOT_SIMILAR, path, "checked status but the target predicate fails")
        return e.tgt


# ---------------------------------------------------------------------------
# Entry points


def wf_type(mode: Mode, t: Type) -> bool:
    Checker(mode).wf_type(t)
    return True


def wf_annotation(mode: Mode, ann, t1: Type, t2: Type) -> bool:
    Checker(mode).wf_annotation(ann, t1, t2)
    return True


def type_of(mode: Mode, env: Mapping[str, Type], e: Term) -> Type:
    return Checker(mode).infer(env, e)


def check_at(mode: Mode, env: Mapping[str, Type], e: Term, t: Type) -> None:
    Checker(mode).check(env, e, t)


def check_source(e: Term) -> Type:
    """Type e in all four modes under the source discipline; the results agree."""

    result: Optional[Type] = None
    for mode in ALL_MODES:
        t = Checker(mode, source=True).infer({}, e)
        if result is None:
            result = t
        elif not alpha_eq(result, t):
            raise TypeCheckError(NOT_SIMILAR, "", f"modes disagree on the program type ({mode.value})")
    assert result is not None
    return result
