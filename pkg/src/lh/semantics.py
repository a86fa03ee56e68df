"""Mode-indexed small-step machine.

One shared syntax, four semantics: classic checks everything and merges
nothing, forgetful drops intermediate casts, heedful accumulates type sets,
eidetic compiles casts to coercions and drains them on a stack.

`step` is the reference stepper: it finds the unique redex by recursion from
the root and reports the rule that fired.  `Machine.eval` runs the same rules
over an explicit context stack so long traces cost amortized constant work
per step instead of a root-to-redex walk; an optional meter observes every
transition for space accounting.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .syntax import (
    Abs,
    ActiveCheck,
    App,
    Blame,
    Cast,
    Coerce,
    Coercion,
    CoercionStack,
    Cond,
    Const,
    EmptyAnn,
    EMPTY_ANN,
    EMPTY_SET,
    Fix,
    Fun,
    FunC,
    Label,
    Mode,
    Op,
    RefEntry,
    Refinement,
    Refs,
    Status,
    Term,
    Type,
    TypeSet,
    Types,
    Var,
    alpha_eq,
    canon,
    subst,
)

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1


# ---------------------------------------------------------------------------
# Implication oracle


@dataclass(frozen=True)
class ImplicationOracle:
    """Decidable pre-order on refinements; adequacy is assumed, not checked."""

    name: str
    decide: Callable[[Refinement, Refinement], bool]


DEFAULT_ORACLE = ImplicationOracle("alpha-eq", alpha_eq)


def axiom_oracle(axioms: list[tuple[Refinement, Refinement]], name: str = "axioms") -> ImplicationOracle:
    """Close a finite axiom list under reflexivity and transitivity."""

    edges: dict[str, set[str]] = {}
    for lhs, rhs in axioms:
        edges.setdefault(canon(lhs), set()).add(canon(rhs))
    # transitive closure over the finitely many mentioned types
    changed = True
    while changed:
        changed = False
        for src, outs in edges.items():
            extra = set().union(*(edges.get(t, set()) for t in outs)) - outs
            if extra:
                outs |= extra
                changed = True

    def decide(t1: Refinement, t2: Refinement) -> bool:
        if alpha_eq(t1, t2):
            return True
        return canon(t2) in edges.get(canon(t1), ())

    return ImplicationOracle(name, decide)


def implies(oracle: ImplicationOracle, t1: Refinement, t2: Refinement) -> bool:
    assert t1.base is t2.base, "implication is only defined at a single base type"
    return oracle.decide(t1, t2)


# ---------------------------------------------------------------------------
# choose


def _printed(t: Type) -> str:
    from .surface import print_type

    return print_type(t)


def choose_lex_min(s: TypeSet) -> Type:
    if not len(s):
        raise ValueError("choose: empty type set")
    return min(s.members, key=_printed)


def choose_lex_max(s: TypeSet) -> Type:
    if not len(s):
        raise ValueError("choose: empty type set")
    return max(s.members, key=_printed)


CHOOSE_POLICIES: dict[str, Callable[[TypeSet], Type]] = {
    "lex-min": choose_lex_min,
    "lex-max": choose_lex_max,
}


def choose(s: TypeSet, policy: str = "lex-min") -> Type:
    return CHOOSE_POLICIES[policy](s)


# ---------------------------------------------------------------------------
# Annotation algebra


def split_annotation(ann) -> tuple:
    """dom/cod of a cast annotation, for unwrapping function proxies."""

    if isinstance(ann, EmptyAnn):
        return EMPTY_ANN, EMPTY_ANN
    if isinstance(ann, Types):
        doms, cods = [], []
        for t in ann.types:
            assert isinstance(t, Fun), "split_annotation: type-set member is not a function type"
            doms.append(t.dom)
            cods.append(t.cod)
        return Types(TypeSet.of(doms)), Types(TypeSet.of(cods))
    assert isinstance(ann.coercion, FunC), "split_annotation: coercion is not a function coercion"
    return Coerce(ann.coercion.dom), Coerce(ann.coercion.cod)


def coerce(t1: Type, t2: Type, label: str) -> Coercion:
    """Compile the cast <t1 => t2>^label to the coercion doing the same checks."""

    if isinstance(t1, Refinement) and isinstance(t2, Refinement):
        return Refs((RefEntry(t2, label),))
    if isinstance(t1, Fun) and isinstance(t2, Fun):
        return FunC(coerce(t2.dom, t1.dom, label), coerce(t1.cod, t2.cod, label))
    raise ValueError("coerce: dissimilar types")


def ref_drop(entries: tuple[RefEntry, ...], t: Refinement, oracle: ImplicationOracle = DEFAULT_ORACLE) -> tuple[RefEntry, ...]:
    """r \\ t: remove every entry whose refinement is implied by t."""

    return tuple(e for e in entries if not implies(oracle, t, e.ref))


def merge_refs(
    r1: tuple[RefEntry, ...], r2: tuple[RefEntry, ...], oracle: ImplicationOracle = DEFAULT_ORACLE
) -> tuple[RefEntry, ...]:
    if not r1:
        return r2
    head, rest = r1[0], r1[1:]
    return (head,) + ref_drop(merge_refs(rest, r2, oracle), head.ref, oracle)


def coercion_merge(c1: Coercion, c2: Coercion, oracle: ImplicationOracle = DEFAULT_ORACLE) -> Coercion:
    """c1 |> c2: compose checking plans, keeping the leftmost label on collisions."""

    if isinstance(c1, Refs) and isinstance(c2, Refs):
        return Refs(merge_refs(c1.entries, c2.entries, oracle))
    if isinstance(c1, FunC) and isinstance(c2, FunC):
        return FunC(coercion_merge(c2.dom, c1.dom, oracle), coercion_merge(c1.cod, c2.cod, oracle))
    raise ValueError("coercion_merge: mismatched coercion shapes")


def merge(mode: Mode, t1: Type, a1, t2: Type, a2, t3: Type, oracle: ImplicationOracle = DEFAULT_ORACLE):
    """Merge the annotations of two adjacent casts, or None where undefined."""

    if mode is Mode.FORGETFUL and isinstance(a1, EmptyAnn) and isinstance(a2, EmptyAnn):
        return EMPTY_ANN
    if mode is Mode.HEEDFUL and isinstance(a1, Types) and isinstance(a2, Types):
        return Types(a1.types.union(a2.types).add(t2))
    if mode is Mode.EIDETIC and isinstance(a1, Coerce) and isinstance(a2, Coerce):
        return Coerce(coercion_merge(a1.coercion, a2.coercion, oracle))
    return None


def status_join(s: Status, e_target: Term, e_popped: Term) -> Status:
    if s is Status.CHECKED:
        return Status.CHECKED
    return Status.CHECKED if alpha_eq(e_target, e_popped) else Status.UNCHECKED


# ---------------------------------------------------------------------------
# Operation denotations


class OpUndefined(Exception):
    """The denotation excludes these arguments (e.g. division by zero)."""


class OverflowFault(Exception):
    """64-bit signed overflow; a runtime fault distinct from blame."""


def _want_int(v) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise OpUndefined("integer argument expected")
    return v


def _want_bool(v) -> bool:
    if not isinstance(v, bool):
        raise OpUndefined("boolean argument expected")
    return v


def _clamp(n: int) -> int:
    if n < INT_MIN or n > INT_MAX:
        raise OverflowFault(str(n))
    return n


_DENOTATIONS: dict[str, Callable] = {
    "not": lambda a: not _want_bool(a),
    "&&": lambda a, b: _want_bool(a) and _want_bool(b),
    "||": lambda a, b: _want_bool(a) or _want_bool(b),
    "=": lambda a, b: _want_int(a) == _want_int(b),
    "<>": lambda a, b: _want_int(a) != _want_int(b),
    "<": lambda a, b: _want_int(a) < _want_int(b),
    "<=": lambda a, b: _want_int(a) <= _want_int(b),
    ">": lambda a, b: _want_int(a) > _want_int(b),
    ">=": lambda a, b: _want_int(a) >= _want_int(b),
    "+": lambda a, b: _clamp(_want_int(a) + _want_int(b)),
    "-": lambda a, b: _clamp(_want_int(a) - _want_int(b)),
    "*": lambda a, b: _clamp(_want_int(a) * _want_int(b)),
    "mod": lambda a, b: _mod(_want_int(a), _want_int(b)),
    "div": lambda a, b: _div(_want_int(a), _want_int(b)),
}


def _mod(a: int, b: int) -> int:
    if b == 0:
        raise OpUndefined("mod by zero")
    return a % b


def _div(a: int, b: int) -> int:
    if b == 0:
        raise OpUndefined("division by zero")
    return _clamp(a // b)


OP_NAMES = tuple(_DENOTATIONS)


def apply_op(name: str, args: list[Const]) -> Const:
    """The mathematical denotation; partial exactly where the signature says so."""

    fn = _DENOTATIONS.get(name)
    if fn is None:
        raise OpUndefined(f"unknown operation {name!r}")
    return Const(fn(*(a.value for a in args)))


# ---------------------------------------------------------------------------
# Step outcomes


@dataclass(frozen=True)
class Stepped:
    term: Term
    rule: str


@dataclass(frozen=True)
class IsValue:
    pass


@dataclass(frozen=True)
class IsBlame:
    label: Label


@dataclass(frozen=True)
class Stuck:
    reason: str


StepOutcome = Union[Stepped, IsValue, IsBlame, Stuck]


class OutcomeKind(enum.Enum):
    VALUE = "value"
    BLAME = "blame"
    BUDGET = "budget-exceeded"
    STUCK = "stuck"


@dataclass(frozen=True)
class TraceStep:
    index: int
    rule: str
    term: Term


@dataclass(frozen=True)
class Outcome:
    kind: OutcomeKind
    term: Optional[Term] = None
    label: Label = None
    steps: int = 0
    stuck_reason: Optional[str] = None
    trace: Optional[tuple[TraceStep, ...]] = None
    initial: Optional[Term] = None

    def trace_terms(self) -> list[Term]:
        assert self.trace is not None and self.initial is not None
        return [self.initial] + [s.term for s in self.trace]


# ---------------------------------------------------------------------------
# Evaluation frames (one per congruence rule)


@dataclass
class FAppL:
    orig: App

    def rebuild(self, child: Term) -> Term:
        return self.orig if child is self.orig.fn else App(child, self.orig.arg)


@dataclass
class FAppR:
    orig: App

    def rebuild(self, child: Term) -> Term:
        return self.orig if child is self.orig.arg else App(self.orig.fn, child)


@dataclass
class FOp:
    orig: Op
    index: int

    def rebuild(self, child: Term) -> Term:
        if child is self.orig.args[self.index]:
            return self.orig
        args = list(self.orig.args)
        args[self.index] = child
        return Op(self.orig.name, tuple(args))


@dataclass
class FCond:
    orig: Cond

    def rebuild(self, child: Term) -> Term:
        return self.orig if child is self.orig.guard else Cond(child, self.orig.then, self.orig.orelse)


@dataclass
class FCastSub:
    orig: Cast

    def rebuild(self, child: Term) -> Term:
        if child is self.orig.subject:
            return self.orig
        c = self.orig
        return Cast(c.src, c.ann, c.tgt, c.label, child)


@dataclass
class FCheck:
    orig: ActiveCheck

    def rebuild(self, child: Term) -> Term:
        if child is self.orig.current:
            return self.orig
        c = self.orig
        return ActiveCheck(c.tgt, child, c.scrutinee, c.label)


@dataclass
class FStack:
    orig: CoercionStack

    def rebuild(self, child: Term) -> Term:
        if child is self.orig.current:
            return self.orig
        c = self.orig
        return CoercionStack(c.tgt, c.status, c.pending, c.scrutinee, child)


Frame = Union[FAppL, FAppR, FOp, FCond, FCastSub, FCheck, FStack]


def frame_siblings(frame: Frame) -> tuple[Term, ...]:
    """Term children of the frame's node other than the hole."""

    if isinstance(frame, FAppL):
        return (frame.orig.arg,)
    if isinstance(frame, FAppR):
        return (frame.orig.fn,)
    if isinstance(frame, FOp):
        return tuple(a for i, a in enumerate(frame.orig.args) if i != frame.index)
    if isinstance(frame, FCond):
        return (frame.orig.then, frame.orig.orelse)
    if isinstance(frame, FCastSub):
        return ()
    return (frame.orig.scrutinee,)


# Local decisions, shared by the reference stepper and the machine.

_DESCEND = "descend"
_STEP = "step"
_VALUE = "value"
_BLAME = "blame"
_STUCK = "stuck"

_RAISE_RULE = {
    FAppL: "E-AppRaiseL",
    FAppR: "E-AppRaiseR",
    FOp: "E-OpRaise",
    FCond: "E-IfRaise",
    FCastSub: "E-CastRaise",
    FCheck: "E-CheckRaise",
    FStack: "E-StackRaise",
}


class Machine:
    """One evaluator: a mode plus its implication oracle and choose policy."""

    def __init__(
        self,
        mode: Mode,
        oracle: ImplicationOracle = DEFAULT_ORACLE,
        choose_policy: str = "lex-min",
    ):
        self.mode = mode
        self.oracle = oracle
        self.choose_policy = choose_policy

    # -- value judgment

    def is_value(self, e: Term) -> bool:
        if isinstance(e, (Const, Abs)):
            return True
        if not isinstance(e, Cast):
            return False
        if not (isinstance(e.src, Fun) and isinstance(e.tgt, Fun)):
            return False
        m = self.mode
        if m is Mode.CLASSIC:
            return isinstance(e.ann, EmptyAnn) and (isinstance(e.subject, Abs) or self.is_value(e.subject))
        if m is Mode.FORGETFUL:
            return isinstance(e.ann, EmptyAnn) and isinstance(e.subject, Abs)
        if m is Mode.HEEDFUL:
            return isinstance(e.ann, Types) and isinstance(e.subject, Abs)
        return (
            isinstance(e.ann, Coerce)
            and isinstance(e.ann.coercion, FunC)
            and e.label is None
            and isinstance(e.subject, Abs)
        )

    def is_result(self, e: Term) -> bool:
        return isinstance(e, Blame) or self.is_value(e)

    # -- local dispatch: what happens at this node, ignoring its context

    def _local(self, e: Term):
        if isinstance(e, Const) or isinstance(e, Abs):
            return (_VALUE,)
        if isinstance(e, Blame):
            return (_BLAME, e.label)
        if isinstance(e, Var):
            return (_STUCK, f"free variable {e.name!r}")
        if isinstance(e, Fix):
            return (_STEP, subst(e.body, e.binder, e), "E-Fix")
        if isinstance(e, App):
            if isinstance(e.fn, Blame):
                return (_STEP, Blame(e.fn.label), "E-AppRaiseL")
            if not self.is_value(e.fn):
                return (_DESCEND, FAppL(e), e.fn)
            if isinstance(e.arg, Blame):
                return (_STEP, Blame(e.arg.label), "E-AppRaiseR")
            if not self.is_value(e.arg):
                return (_DESCEND, FAppR(e), e.arg)
            if isinstance(e.fn, Abs):
                return (_STEP, subst(e.fn.body, e.fn.binder, e.arg), "E-Beta")
            if isinstance(e.fn, Cast):
                return (_STEP, self._unwrap(e.fn, e.arg), "E-Unwrap")
            return (_STUCK, "application of a non-function value")
        if isinstance(e, Op):
            for i, arg in enumerate(e.args):
                if isinstance(arg, Blame):
                    return (_STEP, Blame(arg.label), "E-OpRaise")
                if not self.is_value(arg):
                    return (_DESCEND, FOp(e, i), arg)
            if not all(isinstance(a, Const) for a in e.args):
                return (_STUCK, f"operation {e.name!r} applied to a non-constant")
            try:
                return (_STEP, apply_op(e.name, list(e.args)), "E-Op")
            except OpUndefined as exc:
                return (_STUCK, f"operation {e.name!r} undefined: {exc}")
            except OverflowFault:
                return (_STUCK, f"integer overflow in {e.name!r}")
        if isinstance(e, Cond):
            if isinstance(e.guard, Blame):
                return (_STEP, Blame(e.guard.label), "E-IfRaise")
            if not self.is_value(e.guard):
                return (_DESCEND, FCond(e), e.guard)
            if isinstance(e.guard, Const) and e.guard.value is True:
                return (_STEP, e.then, "E-IfTrue")
            if isinstance(e.guard, Const) and e.guard.value is False:
                return (_STEP, e.orelse, "E-IfFalse")
            return (_STUCK, "conditional guard is not a boolean")
        if isinstance(e, Cast):
            return self._local_cast(e)
        if isinstance(e, ActiveCheck):
            cur = e.current
            if isinstance(cur, Const) and cur.value is True:
                return (_STEP, e.scrutinee, "E-CheckOK")
            if isinstance(cur, Const) and cur.value is False:
                return (_STEP, Blame(e.label), "E-CheckFail")
            if isinstance(cur, Blame):
                return (_STEP, Blame(cur.label), "E-CheckRaise")
            if not self.is_value(cur):
                return (_DESCEND, FCheck(e), cur)
            return (_STUCK, "active check reduced to a non-boolean value")
        if isinstance(e, CoercionStack):
            cur = e.current
            if isinstance(cur, Blame):
                return (_STEP, Blame(cur.label), "E-StackRaise")
            if isinstance(cur, Const):
                if e.pending:
                    return (_STEP, self._stack_pop(e), "E-StackPop")
                return (_STEP, cur, "E-StackDone")
            if not self.is_value(cur):
                return (_DESCEND, FStack(e), cur)
            return (_STUCK, "coercion stack reduced to a non-constant value")
        return (_STUCK, f"unknown term {type(e).__name__}")

    def _local_cast(self, e: Cast):
        m = self.mode
        # 1. annotate source casts first
        if isinstance(e.ann, EmptyAnn):
            if m is Mode.HEEDFUL:
                return (_STEP, Cast(e.src, Types(EMPTY_SET), e.tgt, e.label, e.subject), "E-TypeSet")
            if m is Mode.EIDETIC:
                if e.label is None:
                    return (_STUCK, "eidetic cast with empty annotation and empty label")
                ann = Coerce(coerce(e.src, e.tgt, e.label))
                return (_STEP, Cast(e.src, ann, e.tgt, None, e.subject), "E-Coerce")
        # 2. raise blame out of the subject
        if isinstance(e.subject, Blame):
            return (_STEP, Blame(e.subject.label), "E-CastRaise")
        # 3. merge adjacent casts whenever the mode can
        if isinstance(e.subject, Cast):
            inner = e.subject
            merged = merge(m, inner.src, inner.ann, inner.tgt, e.ann, e.tgt, self.oracle)
            if merged is not None:
                return (_STEP, Cast(inner.src, merged, e.tgt, e.label, inner.subject), "E-CastMergeE")
        # 4. otherwise step the subject
        if not self.is_value(e.subject):
            return (_DESCEND, FCastSub(e), e.subject)
        # 5. subject is a value: check, stack, or stand as a proxy
        return self._cast_on_value(e)

    def _cast_on_value(self, e: Cast):
        m = self.mode
        if isinstance(e.src, Refinement) and isinstance(e.tgt, Refinement):
            if not isinstance(e.subject, Const):
                return (_STUCK, "refinement cast over a non-constant value")
            k = e.subject
            if isinstance(e.ann, EmptyAnn):
                if m in (Mode.CLASSIC, Mode.FORGETFUL):
                    return (_STEP, self._start_check(e.tgt, k, e.label), "E-CheckNoneC")
                return (_STUCK, "unannotated refinement cast in an annotating mode")
            if isinstance(e.ann, Types):
                if m is not Mode.HEEDFUL:
                    return (_STUCK, "type-set annotation outside heedful mode")
                if not len(e.ann.types):
                    return (_STEP, self._start_check(e.tgt, k, e.label), "E-CheckEmpty")
                chosen = choose(e.ann.types, self.choose_policy)
                assert isinstance(chosen, Refinement)
                rest = e.ann.types.remove(chosen)
                check = self._start_check(chosen, k, e.label)
                return (_STEP, Cast(chosen, Types(rest), e.tgt, e.label, check), "E-CheckSet")
            if m is not Mode.EIDETIC:
                return (_STUCK, "coercion annotation outside eidetic mode")
            if not isinstance(e.ann.coercion, Refs):
                return (_STUCK, "function coercion on a refinement cast")
            stack = CoercionStack(e.tgt, Status.UNCHECKED, e.ann.coercion.entries, k, k)
            return (_STEP, stack, "E-CoerceStack")
        if isinstance(e.src, Fun) and isinstance(e.tgt, Fun):
            if self.is_value(e):
                return (_VALUE,)
            return (_STUCK, "function cast over an inadmissible value")
        return (_STUCK, "cast between dissimilar types")

    @staticmethod
    def _start_check(tgt: Refinement, k: Const, label: Label) -> ActiveCheck:
        return ActiveCheck(tgt, subst(tgt.predicate, tgt.binder, k), k, label)

    def _stack_pop(self, e: CoercionStack) -> CoercionStack:
        head, rest = e.pending[0], e.pending[1:]
        popped_pred = head.ref.predicate
        if head.ref.binder != e.tgt.binder:
            popped_pred = subst(popped_pred, head.ref.binder, Var(e.tgt.binder))
        status = status_join(e.status, e.tgt.predicate, popped_pred)
        check = self._start_check(head.ref, e.scrutinee, head.label)
        return CoercionStack(e.tgt, status, rest, e.scrutinee, check)

    def _unwrap(self, proxy: Cast, arg: Term) -> Term:
        assert isinstance(proxy.src, Fun) and isinstance(proxy.tgt, Fun)
        dom_ann, cod_ann = split_annotation(proxy.ann)
        inner = Cast(proxy.tgt.dom, dom_ann, proxy.src.dom, proxy.label, arg)
        return Cast(proxy.src.cod, cod_ann, proxy.tgt.cod, proxy.label, App(proxy.subject, inner))

    # -- reference stepper

    def step(self, e: Term) -> StepOutcome:
        act = self._local(e)
        tag = act[0]
        if tag == _VALUE:
            return IsValue()
        if tag == _BLAME:
            return IsBlame(act[1])
        if tag == _STUCK:
            return Stuck(act[1])
        if tag == _STEP:
            return Stepped(act[1], act[2])
        # descend: step the child, then either rebuild or fire the raise rule
        frame, child = act[1], act[2]
        inner = self.step(child)
        if isinstance(inner, Stepped):
            return Stepped(frame.rebuild(inner.term), inner.rule)
        if isinstance(inner, IsBlame):
            return Stepped(frame.rebuild(Blame(inner.label)), _RAISE_RULE[type(frame)])
        if isinstance(inner, Stuck):
            return inner
        raise AssertionError("descend target was a value")

    # -- machine evaluation

    def eval(self, e: Term, budget: int, trace: bool = False, meter=None) -> Outcome:
        frames: list[Frame] = []
        focus = e
        steps = 0
        trace_steps: list[TraceStep] = []
        if meter is not None:
            meter.init(focus)
        while True:
            act = self._local(focus)
            tag = act[0]
            if tag == _DESCEND:
                frame, child = act[1], act[2]
                frames.append(frame)
                if meter is not None:
                    meter.push(frame, child)
                focus = child
                continue
            if tag == _STEP:
                if steps >= budget:
                    return Outcome(OutcomeKind.BUDGET, steps=steps, initial=e, trace=tuple(trace_steps) if trace else None)
                new, rule = act[1], act[2]
                if meter is not None:
                    meter.replace(focus, new)
                focus = new
                steps += 1
                if meter is not None:
                    meter.record(rule, focus)
                if trace:
                    whole = focus
                    for fr in reversed(frames):
                        whole = fr.rebuild(whole)
                    trace_steps.append(TraceStep(steps, rule, whole))
                if frames and isinstance(frames[-1], FCastSub):
                    # the parent cast may now be able to merge or raise
                    frame = frames.pop()
                    rebuilt = frame.rebuild(focus)
                    if meter is not None:
                        meter.pop(frame, focus, rebuilt)
                    focus = rebuilt
                continue
            if tag in (_VALUE, _BLAME):
                if frames:
                    frame = frames.pop()
                    rebuilt = frame.rebuild(focus)
                    if meter is not None:
                        meter.pop(frame, focus, rebuilt)
                    focus = rebuilt
                    continue
                common = dict(steps=steps, initial=e, trace=tuple(trace_steps) if trace else None)
                if tag == _VALUE:
                    return Outcome(OutcomeKind.VALUE, term=focus, **common)
                return Outcome(OutcomeKind.BLAME, label=act[1], **common)
            return Outcome(
                OutcomeKind.STUCK,
                steps=steps,
                stuck_reason=act[1],
                initial=e,
                trace=tuple(trace_steps) if trace else None,
            )


_DEFAULT_MACHINES: dict[Mode, Machine] = {}


def machine(mode: Mode) -> Machine:
    if mode not in _DEFAULT_MACHINES:
        _DEFAULT_MACHINES[mode] = Machine(mode)
    return _DEFAULT_MACHINES[mode]


def step(mode: Mode, e: Term) -> StepOutcome:
    return machine(mode).step(e)


def eval_term(mode: Mode, e: Term, budget: int = 100_000, trace: bool = False) -> Outcome:
    return machine(mode).eval(e, budget, trace=trace)
