"""Differential testing: generate well-typed source programs, run them under
all four modes, and check the cross-mode relationships plus per-trace
invariants (preservation, type monotonicity, merge priority).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from . import semantics
from .semantics import (
    DEFAULT_ORACLE,
    Outcome,
    OutcomeKind,
    coercion_merge,
    machine,
    merge,
)
from .surface import parse, print_term
from .syntax import (
    ALL_MODES,
    Abs,
    ActiveCheck,
    App,
    BaseType,
    Blame,
    Cast,
    Coercion,
    CoercionStack,
    Cond,
    Const,
    EMPTY_ANN,
    Fix,
    Fun,
    FunC,
    Mode,
    Op,
    RefEntry,
    Refinement,
    Refs,
    Term,
    Type,
    Var,
    alpha_eq,
    canon,
    raw,
    type_keys,
)
from .typecheck import Checker, TypeCheckError, check_source, type_of

# ---------------------------------------------------------------------------
# Named types used throughout generation

ANY = raw(BaseType.INT)
RAW_BOOL = raw(BaseType.BOOL)


def _ref(pred_src: str) -> Refinement:
    t = parse("<" + pred_src + " => " + pred_src + " @ l> 0").src
    assert isinstance(t, Refinement)
    return t


NAT = _ref("{x:Int|x >= 0}")
EVEN = _ref("{x:Int|x mod 2 = 0}")
NZ = _ref("{x:Int|x <> 0}")
POS = _ref("{x:Int|x > 0}")

INT_POOL: tuple[Refinement, ...] = (ANY, NAT, EVEN, NZ, POS)
BOOL_POOL: tuple[Refinement, ...] = (RAW_BOOL,)


# ---------------------------------------------------------------------------
# Source program generation


class _Gen:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.labels = 0

    def label(self) -> str:
        self.labels += 1
        return f"l{self.labels}"

    def pick_ref(self, base: BaseType) -> Refinement:
        pool = INT_POOL if base is BaseType.INT else BOOL_POOL
        return self.rng.choice(pool)

    def const(self, base: BaseType) -> Const:
        if base is BaseType.BOOL:
            return Const(self.rng.random() < 0.5)
        return Const(self.rng.randint(-4, 6))

    def term(self, ty: Type, fuel: int, env: list[tuple[str, Type]]) -> Term:
        rng = self.rng
        candidates = [(n, t) for n, t in env if alpha_eq(t, ty)]
        if candidates and rng.random() < 0.3:
            return Var(rng.choice(candidates)[0])
        if isinstance(ty, Fun):
            x = f"x{len(env)}"
            body = self.term(ty.cod, max(fuel - 1, 1), env + [(x, ty.dom)])
            return Abs(x, ty.dom, body)
        assert isinstance(ty, Refinement)
        if fuel <= 1:
            return self.leaf(ty, env)
        choice = rng.random()
        if choice < 0.30:
            return self.cast_into(ty, fuel, env)
        if choice < 0.45:
            return self.cast_chain(ty, fuel, env)
        if choice < 0.60 and ty.base is BaseType.INT:
            # ops synthesize raw results, so refined targets go through a cast
            body = self.op_int(fuel, env)
            if alpha_eq(ty, ANY):
                return body
            return Cast(ANY, EMPTY_ANN, ty, self.label(), body)
        if choice < 0.72:
            guard = self.term(RAW_BOOL, fuel // 3 + 1, env)
            left = self.term(ty, fuel // 2, env)
            right = self.term(ty, fuel // 2, env)
            return Cond(guard, left, right)
        if choice < 0.86:
            return self.apply_lambda(ty, fuel, env)
        if ty.base is BaseType.INT:
            return self.apply_proxy(ty, fuel, env)
        return self.bool_op(fuel, env)

    def leaf(self, ty: Refinement, env: list[tuple[str, Type]]) -> Term:
        from .syntax import is_raw

        if is_raw(ty):
            return self.const(ty.base)
        return Cast(raw(ty.base), EMPTY_ANN, ty, self.label(), self.const(ty.base))

    def cast_into(self, ty: Refinement, fuel: int, env) -> Term:
        src = self.pick_ref(ty.base)
        return Cast(src, EMPTY_ANN, ty, self.label(), self.term(src, fuel - 1, env))

    def cast_chain(self, ty: Refinement, fuel: int, env) -> Term:
        mid = self.pick_ref(ty.base)
        src = self.pick_ref(ty.base)
        inner = Cast(src, EMPTY_ANN, mid, self.label(), self.term(src, fuel - 2, env))
        return Cast(mid, EMPTY_ANN, ty, self.label(), inner)

    def op_int(self, fuel: int, env) -> Term:
        name = self.rng.choice(("+", "-", "*"))
        return Op(name, (self.term(ANY, fuel // 2, env), self.term(ANY, fuel // 2, env)))

    def bool_op(self, fuel: int, env) -> Term:
        kind = self.rng.random()
        if kind < 0.5:
            name = self.rng.choice(("=", "<>", "<", "<=", ">", ">="))
            return Op(name, (self.term(ANY, fuel // 2, env), self.term(ANY, fuel // 2, env)))
        if kind < 0.8:
            name = self.rng.choice(("&&", "||"))
            return Op(name, (self.term(RAW_BOOL, fuel // 2, env), self.term(RAW_BOOL, fuel // 2, env)))
        return Op("not", (self.term(RAW_BOOL, fuel - 1, env),))

    def apply_lambda(self, ty: Refinement, fuel: int, env) -> Term:
        dom = self.pick_ref(self.rng.choice((BaseType.INT, BaseType.BOOL)))
        x = f"x{len(env)}"
        body = self.term(ty, fuel // 2, env + [(x, dom)])
        arg = self.term(dom, fuel // 2, env)
        return App(Abs(x, dom, body), arg)

    def apply_proxy(self, ty: Refinement, fuel: int, env) -> Term:
        """Apply a cast-wrapped lambda, exercising function-proxy unwrapping."""

        d_src = self.pick_ref(BaseType.INT)
        d_tgt = self.pick_ref(BaseType.INT)
        c_src = self.pick_ref(ty.base)
        x = f"x{len(env)}"
        body = self.term(c_src, fuel // 2, env + [(x, d_src)])
        fn = Cast(Fun(d_src, c_src), EMPTY_ANN, Fun(d_tgt, ty), self.label(), Abs(x, d_src, body))
        arg = self.term(d_tgt, fuel // 3 + 1, env)
        return App(fn, arg)


def gen_source(seed: int, size: int) -> Term:
    """Deterministically generate a closed, well-typed source program whose
    result type is a refined base type."""

    if size < 1:
        raise ValueError("size must be at least 1")
    for attempt in range(100):
        rng = random.Random(f"{seed}:{size}:{attempt}")
        gen = _Gen(rng)
        base = BaseType.INT if rng.random() < 0.8 else BaseType.BOOL
        result_ty = gen.pick_ref(base)
        term = gen.term(result_ty, size, [])
        try:
            check_source(term)
        except TypeCheckError:
            continue
        return term
    raise AssertionError(f"generation failed to type for seed={seed} size={size}")


# ---------------------------------------------------------------------------
# Differential checking


@dataclass(frozen=True)
class Verdict:
    status: str  # "pass" | "fail" | "skip"
    reason: str = ""

    @property
    def failed(self) -> bool:
        return self.status == "fail"


@dataclass
class DiffReport:
    term: Term
    outcomes: dict[Mode, Outcome]
    forgetful_ok: Verdict
    heedful_ok: Verdict
    eidetic_ok: Verdict
    findings: list[str] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return (
            self.forgetful_ok.failed
            or self.heedful_ok.failed
            or self.eidetic_ok.failed
            or bool(self.findings)
        )

    def as_dict(self) -> dict:
        return {
            "term": print_term(self.term),
            "outcomes": {
                m.value: {
                    "kind": out.kind.name.lower(),
                    "label": out.label,
                    "value": print_term(out.term) if out.term is not None else None,
                    "steps": out.steps,
                }
                for m, out in self.outcomes.items()
            },
            "forgetful_ok": vars(self.forgetful_ok),
            "heedful_ok": vars(self.heedful_ok),
            "eidetic_ok": vars(self.eidetic_ok),
            "findings": self.findings,
        }


def _contains_fix(e: Term) -> bool:
    todo = [e]
    while todo:
        node = todo.pop()
        if isinstance(node, Fix):
            return True
        from .metering import _children

        try:
            todo.extend(_children(node))
        except TypeError:
            pass
    return False


def _same_const(a: Optional[Term], b: Optional[Term]) -> bool:
    return isinstance(a, Const) and isinstance(b, Const) and a.value == b.value and a.base is b.base


def diff_modes(e: Term, budget: int = 10_000) -> DiffReport:
    if _contains_fix(e):
        skip = Verdict("skip", "recursive programs are outside the cross-mode lemmas")
        return DiffReport(e, {}, skip, skip, skip)

    outcomes = {m: semantics.eval_term(m, e, budget) for m in ALL_MODES}
    findings = [
        f"{m.value}: stuck ({out.stuck_reason})"
        for m, out in outcomes.items()
        if out.kind is OutcomeKind.STUCK
    ]
    if any(out.kind is OutcomeKind.BUDGET for out in outcomes.values()):
        skip = Verdict("skip", "budget exceeded")
        return DiffReport(e, outcomes, skip, skip, skip, findings)

    c, f, h, ed = (outcomes[m] for m in ALL_MODES)

    def value_like(out: Outcome) -> bool:
        return out.kind is OutcomeKind.VALUE

    if value_like(c) and not isinstance(c.term, Const):
        skip = Verdict("skip", "function-typed result is not comparable")
        return DiffReport(e, outcomes, skip, skip, skip, findings)

    if value_like(c):
        forgetful = (
            Verdict("pass")
            if value_like(f) and _same_const(c.term, f.term)
            else Verdict("fail", "classic produced a value but forgetful diverged from it")
        )
    else:
        forgetful = Verdict("pass")

    heedful_blame_ok = (c.kind is OutcomeKind.BLAME) == (h.kind is OutcomeKind.BLAME)
    heedful_value_ok = not value_like(c) or (value_like(h) and _same_const(c.term, h.term))
    heedful = (
        Verdict("pass")
        if heedful_blame_ok and heedful_value_ok
        else Verdict("fail", "classic and heedful outcomes do not coterminate")
    )

    if c.kind is ed.kind and (
        (c.kind is OutcomeKind.BLAME and c.label == ed.label)
        or (c.kind is OutcomeKind.VALUE and _same_const(c.term, ed.term))
    ):
        eidetic = Verdict("pass")
    else:
        eidetic = Verdict("fail", "eidetic outcome differs from classic (kind, label, or value)")

    return DiffReport(e, outcomes, forgetful, heedful, eidetic, findings)


# ---------------------------------------------------------------------------
# Trace invariants


def _subterms(e: Term):
    from .metering import _children

    todo = [e]
    while todo:
        node = todo.pop()
        yield node
        todo.extend(_children(node))


def check_trace(mode: Mode, terms: Sequence[Term]) -> list[str]:
    """Findings for preservation, type monotonicity, and merge priority along
    an evaluation trace (first element is the initial term)."""

    findings: list[str] = []
    if not terms:
        return findings
    checker = Checker(mode)
    try:
        ty = checker.infer({}, terms[0])
    except TypeCheckError as exc:
        return [f"step 0: initial term does not typecheck: {exc}"]

    prev_keys = None
    mach = machine(mode)
    for i, term in enumerate(terms):
        try:
            checker.check({}, term, ty)
        except TypeCheckError as exc:
            findings.append(f"step {i}: preservation failure: {exc}")
        keys = type_keys(term)
        if prev_keys is not None and not keys <= prev_keys:
            findings.append(f"step {i}: types grew along the trace")
        prev_keys = keys

        if mode is not Mode.CLASSIC:
            for sub in _subterms(term):
                if not (isinstance(sub, Cast) and isinstance(sub.subject, Cast)):
                    continue
                inner = sub.subject
                if merge(mode, inner.src, inner.ann, inner.tgt, sub.ann, sub.tgt, mach.oracle) is None:
                    continue
                act = mach._local(sub)
                if not (act[0] == "step" and act[2] == "E-CastMergeE"):
                    findings.append(f"step {i}: mergeable cast pair did not merge first")
    return findings


# ---------------------------------------------------------------------------
# Coercion algebra generation (for property suites and the associativity probe)


def gen_reflist(rng: random.Random, max_len: int = 4) -> tuple[RefEntry, ...]:
    refs = list(INT_POOL)
    rng.shuffle(refs)
    n = rng.randint(0, min(max_len, len(refs)))
    return tuple(RefEntry(r, f"l{rng.randint(1, 99)}") for r in refs[:n])


def gen_coercion(rng: random.Random, depth: int = 0) -> Coercion:
    if depth < 2 and rng.random() < 0.3:
        return FunC(gen_coercion(rng, depth + 1), gen_coercion(rng, depth + 1))
    return Refs(gen_reflist(rng))


def _coercion_shape(c: Coercion) -> str:
    if isinstance(c, Refs):
        return "r"
    return "(" + _coercion_shape(c.dom) + "->" + _coercion_shape(c.cod) + ")"


def coercion_eq(c1: Coercion, c2: Coercion) -> bool:
    if isinstance(c1, Refs) and isinstance(c2, Refs):
        return len(c1.entries) == len(c2.entries) and all(
            a.label == b.label and alpha_eq(a.ref, b.ref) for a, b in zip(c1.entries, c2.entries)
        )
    if isinstance(c1, FunC) and isinstance(c2, FunC):
        return coercion_eq(c1.dom, c2.dom) and coercion_eq(c1.cod, c2.cod)
    return False


def assoc_counterexamples(seed: int, count: int, oracle=DEFAULT_ORACLE) -> list[tuple[Coercion, Coercion, Coercion]]:
    """Empirically probe whether coercion merge is associative."""

    rng = random.Random(seed)
    out = []
    for _ in range(count):
        c1 = gen_coercion(rng)
        c2, c3 = c1, c1
        # regenerate until all three share a composable shape
        for _ in range(50):
            c2 = gen_coercion(rng)
            if _coercion_shape(c2) == _coercion_shape(c1):
                break
        for _ in range(50):
            c3 = gen_coercion(rng)
            if _coercion_shape(c3) == _coercion_shape(c1):
                break
        if _coercion_shape(c2) != _coercion_shape(c1) or _coercion_shape(c3) != _coercion_shape(c1):
            continue
        left = coercion_merge(coercion_merge(c1, c2, oracle), c3, oracle)
        right = coercion_merge(c1, coercion_merge(c2, c3, oracle), oracle)
        if not coercion_eq(left, right):
            out.append((c1, c2, c3))
    return out


# ---------------------------------------------------------------------------
# Corpus driver


@dataclass
class FuzzReport:
    count: int
    seed: int
    failures: list[dict]
    budget_exceeded: int
    stuck: int

    @property
    def ok(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict:
        return {
            "count": self.count,
            "seed": self.seed,
            "ok": self.ok,
            "budget_exceeded": self.budget_exceeded,
            "stuck": self.stuck,
            "failures": self.failures,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)


def run_fuzz(
    count: int = 1000,
    min_size: int = 5,
    max_size: int = 30,
    seed: int = 0,
    budget: int = 10_000,
    check_traces: bool = False,
) -> FuzzReport:
    rng = random.Random(seed)
    failures: list[dict] = []
    exceeded = 0
    stuck = 0
    for i in range(count):
        size = rng.randint(min_size, max_size)
        term = gen_source(seed * 1_000_003 + i, size)
        report = diff_modes(term, budget)
        if report.outcomes and any(o.kind is OutcomeKind.BUDGET for o in report.outcomes.values()):
            exceeded += 1
        if report.outcomes and any(o.kind is OutcomeKind.STUCK for o in report.outcomes.values()):
            stuck += 1
        if report.failed:
            failures.append({"index": i, "size": size, **report.as_dict()})
            continue
        if check_traces:
            for mode in ALL_MODES:
                out = semantics.eval_term(mode, term, budget, trace=True)
                if out.kind is OutcomeKind.BUDGET:
                    continue
                found = check_trace(mode, out.trace_terms())
                if found:
                    failures.append(
                        {"index": i, "size": size, "mode": mode.value, "trace_findings": found}
                    )
    return FuzzReport(count, seed, failures, exceeded, stuck)
