import pytest
from hypothesis import given, settings, strategies as st

from lh import eval_term
from lh.harness import gen_source
from lh.semantics import (
    DEFAULT_ORACLE,
    IsBlame,
    IsValue,
    OpUndefined,
    OutcomeKind,
    OverflowFault,
    Stepped,
    Stuck,
    apply_op,
    axiom_oracle,
    choose,
    coerce,
    coercion_merge,
    machine,
    merge,
    merge_refs,
    ref_drop,
    split_annotation,
    status_join,
)
from lh.surface import parse, parse_type, print_term
from lh.syntax import (
    ALL_MODES,
    Cast,
    Coerce,
    Const,
    EMPTY_ANN,
    EMPTY_SET,
    FunC,
    Mode,
    RefEntry,
    Refs,
    Status,
    TypeSet,
    Types,
    alpha_eq,
)

ANY = parse_type("{x:Int|true}")
NAT = parse_type("{x:Int|x >= 0}")
EVEN = parse_type("{x:Int|x mod 2 = 0}")
NZ = parse_type("{x:Int|x <> 0}")


# -- operations


def test_apply_op_basics():
    assert apply_op("+", [Const(2), Const(3)]).value == 5
    assert apply_op("mod", [Const(-1), Const(2)]).value == 1
    assert apply_op("div", [Const(7), Const(2)]).value == 3
    assert apply_op("div", [Const(-7), Const(2)]).value == -4
    assert apply_op("<=", [Const(1), Const(1)]).value is True
    assert apply_op("not", [Const(False)]).value is True


def test_apply_op_partiality():
    with pytest.raises(OpUndefined):
        apply_op("div", [Const(1), Const(0)])
    with pytest.raises(OpUndefined):
        apply_op("mod", [Const(1), Const(0)])
    with pytest.raises(OverflowFault):
        apply_op("*", [Const(2**62), Const(4)])
    with pytest.raises(OpUndefined):
        apply_op("+", [Const(True), Const(1)])


def test_division_by_zero_is_stuck():
    out = eval_term(Mode.CLASSIC, parse("1 div 0"), 100)
    assert out.kind is OutcomeKind.STUCK


# -- annotation algebra


def test_coerce_refinements_and_functions():
    c = coerce(ANY, NAT, "l")
    assert isinstance(c, Refs)
    assert len(c.entries) == 1 and alpha_eq(c.entries[0].ref, NAT) and c.entries[0].label == "l"
    # identity coercion still records the check
    c2 = coerce(ANY, ANY, "l")
    assert isinstance(c2, Refs) and len(c2.entries) == 1 and alpha_eq(c2.entries[0].ref, ANY)
    fc = coerce(parse_type("{x:Int|true} -> {x:Int|x >= 0}"), parse_type("{x:Int|x <> 0} -> {x:Int|true}"), "l")
    assert isinstance(fc, FunC)
    assert alpha_eq(fc.dom.entries[0].ref, ANY)  # contravariant: target dom -> source dom
    assert alpha_eq(fc.cod.entries[0].ref, ANY)


def test_merge_refs_keeps_leftmost_label():
    r1 = (RefEntry(NAT, "a"),)
    r2 = (RefEntry(NAT, "b"), RefEntry(EVEN, "c"))
    merged = merge_refs(r1, r2)
    assert [(print_term(e.ref.predicate), e.label) for e in merged] == [
        (print_term(NAT.predicate), "a"),
        (print_term(EVEN.predicate), "c"),
    ]


def test_ref_drop_is_a_subsequence():
    entries = (RefEntry(NAT, "a"), RefEntry(EVEN, "b"), RefEntry(NAT, "c"))
    dropped = ref_drop(entries, NAT)
    assert dropped == (entries[1],)


def test_merge_modes():
    assert merge(Mode.CLASSIC, ANY, EMPTY_ANN, NAT, EMPTY_ANN, NZ) is None
    assert isinstance(merge(Mode.FORGETFUL, ANY, EMPTY_ANN, NAT, EMPTY_ANN, NZ), type(EMPTY_ANN))
    h = merge(Mode.HEEDFUL, ANY, Types(EMPTY_SET), NAT, Types(EMPTY_SET), NZ)
    assert isinstance(h, Types) and len(h.types) == 1 and NAT in h.types
    e = merge(Mode.EIDETIC, ANY, Coerce(coerce(ANY, NAT, "l1")), NAT, Coerce(coerce(NAT, NZ, "l2")), NZ)
    assert isinstance(e, Coerce) and len(e.coercion.entries) == 2
    assert merge(Mode.FORGETFUL, ANY, Types(EMPTY_SET), NAT, EMPTY_ANN, NZ) is None


def test_choose_policies():
    s = TypeSet.of([EVEN, NAT])
    assert alpha_eq(choose(s, "lex-min"), NAT)  # "{x:Int | x >=..." sorts before "{x:Int | x mod..."
    assert alpha_eq(choose(s, "lex-max"), EVEN)
    with pytest.raises(ValueError):
        choose(EMPTY_SET)


def test_status_join():
    p, q = NAT.predicate, NZ.predicate
    assert status_join(Status.CHECKED, p, q) is Status.CHECKED
    assert status_join(Status.UNCHECKED, p, p) is Status.CHECKED
    assert status_join(Status.UNCHECKED, p, q) is Status.UNCHECKED


def test_split_annotation():
    d, c = split_annotation(EMPTY_ANN)
    assert isinstance(d, type(EMPTY_ANN)) and isinstance(c, type(EMPTY_ANN))
    fc = FunC(Refs((RefEntry(NAT, "l"),)), Refs((RefEntry(NZ, "l"),)))
    d, c = split_annotation(Coerce(fc))
    assert isinstance(d, Coerce) and d.coercion is fc.dom
    assert isinstance(c, Coerce) and c.coercion is fc.cod


def test_axiom_oracle_closure():
    oracle = axiom_oracle([(EVEN, NAT), (NAT, ANY)])
    assert oracle.decide(EVEN, NAT)
    assert oracle.decide(EVEN, ANY)  # transitivity
    assert oracle.decide(NZ, NZ)  # reflexivity
    assert not oracle.decide(NAT, EVEN)


# -- the running example


E3_EXPECTED = {
    Mode.CLASSIC: (OutcomeKind.BLAME, "l1"),
    Mode.FORGETFUL: (OutcomeKind.VALUE, -1),
    Mode.HEEDFUL: (OutcomeKind.BLAME, "l3"),
    Mode.EIDETIC: (OutcomeKind.BLAME, "l1"),
}


@pytest.mark.parametrize("mode", ALL_MODES, ids=[m.value for m in ALL_MODES])
def test_e3_outcomes(e3, mode):
    out = eval_term(mode, e3, 10_000)
    kind, payload = E3_EXPECTED[mode]
    assert out.kind is kind
    if kind is OutcomeKind.BLAME:
        assert out.label == payload
    else:
        assert out.term.value == payload


def test_e3_rule_traces(e3):
    rules = lambda m: [s.rule for s in eval_term(m, e3, 10_000, trace=True).trace]
    assert rules(Mode.CLASSIC) == ["E-CheckNoneC", "E-Op", "E-CheckFail", "E-CastRaise", "E-CastRaise"]
    assert rules(Mode.FORGETFUL) == ["E-CastMergeE", "E-CastMergeE", "E-CheckNoneC", "E-Op", "E-CheckOK"]
    assert rules(Mode.EIDETIC)[:5] == ["E-Coerce", "E-Coerce", "E-CastMergeE", "E-Coerce", "E-CastMergeE"]
    assert rules(Mode.EIDETIC)[5:] == ["E-CoerceStack", "E-StackPop", "E-Op", "E-CheckFail", "E-StackRaise"]


def test_forgetful_merge_keeps_outer_label():
    # both inner checks are skipped; only the outermost target is checked,
    # and a failure blames the outer cast
    e = parse(
        "<{x:Int|x >= 0} => {x:Int|x < 0} @ louter> (<{x:Int|true} => {x:Int|x >= 0} @ linner> 5)"
    )
    out = eval_term(Mode.FORGETFUL, e, 100)
    assert out.kind is OutcomeKind.BLAME and out.label == "louter"


def test_function_proxy_unwrap():
    e = parse(
        "(<{x:Int|true} -> {x:Int|true} => {x:Int|true} -> {x:Int|x > 0} @ lp> (\\x:{x:Int|true}. x)) 0"
    )
    for mode in ALL_MODES:
        out = eval_term(mode, e, 1_000)
        assert out.kind is OutcomeKind.BLAME and out.label == "lp", mode


def test_classic_proxies_can_stack_but_others_annotate():
    proxy_src = (
        "<{x:Int|true} -> {x:Int|true} => {x:Int|true} -> {x:Int|true} @ l2>"
        " (<{x:Int|true} -> {x:Int|true} => {x:Int|true} -> {x:Int|true} @ l1> (\\x:{x:Int|true}. x))"
    )
    e = parse(proxy_src)
    out = eval_term(Mode.CLASSIC, e, 100)
    assert out.kind is OutcomeKind.VALUE
    assert isinstance(out.term, Cast) and isinstance(out.term.subject, Cast)
    out = eval_term(Mode.FORGETFUL, e, 100)
    assert out.kind is OutcomeKind.VALUE
    assert isinstance(out.term, Cast) and not isinstance(out.term.subject, Cast)


def test_budget_exceeded():
    e = parse("let rec f : {x:Int|true} -> {x:Int|true} = \\x:{x:Int|true}. f x; f 1")
    out = eval_term(Mode.CLASSIC, e, 50)
    assert out.kind is OutcomeKind.BUDGET


def test_blame_propagation_through_contexts():
    checks = [
        ("(\\x:{x:Int|true}. x) (<{x:Int|true} => {x:Int|x <> 0} @ l> 0)", "l"),
        ("1 + (<{x:Int|true} => {x:Int|x <> 0} @ l> 0)", "l"),
        ("if <{b:Bool|true} => {b:Bool|b} @ l> false then 1 else 2", "l"),
    ]
    for src, label in checks:
        for mode in ALL_MODES:
            out = eval_term(mode, parse(src), 1_000)
            assert out.kind is OutcomeKind.BLAME and out.label == label, (src, mode)


# -- reference stepper vs machine


def _naive_trace(mode, e, limit=10_000):
    mach = machine(mode)
    terms, rules = [e], []
    for _ in range(limit):
        out = mach.step(terms[-1])
        if isinstance(out, Stepped):
            terms.append(out.term)
            rules.append(out.rule)
            continue
        return terms, rules, out
    raise AssertionError("limit hit")


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 5_000), size=st.integers(1, 20))
def test_machine_agrees_with_reference_stepper(seed, size):
    e = gen_source(seed, size)
    for mode in ALL_MODES:
        out = eval_term(mode, e, 10_000, trace=True)
        terms, rules, final = _naive_trace(mode, e)
        assert [s.rule for s in out.trace] == rules
        machine_terms = out.trace_terms()
        assert len(machine_terms) == len(terms)
        for a, b in zip(machine_terms, terms):
            assert alpha_eq(a, b)
        if out.kind is OutcomeKind.VALUE:
            assert isinstance(final, IsValue)
        elif out.kind is OutcomeKind.BLAME:
            assert isinstance(final, IsBlame) and final.label == out.label


def test_determinism_rerun_identical(e3):
    for mode in ALL_MODES:
        a = eval_term(mode, e3, 10_000, trace=True)
        b = eval_term(mode, e3, 10_000, trace=True)
        assert [s.rule for s in a.trace] == [s.rule for s in b.trace]
        for x, y in zip(a.trace_terms(), b.trace_terms()):
            assert alpha_eq(x, y)


# -- eidetic cast congruence


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2_000))
def test_eidetic_cast_congruence_single_step(seed):
    e = gen_source(seed, 12)
    out = eval_term(Mode.EIDETIC, e, 10_000, trace=True)
    terms = out.trace_terms()
    if len(terms) < 2:
        return
    before, after = terms[0], terms[1]
    from lh.typecheck import type_of

    ty = type_of(Mode.EIDETIC, {}, before)
    if not alpha_eq(ty, type_of(Mode.EIDETIC, {}, after)):
        return
    from lh.syntax import Refinement

    if not isinstance(ty, Refinement):
        return
    from lh.syntax import raw

    tgt = raw(ty.base)
    wrap = lambda t: Cast(ty, Coerce(coerce(ty, tgt, "lw")), tgt, None, t)
    a = eval_term(Mode.EIDETIC, wrap(before), 20_000)
    b = eval_term(Mode.EIDETIC, wrap(after), 20_000)
    assert a.kind is b.kind and a.label == b.label
    if a.kind is OutcomeKind.VALUE:
        assert alpha_eq(a.term, b.term)
