import random

import pytest
from hypothesis import given, settings, strategies as st

from lh import eval_term
from lh.harness import (
    ANY,
    NAT,
    _subterms,
    assoc_counterexamples,
    check_trace,
    coercion_eq,
    diff_modes,
    gen_coercion,
    gen_reflist,
    gen_source,
    run_fuzz,
)
from lh.semantics import OutcomeKind, coercion_merge
from lh.surface import parse, print_term
from lh.syntax import ALL_MODES, Cast, Const, EMPTY_ANN, Fix, Mode, Refs, alpha_eq
from lh.typecheck import check_source


def test_gen_source_is_well_typed_and_deterministic():
    for seed in range(30):
        a = gen_source(seed, 12)
        b = gen_source(seed, 12)
        assert alpha_eq(a, b)
        check_source(a)


def test_gen_source_roundtrips():
    for seed in range(30):
        e = gen_source(seed, 15)
        assert alpha_eq(parse(print_term(e)), e)


def test_gen_source_nested_cast_ratio():
    def nested(e):
        return any(isinstance(s, Cast) and isinstance(s.subject, Cast) for s in _subterms(e))

    n = sum(nested(gen_source(i, 20)) for i in range(200))
    assert n / 200 >= 0.9  # measured 0.99 over 1,000 samples; pinned floor


def test_diff_modes_e3(e3):
    report = diff_modes(e3)
    assert not report.failed
    assert report.forgetful_ok.status == "pass"
    assert report.heedful_ok.status == "pass"
    assert report.eidetic_ok.status == "pass"
    assert report.outcomes[Mode.CLASSIC].label == "l1"
    assert report.outcomes[Mode.HEEDFUL].label == "l3"


def test_diff_modes_passing_cast():
    report = diff_modes(parse("<{x:Int|true} => {x:Int|x >= 0} @ l1> 5"))
    assert not report.failed
    for out in report.outcomes.values():
        assert out.kind is OutcomeKind.VALUE and out.term.value == 5


def test_diff_modes_skips_fix():
    e = parse("let rec f : {x:Int|true} -> {x:Int|true} = \\x:{x:Int|true}. f x; f 1")
    report = diff_modes(e)
    assert report.forgetful_ok.status == "skip"
    assert not report.outcomes


def test_check_trace_clean(e3):
    for mode in ALL_MODES:
        out = eval_term(mode, e3, 1_000, trace=True)
        assert check_trace(mode, out.trace_terms()) == []


def test_check_trace_detects_corruption(e3):
    out = eval_term(Mode.CLASSIC, e3, 1_000, trace=True)
    terms = out.trace_terms()
    terms[2] = Const(True)  # swap in an ill-typed term
    findings = check_trace(Mode.CLASSIC, terms)
    assert findings and "step 2" in findings[0]


def test_check_trace_rejects_untyped_start():
    assert check_trace(Mode.CLASSIC, [parse("x + 1")])


def test_reflist_and_coercion_generators():
    rng = random.Random(7)
    for _ in range(50):
        entries = gen_reflist(rng)
        keys = [print_term(e.ref.predicate) for e in entries]
        assert len(keys) == len(set(keys))
        gen_coercion(rng)


def test_coercion_merge_properties():
    rng = random.Random(3)
    for _ in range(500):
        r1, r2 = gen_reflist(rng), gen_reflist(rng)
        merged = coercion_merge(Refs(r1), Refs(r2)).entries
        keys = [print_term(e.ref.predicate) for e in merged]
        assert len(keys) == len(set(keys))  # duplicate-free
        # every surviving entry keeps the label of its leftmost occurrence
        for entry in merged:
            first = next(e for e in r1 + r2 if alpha_eq(e.ref, entry.ref))
            assert entry.label == first.label


def test_associativity_probe():
    assert assoc_counterexamples(seed=11, count=300) == []


def test_coercion_eq():
    rng = random.Random(1)
    for _ in range(20):
        c = gen_coercion(rng)
        assert coercion_eq(c, c)
        if isinstance(c, Refs) and c.entries:
            assert not coercion_eq(c, Refs(()))


def test_run_fuzz_small():
    report = run_fuzz(count=40, seed=5, check_traces=True)
    assert report.ok, report.failures[:2]
    assert report.stuck == 0
    data = report.as_dict()
    assert data["count"] == 40 and data["ok"] is True
    report.to_json()
