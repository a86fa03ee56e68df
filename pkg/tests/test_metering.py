import csv
import io
import json

import pytest
from hypothesis import given, settings, strategies as st

from conftest import load_example
from lh import eval_term
from lh.harness import gen_source
from lh.metering import (
    SERIES_FIELDS,
    SpaceStats,
    ZERO_STATS,
    eval_metered,
    measures,
    series_json,
    space_stats,
    write_series_csv,
)
from lh.semantics import OutcomeKind
from lh.surface import parse
from lh.syntax import ALL_MODES, App, Const, Fix, Mode, alpha_eq


def test_space_stats_constant():
    assert space_stats(Const(5)) == ZERO_STATS


def test_space_stats_e3(e3):
    s = space_stats(e3)
    assert s.pending == 3 and s.chain == 3
    assert s.max_reflist == 0 and s.proxy_wrap == 0
    assert s.live_types == 4


def test_space_stats_eidetic_merged_e3(e3):
    out = eval_term(Mode.EIDETIC, e3, 100, trace=True)
    merged = out.trace_terms()[5]  # after both merges, before stacking
    s = space_stats(merged)
    assert s.pending == 1 and s.chain == 1 and s.max_reflist == 3


def test_space_stats_proxy_wrap():
    e = parse(
        "<{x:Int|true} -> {x:Int|true} => {x:Int|true} -> {x:Int|true} @ l2>"
        " (<{x:Int|true} -> {x:Int|true} => {x:Int|true} -> {x:Int|true} @ l1> (\\x:{x:Int|true}. x))"
    )
    assert space_stats(e).proxy_wrap == 2


def test_join_is_pointwise_max():
    a = SpaceStats(1, 5, 0, 2, 3)
    b = SpaceStats(4, 1, 6, 0, 3)
    assert a.join(b) == SpaceStats(4, 5, 6, 2, 3)


@pytest.mark.parametrize("mode", ALL_MODES, ids=[m.value for m in ALL_MODES])
def test_meter_matches_direct_stats_on_e3(e3, mode):
    out, mx, series = eval_metered(mode, e3, 10_000, series=True)
    traced = eval_term(mode, e3, 10_000, trace=True)
    terms = traced.trace_terms()
    assert len(series) == len(terms) - 1
    acc = space_stats(terms[0])
    for (rule, stats), term, step in zip(series, terms[1:], traced.trace):
        assert rule == step.rule
        assert stats == space_stats(term), rule
        acc = acc.join(stats)
    assert mx == acc


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 3_000), size=st.integers(1, 18))
def test_meter_matches_direct_stats_generated(seed, size):
    e = gen_source(seed, size)
    for mode in ALL_MODES:
        out, mx, series = eval_metered(mode, e, 10_000, series=True)
        traced = eval_term(mode, e, 10_000, trace=True)
        terms = traced.trace_terms()
        for (rule, stats), term in zip(series, terms[1:]):
            assert stats == space_stats(term), (mode, rule)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 3_000), size=st.integers(1, 18))
def test_metering_is_observation_only(seed, size):
    e = gen_source(seed, size)
    for mode in ALL_MODES:
        plain = eval_term(mode, e, 10_000)
        metered, _, _ = eval_metered(mode, e, 10_000)
        assert plain.kind is metered.kind and plain.label == metered.label
        if plain.kind is OutcomeKind.VALUE:
            assert alpha_eq(plain.term, metered.term)


def test_live_types_monotone_on_examples():
    for name in ("triple.lh", "fact.lh", "evenodd.lh"):
        e = load_example(name)
        for mode in ALL_MODES:
            out = eval_term(mode, e, 100_000, trace=True)
            values = [space_stats(t).live_types for t in out.trace_terms()]
            assert all(a >= b for a, b in zip(values, values[1:])), (name, mode)


def test_proxy_bound_after_annotation():
    e = load_example("evenodd.lh")
    for mode in (Mode.FORGETFUL, Mode.HEEDFUL, Mode.EIDETIC):
        out = eval_term(mode, e, 100_000, trace=True)
        terms = out.trace_terms()
        # skip the initial annotation pass
        tail = terms[len(terms) // 4 :]
        assert all(space_stats(t).proxy_wrap <= 1 for t in tail), mode


def test_factorial_space_signature():
    prog = load_example("fact.lh")
    fix = prog.fn.fn
    assert isinstance(fix, Fix)
    eidetic = []
    classic = []
    for n in (10, 50):
        e = App(App(fix, Const(n)), Const(1))
        _, mx_e, _ = eval_metered(Mode.EIDETIC, e, 100_000)
        _, mx_c, _ = eval_metered(Mode.CLASSIC, e, 100_000)
        eidetic.append(mx_e.pending)
        classic.append(mx_c.pending)
    assert eidetic[0] == eidetic[1]
    assert classic[1] > classic[0]


def test_series_csv_and_json(e3):
    _, _, series = eval_metered(Mode.EIDETIC, e3, 100, series=True)
    buf = io.StringIO()
    write_series_csv(series, buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == list(SERIES_FIELDS)
    assert len(rows) == len(series) + 1
    data = series_json(series)
    assert data[0]["step"] == 1 and "pending" in data[0]
    json.dumps(data)  # serializable


def test_measures_cache_consistency(e3):
    m1 = measures(e3)
    m2 = measures(e3)
    assert m1 is m2
