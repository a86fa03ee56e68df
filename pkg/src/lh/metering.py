"""Space accounting: structural counters per evaluation step.

`space_stats` measures a term in one traversal.  `eval_metered` keeps the
same five counters up to date incrementally while the machine runs, so the
per-step cost stays proportional to the local change, not the term size.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import IO, NamedTuple, Optional

from .semantics import FCastSub, FCheck, FStack, Frame, Machine, Outcome, frame_siblings, machine
from .syntax import (
    Abs,
    ActiveCheck,
    App,
    Blame,
    Cast,
    Coerce,
    CoercionStack,
    Cond,
    Const,
    EmptyAnn,
    Fix,
    Fun,
    Mode,
    Op,
    Refinement,
    Refs,
    Term,
    Types,
    Var,
    canon,
    type_keys,
)


@dataclass(frozen=True)
class SpaceStats:
    """Five structural counters; `pending` is the space-efficiency headline."""

    pending: int
    chain: int
    max_reflist: int
    proxy_wrap: int
    live_types: int

    def join(self, other: "SpaceStats") -> "SpaceStats":
        return SpaceStats(
            max(self.pending, other.pending),
            max(self.chain, other.chain),
            max(self.max_reflist, other.max_reflist),
            max(self.proxy_wrap, other.proxy_wrap),
            max(self.live_types, other.live_types),
        )

    def as_dict(self) -> dict:
        return {
            "pending": self.pending,
            "chain": self.chain,
            "max_reflist": self.max_reflist,
            "proxy_wrap": self.proxy_wrap,
            "live_types": self.live_types,
        }


ZERO_STATS = SpaceStats(0, 0, 0, 0, 0)


class Measures(NamedTuple):
    """Per-node cached aggregate; `top_proxy` is -1 when the node's root is not
    a cast chain ending on a lambda."""

    size: int
    pending: int
    top_chain: int
    max_chain: int
    top_proxy: int
    max_proxy: int
    max_reflist: int
    tkeys: frozenset


_LEAF = (Var, Const, Blame)


def _ann_keys(ann) -> frozenset:
    if isinstance(ann, EmptyAnn):
        return frozenset()
    if isinstance(ann, Types):
        out = frozenset()
        for t in ann.types:
            out |= type_keys(t)
        return out
    return _coercion_keys(ann.coercion)


def _coercion_keys(c) -> frozenset:
    if isinstance(c, Refs):
        return frozenset(canon(e.ref) for e in c.entries)
    return _coercion_keys(c.dom) | _coercion_keys(c.cod)


def _ann_reflen(ann) -> int:
    if isinstance(ann, Coerce):
        return _coercion_reflen(ann.coercion)
    return 0


def _coercion_reflen(c) -> int:
    if isinstance(c, Refs):
        return len(c.entries)
    return max(_coercion_reflen(c.dom), _coercion_reflen(c.cod))


def _children(e: Term) -> tuple[Term, ...]:
    if isinstance(e, _LEAF):
        return ()
    if isinstance(e, (Abs, Fix)):
        return (e.body,)
    if isinstance(e, App):
        return (e.fn, e.arg)
    if isinstance(e, Op):
        return e.args
    if isinstance(e, Cast):
        return (e.subject,)
    if isinstance(e, (ActiveCheck, CoercionStack)):
        return (e.current, e.scrutinee)
    if isinstance(e, Cond):
        return (e.guard, e.then, e.orelse)
    raise TypeError(f"measures: not a term: {e!r}")


def measures(e: Term) -> Measures:
    """Cached structural measures of a term, computed without deep recursion."""

    cached = getattr(e, "_sm", None)
    if cached is not None:
        return cached
    todo: list[Term] = [e]
    while todo:
        node = todo[-1]
        if getattr(node, "_sm", None) is not None:
            todo.pop()
            continue
        missing = [c for c in _children(node) if getattr(c, "_sm", None) is None]
        if missing:
            todo.extend(missing)
            continue
        todo.pop()
        object.__setattr__(node, "_sm", _combine(node))
    return getattr(e, "_sm")


def _combine(e: Term) -> Measures:
    kids = [getattr(c, "_sm") for c in _children(e)]
    size = 1 + sum(k.size for k in kids)
    pending = sum(k.pending for k in kids)
    max_chain = max((k.max_chain for k in kids), default=0)
    max_proxy = max((k.max_proxy for k in kids), default=0)
    max_reflist = max((k.max_reflist for k in kids), default=0)
    tkeys = frozenset().union(*(k.tkeys for k in kids)) if kids else frozenset()
    top_chain = 0
    top_proxy = -1

    if isinstance(e, Abs):
        top_proxy = 0
        tkeys |= type_keys(e.annot)
    elif isinstance(e, Fix):
        tkeys |= type_keys(e.annot)
    elif isinstance(e, Cast):
        sub = kids[0]
        pending += 1
        top_chain = 1 + sub.top_chain
        max_chain = max(max_chain, top_chain)
        if sub.top_proxy >= 0:
            top_proxy = sub.top_proxy + 1
            max_proxy = max(max_proxy, top_proxy)
        max_reflist = max(max_reflist, _ann_reflen(e.ann))
        tkeys |= type_keys(e.src) | type_keys(e.tgt) | _ann_keys(e.ann)
    elif isinstance(e, ActiveCheck):
        pending += 1
        tkeys |= type_keys(e.tgt)
    elif isinstance(e, CoercionStack):
        pending += 1
        max_reflist = max(max_reflist, len(e.pending))
        tkeys |= type_keys(e.tgt) | frozenset(canon(x.ref) for x in e.pending)

    return Measures(size, pending, top_chain, max_chain, top_proxy, max_proxy, max_reflist, tkeys)


def space_stats(e: Term) -> SpaceStats:
    m = measures(e)
    return SpaceStats(m.pending, m.max_chain, m.max_reflist, m.max_proxy, len(m.tkeys))


# ---------------------------------------------------------------------------
# Incremental meter


def _frame_own(frame: Frame) -> tuple[frozenset, int, int]:
    """(type keys, pending, reflist length) contributed by the frame's node itself."""

    node = frame.orig
    if isinstance(frame, FCastSub):
        return type_keys(node.src) | type_keys(node.tgt) | _ann_keys(node.ann), 1, _ann_reflen(node.ann)
    if isinstance(frame, FCheck):
        return type_keys(node.tgt), 1, 0
    if isinstance(frame, FStack):
        keys = type_keys(node.tgt) | frozenset(canon(x.ref) for x in node.pending)
        return keys, 1, len(node.pending)
    return frozenset(), 0, 0


class Meter:
    """Observes machine transitions; keeps whole-term SpaceStats current."""

    def __init__(self, series: bool = False):
        self._counts: dict = {}
        self._distinct = 0
        self._pending_ctx = 0
        self._snaps: list[tuple[int, int, int, int]] = []
        self.max = ZERO_STATS
        self.series: Optional[list[tuple[str, SpaceStats]]] = [] if series else None

    # counter plumbing

    def _add(self, keys: frozenset) -> None:
        counts = self._counts
        for k in keys:
            n = counts.get(k, 0)
            if n == 0:
                self._distinct += 1
            counts[k] = n + 1

    def _sub(self, keys: frozenset) -> None:
        counts = self._counts
        for k in keys:
            n = counts[k] - 1
            if n == 0:
                self._distinct -= 1
                del counts[k]
            else:
                counts[k] = n

    # machine hooks

    def init(self, root: Term) -> None:
        self._add(measures(root).tkeys)
        self.max = self._snapshot(root)

    def push(self, frame: Frame, child: Term) -> None:
        node_sm = measures(frame.orig)
        own_keys, own_pending, own_reflist = _frame_own(frame)
        sibs = [measures(s) for s in frame_siblings(frame)]
        self._sub(node_sm.tkeys)
        stored = [own_keys] + [s.tkeys for s in sibs]
        for keys in stored:
            self._add(keys)
        self._add(measures(child).tkeys)
        frame._meter_keys = stored
        frame._meter_pending = own_pending + sum(s.pending for s in sibs)
        self._pending_ctx += frame._meter_pending

        prev = self._snaps[-1] if self._snaps else (0, 0, 0, 0)
        if isinstance(frame, FCastSub):
            suffix, ctx_chain = prev[1] + 1, prev[0]
        else:
            suffix, ctx_chain = 0, max(prev[0], prev[1])
        ctx_proxy, ctx_reflist = prev[2], max(prev[3], own_reflist)
        for s in sibs:
            ctx_chain = max(ctx_chain, s.max_chain)
            ctx_proxy = max(ctx_proxy, s.max_proxy)
            ctx_reflist = max(ctx_reflist, s.max_reflist)
        self._snaps.append((ctx_chain, suffix, ctx_proxy, ctx_reflist))

    def pop(self, frame: Frame, child: Term, rebuilt: Term) -> None:
        for keys in frame._meter_keys:
            self._sub(keys)
        self._sub(measures(child).tkeys)
        self._add(measures(rebuilt).tkeys)
        self._pending_ctx -= frame._meter_pending
        self._snaps.pop()

    def replace(self, old: Term, new: Term) -> None:
        self._sub(measures(old).tkeys)
        self._add(measures(new).tkeys)

    def record(self, rule: str, focus: Term) -> None:
        stats = self._snapshot(focus)
        self.max = self.max.join(stats)
        if self.series is not None:
            self.series.append((rule, stats))

    def _snapshot(self, focus: Term) -> SpaceStats:
        top = self._snaps[-1] if self._snaps else (0, 0, 0, 0)
        m = measures(focus)
        pending = self._pending_ctx + m.pending
        chain = max(top[0], top[1] + m.top_chain, m.max_chain)
        proxy = max(top[2], m.max_proxy, (top[1] + m.top_proxy) if m.top_proxy >= 0 else 0)
        reflist = max(top[3], m.max_reflist)
        return SpaceStats(pending, chain, reflist, proxy, self._distinct)


def eval_metered(
    mode: Mode,
    e: Term,
    budget: int = 100_000,
    series: bool = False,
    mach: Optional[Machine] = None,
) -> tuple[Outcome, SpaceStats, Optional[list[tuple[str, SpaceStats]]]]:
    """Run the machine with metering; the outcome is identical to plain eval."""

    meter = Meter(series=series)
    mach = mach or machine(mode)
    outcome = mach.eval(e, budget, meter=meter)
    return outcome, meter.max, meter.series


SERIES_FIELDS = ("step", "rule", "pending", "chain", "max_reflist", "proxy_wrap", "live_types")


def write_series_csv(series: list[tuple[str, SpaceStats]], out: IO[str]) -> None:
    writer = csv.writer(out)
    writer.writerow(SERIES_FIELDS)
    for i, (rule, stats) in enumerate(series, start=1):
        writer.writerow([i, rule, stats.pending, stats.chain, stats.max_reflist, stats.proxy_wrap, stats.live_types])


def series_json(series: list[tuple[str, SpaceStats]]) -> list[dict]:
    return [{"step": i, "rule": rule, **stats.as_dict()} for i, (rule, stats) in enumerate(series, start=1)]


def write_series_json(series: list[tuple[str, SpaceStats]], out: IO[str]) -> None:
    json.dump(series_json(series), out, indent=2)
