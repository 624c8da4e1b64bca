"""Accepting Petri net model: markings with token ages, firing semantics,
and structural analysis (S-components, place bounds)."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import BudgetExceeded, NotEnabled, NotFound

#: Label value used for invisible (silent) transitions.
SILENT = None


class AgedMarking:
    """Multiset of tokens over places where every token carries an age.

    The age counts replay steps spent in the marking without being consumed.
    Instances are values: every operation returns a new marking. Per place,
    ages are kept oldest-first; consumption always removes the oldest tokens.
    """

    __slots__ = ("_ages",)

    def __init__(self, ages: Mapping[str, Iterable[int]] | None = None):
        self._ages: dict[str, tuple[int, ...]] = {}
        if ages:
            for place, values in ages.items():
                tup = tuple(sorted(values, reverse=True))
                if tup:
                    self._ages[place] = tup

    @classmethod
    def from_counts(cls, counts: Mapping[str, int], age: int = 0) -> "AgedMarking":
        return cls({p: [age] * n for p, n in counts.items() if n > 0})

    def counts(self) -> Counter:
        """Age-erased marking: place -> token count."""
        return Counter({p: len(a) for p, a in self._ages.items()})

    def count(self, place: str) -> int:
        return len(self._ages.get(place, ()))

    def total(self) -> int:
        return sum(len(a) for a in self._ages.values())

    def ages(self, place: str) -> tuple[int, ...]:
        return self._ages.get(place, ())

    def places(self) -> tuple[str, ...]:
        return tuple(sorted(self._ages))

    def add(self, place: str, n: int = 1, age: int = 0) -> "AgedMarking":
        new = dict(self._ages)
        merged = list(new.get(place, ())) + [age] * n
        merged.sort(reverse=True)
        new[place] = tuple(merged)
        return self._wrap(new)

    def consume(self, place: str, n: int) -> "AgedMarking":
        """Remove the n oldest tokens from a place."""
        have = self._ages.get(place, ())
        if len(have) < n:
            raise NotEnabled(f"place {place!r} holds {len(have)} tokens, need {n}")
        new = dict(self._ages)
        rest = have[n:]
        if rest:
            new[place] = rest
        else:
            del new[place]
        return self._wrap(new)

    def without(self, place: str, victim_ages: Iterable[int]) -> "AgedMarking":
        """Remove one token per listed age from a place (used by freezing)."""
        remaining = list(self._ages.get(place, ()))
        for age in victim_ages:
            remaining.remove(age)
        new = dict(self._ages)
        if remaining:
            new[place] = tuple(remaining)
        else:
            new.pop(place, None)
        return self._wrap(new)

    def tick(self) -> "AgedMarking":
        """Increment every token's age by one replay step."""
        return self._wrap({p: tuple(x + 1 for x in a) for p, a in self._ages.items()})

    def canonical(self) -> tuple:
        """Hashable age-erased form, usable as a cache key."""
        return tuple(sorted((p, len(a)) for p, a in self._ages.items()))

    @staticmethod
    def _wrap(ages: dict) -> "AgedMarking":
        m = AgedMarking.__new__(AgedMarking)
        m._ages = {p: a for p, a in ages.items() if a}
        return m

    def __eq__(self, other):
        if not isinstance(other, AgedMarking):
            return NotImplemented
        return self._ages == other._ages

    def __hash__(self):
        return hash(tuple(sorted(self._ages.items())))

    def __repr__(self):
        inner = ", ".join(f"{p}:{list(a)}" for p, a in sorted(self._ages.items()))
        return f"AgedMarking({{{inner}}})"


class AcceptingPetriNet:
    """Petri net with initial and final markings and a transition labeling.

    Arcs are a multiset over (place, transition) and (transition, place)
    pairs; weights are positive. Transitions labeled ``SILENT`` (None) are
    invisible. Instances are immutable after construction and safe to share.
    """

    def __init__(
        self,
        places: Iterable[str],
        transitions: Iterable[str],
        arcs: Mapping[tuple[str, str], int],
        initial_marking: Mapping[str, int],
        final_marking: Mapping[str, int],
        labels: Mapping[str, str | None] | None = None,
    ):
        self.places = frozenset(places)
        self.transitions = frozenset(transitions)
        if self.places & self.transitions:
            raise ValueError("place and transition identifiers must be disjoint")

        self.labels: dict[str, str | None] = {
            t: (labels[t] if labels and t in labels else t) for t in self.transitions
        }

        self._pre: dict[str, Counter] = {t: Counter() for t in self.transitions}
        self._post: dict[str, Counter] = {t: Counter() for t in self.transitions}
        self._place_pre: dict[str, Counter] = {p: Counter() for p in self.places}
        self._place_post: dict[str, Counter] = {p: Counter() for p in self.places}
        self.arcs: dict[tuple[str, str], int] = {}
        for (src, dst), weight in arcs.items():
            if weight < 1:
                raise ValueError(f"arc ({src}, {dst}) has non-positive weight {weight}")
            if src in self.places and dst in self.transitions:
                self._pre[dst][src] += weight
                self._place_post[src][dst] += weight
            elif src in self.transitions and dst in self.places:
                self._post[src][dst] += weight
                self._place_pre[dst][src] += weight
            else:
                raise ValueError(f"arc ({src}, {dst}) references unknown nodes")
            self.arcs[(src, dst)] = self.arcs.get((src, dst), 0) + weight

        for name, marking in (("initial", initial_marking), ("final", final_marking)):
            unknown = set(marking) - self.places
            if unknown:
                raise ValueError(f"{name} marking on unknown places: {sorted(unknown)}")
        self.initial_marking = Counter({p: n for p, n in initial_marking.items() if n > 0})
        self.final_marking = Counter({p: n for p, n in final_marking.items() if n > 0})

        by_label: dict[str, list[str]] = {}
        for t in self.transitions:
            label = self.labels[t]
            if label is not None:
                by_label.setdefault(label, []).append(t)
        self._by_label = {a: tuple(sorted(ts)) for a, ts in by_label.items()}
        self.invisible_transitions = frozenset(
            t for t in self.transitions if self.labels[t] is None
        )

    # -- structure lookups ------------------------------------------------

    def preset(self, node: str) -> Counter:
        if node in self.transitions:
            return Counter(self._pre[node])
        if node in self.places:
            return Counter(self._place_pre[node])
        raise NotFound(f"unknown node {node!r}")

    def postset(self, node: str) -> Counter:
        if node in self.transitions:
            return Counter(self._post[node])
        if node in self.places:
            return Counter(self._place_post[node])
        raise NotFound(f"unknown node {node!r}")

    def preset_weight(self, t: str) -> int:
        return sum(self._pre[t].values())

    def postset_weight(self, t: str) -> int:
        return sum(self._post[t].values())

    def transitions_for(self, activity: str) -> tuple[str, ...]:
        """All transitions carrying the given visible label."""
        return self._by_label.get(activity, ())

    def is_invisible(self, t: str) -> bool:
        return self.labels[t] is None

    # -- execution semantics ----------------------------------------------

    def is_enabled(self, marking: AgedMarking, t: str) -> bool:
        if t not in self.transitions:
            raise NotFound(f"unknown transition {t!r}")
        pre = self._pre[t]
        return all(marking.count(p) >= w for p, w in pre.items())

    def fire(self, marking: AgedMarking, t: str) -> AgedMarking:
        """Fire an enabled transition: consume oldest tokens, produce age-0 ones."""
        if not self.is_enabled(marking, t):
            raise NotEnabled(f"transition {t!r} is not enabled")
        out = marking
        for p, w in self._pre[t].items():
            out = out.consume(p, w)
        for p, w in self._post[t].items():
            out = out.add(p, w, age=0)
        return out

    def initial_aged_marking(self) -> AgedMarking:
        return AgedMarking.from_counts(self.initial_marking)

    def __repr__(self):
        return (
            f"AcceptingPetriNet(places={len(self.places)}, "
            f"transitions={len(self.transitions)}, arcs={len(self.arcs)})"
        )


@dataclass(frozen=True)
class SComponent:
    """Strongly connected one-in/one-out subnet induced by a set of places."""

    places: frozenset[str]
    transitions: frozenset[str]

    def sort_key(self) -> tuple:
        return tuple(sorted(self.places))


def validate_for_replay(net: AcceptingPetriNet) -> list[str]:
    """Warnings about constructs the path-based resolver cannot use."""
    warnings = []
    for t in sorted(net.invisible_transitions):
        if not net._pre[t]:
            warnings.append(f"invisible transition {t!r} has an empty preset")
        if not net._post[t]:
            warnings.append(f"invisible transition {t!r} has an empty postset")
    if not net.final_marking:
        warnings.append("final marking is empty; replay skips the final consumption step")
    return warnings


# -- candidate selection policies ------------------------------------------
# The main replay loop and the reference replayer must share these, or their
# counters diverge on nets with duplicate labels.


def choose_transition_to_fire(net: AcceptingPetriNet, enabled: Iterable[str]) -> str:
    """Among enabled candidates: fewest produced tokens, then smallest id."""
    return min(enabled, key=lambda t: (net.postset_weight(t), t))


def choose_transition_to_force(
    net: AcceptingPetriNet, counts: Counter, candidates: Iterable[str]
) -> str:
    """Candidate to fire via missing-token insertion: smallest shortfall first."""

    def shortfall(t: str) -> int:
        return sum(max(w - counts[p], 0) for p, w in net._pre[t].items())

    return min(candidates, key=lambda t: (shortfall(t), net.postset_weight(t), t))


# -- S-components -----------------------------------------------------------


def _adjacent_transitions(net: AcceptingPetriNet, pset: frozenset[str]) -> set[str]:
    adj: set[str] = set()
    for p in pset:
        adj.update(net._place_pre[p])
        adj.update(net._place_post[p])
    return adj


def _induced_strongly_connected(net: AcceptingPetriNet, pset: frozenset, tset: set) -> bool:
    nodes = set(pset) | tset

    def reach(start: str, forward: bool) -> set[str]:
        seen = {start}
        stack = [start]
        while stack:
            node = stack.pop()
            if node in net.places:
                nbrs = net._place_post[node] if forward else net._place_pre[node]
                step = [t for t in nbrs if t in tset]
            else:
                nbrs = net._post[node] if forward else net._pre[node]
                step = [p for p in nbrs if p in pset]
            for nxt in step:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen

    if not nodes:
        return False
    start = next(iter(sorted(nodes)))
    return reach(start, True) >= nodes and reach(start, False) >= nodes


def check_s_component(net: AcceptingPetriNet, comp: SComponent) -> bool:
    """Re-check the defining invariants of a component against the net."""
    tset = _adjacent_transitions(net, comp.places)
    if tset != set(comp.transitions):
        return False
    for t in tset:
        ins = sum(w for p, w in net._pre[t].items() if p in comp.places)
        outs = sum(w for p, w in net._post[t].items() if p in comp.places)
        if ins != 1 or outs != 1:
            return False
    return _induced_strongly_connected(net, comp.places, tset)


def s_components(net: AcceptingPetriNet, budget: int = 100_000) -> list[SComponent]:
    """Minimal S-components found by bounded backtracking from each place.

    Grows place sets: any adjacent transition lacking an input (or output)
    place inside the set forces a branch over its candidate places. Branches
    where a transition gains two inputs or two outputs are dead. Raises
    BudgetExceeded (carrying partial results) when the node budget runs out.
    """
    found: dict[frozenset, SComponent] = {}
    nodes = 0

    def extend(pset: frozenset[str]) -> None:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(
                f"S-component search exceeded {budget} nodes",
                partial=_minimal(found),
            )
        adjacent = _adjacent_transitions(net, pset)
        for t in sorted(adjacent):
            ins = sum(w for p, w in net._pre[t].items() if p in pset)
            outs = sum(w for p, w in net._post[t].items() if p in pset)
            if ins > 1 or outs > 1:
                return  # adding places can only raise these counts
            if ins == 0:
                for p in sorted(net._pre[t]):
                    extend(pset | {p})
                return
            if outs == 0:
                for p in sorted(net._post[t]):
                    extend(pset | {p})
                return
        if pset in found:
            return
        if _induced_strongly_connected(net, pset, adjacent):
            found[pset] = SComponent(pset, frozenset(adjacent))

    for seed in sorted(net.places):
        extend(frozenset([seed]))
    return _minimal(found)


def _minimal(found: dict[frozenset, SComponent]) -> list[SComponent]:
    comps = list(found.values())
    keep = [
        c
        for c in comps
        if not any(other.places < c.places for other in comps)
    ]
    return sorted(keep, key=SComponent.sort_key)


# -- place bounds -----------------------------------------------------------

#: Value used in place_bounds results for places proven unbounded.
UNBOUNDED = math.inf


def place_bounds(
    net: AcceptingPetriNet, exploration_budget: int = 100_000
) -> dict[str, int | float | None]:
    """Per-place token bounds from a coverability exploration of M0.

    Returns an exact integer bound per place when the exploration completes,
    ``UNBOUNDED`` (inf) for places pumped by a dominated-ancestor loop, and
    ``None`` (unknown) for the rest when the budget runs out.
    """
    best: dict[str, float] = {p: 0 for p in net.places}
    unbounded: set[str] = set()
    expanded = 0
    complete = True

    def key(mark: Counter) -> tuple:
        return tuple(sorted((p, n) for p, n in mark.items() if n > 0))

    root = Counter(net.initial_marking)
    stack: list[tuple[Counter, tuple]] = [(root, ())]
    while stack:
        marking, ancestors = stack.pop()
        if expanded >= exploration_budget:
            complete = False
            break
        expanded += 1

        accelerated = Counter(marking)
        for anc in ancestors:
            anc_c = Counter(dict(anc))
            if anc_c != accelerated and all(
                accelerated[p] >= n for p, n in anc_c.items()
            ):
                for p in net.places:
                    if accelerated[p] > anc_c[p]:
                        accelerated[p] = UNBOUNDED
        for p, n in accelerated.items():
            if n is UNBOUNDED or n == UNBOUNDED:
                unbounded.add(p)
            elif n > best[p]:
                best[p] = n

        mark_key = key(accelerated)
        if mark_key in ancestors:
            continue
        chain = ancestors + (mark_key,)
        for t in sorted(net.transitions, reverse=True):
            pre = net._pre[t]
            if all(accelerated[p] >= w for p, w in pre.items()):
                child = Counter(accelerated)
                for p, w in pre.items():
                    if child[p] != UNBOUNDED:
                        child[p] = max(child[p] - w, 0)
                for p, w in net._post[t].items():
                    if child[p] != UNBOUNDED:
                        child[p] += w
                stack.append((child, chain))

    result: dict[str, int | float | None] = {}
    for p in net.places:
        if p in unbounded:
            result[p] = UNBOUNDED
        elif complete:
            result[p] = int(best[p])
        else:
            result[p] = None
    return result
