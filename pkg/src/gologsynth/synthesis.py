"""Controller synthesis over a deterministic plant and metric constraints.

The game state bundles a plant location, exact rational clock values and
the constraint tracker state.  Values are renormalised after every step
to the canonical representative of their joint region, which keeps the
state space finite without giving up exactness: guards and interval
endpoints are granular, so truth of every comparison is invariant under
the renormalisation.

Time is factored into delay classes of the controller's own clock:
exactly k/m, strictly between k/m and (k+1)/m, or beyond K/m.  Within
one class the world may still cross region boundaries of other clocks,
so a class-guarded move can have several outcomes; the solver tracks
sets of possible states (beliefs) and demands safety for all of them.

A state set is viable when: accepted prefixes never violate the
constraints; every environment move leads to a viable set; and whenever
the bare plant could still complete the program, the closed loop can
too.  The controller enables every controllable move that stays viable,
with guards over one fresh clock reset on each transition, adjacent
delay classes with equal outcome coalesced into intervals.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .errors import BoundExceededError, InputError, UnrealizableError
from .specta import SpecTracker, translate_spec
from .ta import (
    ClockConstraint,
    Granularity,
    TimedAutomaton,
    Transition,
    is_deterministic,
    region_of,
    region_sample,
    symbol_key,
    transition_key,
)


@dataclass(frozen=True)
class AlphabetPartition:
    controllable: frozenset[str]
    environment: frozenset[str]


def partition_actions(action_labels, controllable_prefixes=("s_",)) -> AlphabetPartition:
    """Split action labels into agent-initiated and world-resolved ones.
    Labels matching none of the prefixes count as environment."""
    prefixes = tuple(controllable_prefixes)
    ctrl = frozenset(a for a in action_labels if a.startswith(prefixes))
    return AlphabetPartition(controllable=ctrl,
                             environment=frozenset(action_labels) - ctrl)


# --- delay classes -------------------------------------------------------------


def delay_class(delta: Fraction, m: int, K: int) -> tuple[str, int]:
    scaled = delta * m
    if scaled > K:
        return ("gt", K)
    if scaled.denominator == 1:
        return ("eq", int(scaled))
    return ("in", math.floor(scaled))


def class_rank(cls: tuple[str, int], K: int) -> int:
    kind, k = cls
    if kind == "eq":
        return 2 * k
    if kind == "in":
        return 2 * k + 1
    return 2 * K + 1


def rank_to_class(rank: int, K: int) -> tuple[str, int]:
    if rank >= 2 * K + 1:
        return ("gt", K)
    return ("eq", rank // 2) if rank % 2 == 0 else ("in", rank // 2)


def coalesced_guard(first: tuple[str, int], last: tuple[str, int],
                    clock: str, m: int, K: int) -> ClockConstraint:
    """Guard selecting the contiguous stretch of delay classes from
    `first` to `last` inclusive."""
    if first == last and first[0] == "eq":
        return ClockConstraint(((clock, "==", Fraction(first[1], m)),))
    terms = []
    kind, k = first
    if kind == "eq":
        if k > 0:
            terms.append((clock, ">=", Fraction(k, m)))
    elif kind == "in":
        terms.append((clock, ">", Fraction(k, m)))
    else:
        terms.append((clock, ">", Fraction(K, m)))
    kind, k = last
    if kind == "eq":
        terms.append((clock, "<=", Fraction(k, m)))
    elif kind == "in":
        terms.append((clock, "<", Fraction(k + 1, m)))
    return ClockConstraint(tuple(terms))


_CHAINS: dict[tuple, list] = {}


def delay_chain(values: dict[str, Fraction], m: int, K: int):
    """Representative delays, one per region of the jointly elapsing
    valuation, refined so that every delay class up to `gt` appears.

    Returns a list of (delay, advanced valuation) pairs starting at 0.
    The walk runs on an integer tick grid fine enough for the inputs
    and their midpoint subdivisions, keeping rational arithmetic out of
    the loop.
    """
    memo_key = (tuple(sorted(values.items())), m, K)
    cached = _CHAINS.get(memo_key)
    if cached is not None:
        return cached
    denom = 1
    for v in values.values():
        denom = math.lcm(denom, (v * m).denominator)
    unit = 2 * denom                       # ticks per 1/m of clock value
    ticks = {c: int(v * m * unit) for c, v in values.items()}
    top = K * unit

    total = 0
    cur = ticks
    chain = [(total, cur)]
    while any(t <= top for t in cur.values()):
        step = None
        on_boundary = False
        for t in cur.values():
            if t > top:
                continue
            r = t % unit
            if r == 0:
                on_boundary = True
                d = unit
            else:
                d = unit - r
            if step is None or d < step:
                step = d
        if on_boundary:
            # boundary ticks are even multiples of the grid, and equal
            # shifts keep tick parities aligned, so halving stays exact
            step //= 2
        total += step
        cur = {c: t + step for c, t in cur.items()}
        chain.append((total, cur))
    # walk on through the remaining delay classes up to beyond-K
    while total <= top:
        rem = total % unit
        bump = denom if rem == 0 else unit - rem
        total += bump
        cur = {c: t + bump for c, t in cur.items()}
        chain.append((total, cur))
    per = m * unit                         # ticks per whole clock unit
    out = [(Fraction(t, per), {c: Fraction(v, per) for c, v in vals.items()})
           for t, vals in chain]
    _CHAINS[memo_key] = out
    return out


# --- game states ---------------------------------------------------------------


@dataclass(frozen=True)
class Core:
    """One fully tracked game state."""

    location: str
    clocks: tuple[tuple[str, Fraction], ...]
    tracker: frozenset


# sort keys and region snapping run millions of times over a small pool
# of distinct inputs, so everything below is memoised by value (formula
# nodes by identity, pinned so ids stay unambiguous)

_NODE_KEYS: dict[int, tuple] = {}


def _node_key(node) -> str:
    entry = _NODE_KEYS.get(id(node))
    if entry is None or entry[0] is not node:
        entry = (node, repr(node))
        _NODE_KEYS[id(node)] = entry
    return entry[1]


def _config_key(config):
    return tuple(sorted((_node_key(node), value) for node, value in config))


_TRACKER_KEYS: dict[frozenset, tuple] = {}


def _tracker_key(state):
    cached = _TRACKER_KEYS.get(state)
    if cached is None:
        cached = tuple(sorted(_config_key(c) for c in state))
        _TRACKER_KEYS[state] = cached
    return cached


def core_key(core: Core):
    return (core.location, core.clocks, _tracker_key(core.tracker))


_OBLIGATION_COORDS: dict[frozenset, tuple] = {}


def obligation_coords(tracker_state):
    """Deterministic coordinate names for every obligation value."""
    cached = _OBLIGATION_COORDS.get(tracker_state)
    if cached is not None:
        return cached
    coords = []
    for ci, config in enumerate(sorted(tracker_state, key=_config_key)):
        ordered = sorted(config, key=lambda nv: (_node_key(nv[0]), nv[1]))
        for oi, (node, value) in enumerate(ordered):
            coords.append((f"_g{ci}_{oi}", node, value, ci))
    cached = tuple(coords)
    _OBLIGATION_COORDS[tracker_state] = cached
    return cached


_RENORMALIZED: dict[tuple, tuple] = {}


def renormalize(clock_vals: dict[str, Fraction], tracker_state, m: int, K: int):
    """Snap a joint valuation and the obligation values to the canonical
    representative of their region.  Comparisons against granular
    constants, and the relative order of fractional parts, survive."""
    key = (tuple(sorted(clock_vals.items())), tracker_state, m, K)
    cached = _RENORMALIZED.get(key)
    if cached is not None:
        return cached
    coords = dict(clock_vals)
    obls = obligation_coords(tracker_state)
    for name, _node, value, _ci in obls:
        coords[name] = value
    mu = Granularity(frozenset(coords), m, K)
    sample = region_sample(region_of(coords, mu))
    new_vals = tuple(sorted((c, sample[c]) for c in clock_vals))
    # seed every config index up front: a config whose obligations are
    # all discharged is empty, carries no coordinates, and must survive
    # (it is what makes the state accepting)
    rebuilt: dict[int, set] = {ci: set() for ci in range(len(tracker_state))}
    for name, node, _value, ci in obls:
        rebuilt[ci].add((node, sample[name]))
    new_state = frozenset(frozenset(v) for v in rebuilt.values())
    cached = (new_vals, new_state)
    _RENORMALIZED[key] = cached
    return cached


def canonical_core(location: str, plant_vals: dict[str, Fraction],
                   tracker_state, m: int, K: int) -> Core:
    new_vals, new_state = renormalize(plant_vals, tracker_state, m, K)
    return Core(location, new_vals, new_state)


@dataclass(frozen=True)
class Move:
    rank: int
    cls: tuple[str, int]
    transition: Transition
    target: Core


class Arena:
    """Move generator with canonical-state memoisation."""

    def __init__(self, plant: TimedAutomaton, tracker: SpecTracker,
                 m: int, K: int, controllable: frozenset[str]):
        self.plant = plant
        self.tracker = tracker
        self.m = m
        self.K = K
        self.controllable = frozenset(controllable)
        self._outgoing = {}
        for t in plant.transitions:
            self._outgoing.setdefault(t.source, []).append(t)
        self._moves: dict[Core, tuple[Move, ...]] = {}

    def initial_core(self) -> Core:
        zeros = {c: Fraction(0) for c in self.plant.clocks}
        return canonical_core(self.plant.initial, zeros,
                              self.tracker.initial(), self.m, self.K)

    def is_controllable(self, transition: Transition) -> bool:
        return bool(transition.symbol & self.controllable)

    def moves(self, core: Core) -> tuple[Move, ...]:
        cached = self._moves.get(core)
        if cached is not None:
            return cached
        plant_clocks = dict(core.clocks)
        coords = dict(plant_clocks)
        for name, _node, value, _ci in obligation_coords(core.tracker):
            coords[name] = value
        # A zero coordinate rides along so the walk stops at every delay
        # class boundary too, not only at clock/obligation boundaries;
        # skipping a class here would leave a hole in extracted guards.
        delta_coord = "_delta"
        while delta_coord in coords:
            delta_coord += "_"
        coords[delta_coord] = Fraction(0)
        grouped: dict[tuple, set] = {}
        for delta, advanced in delay_chain(coords, self.m, self.K):
            now = {c: advanced[c] for c in plant_clocks}
            cls = delay_class(delta, self.m, self.K)
            for t in self._outgoing.get(core.location, ()):
                if not t.guard.satisfied(now):
                    continue
                stepped = self.tracker.step(core.tracker, t.symbol, delta)
                new_vals = {c: Fraction(0) if c in t.resets else now[c]
                            for c in plant_clocks}
                succ = canonical_core(t.target, new_vals, stepped, self.m, self.K)
                grouped.setdefault((cls, t), set()).add(succ)
        moves = []
        for (cls, t), targets in grouped.items():
            rank = class_rank(cls, self.K)
            for succ in targets:
                moves.append(Move(rank, cls, t, succ))
        moves.sort(key=lambda mv: (mv.rank, transition_key(mv.transition),
                                   core_key(mv.target)))
        result = tuple(moves)
        self._moves[core] = result
        return result


# --- solving -------------------------------------------------------------------

Belief = frozenset


def belief_key(belief: Belief):
    return tuple(sorted(core_key(c) for c in belief))


@dataclass(frozen=True)
class SynthesisResult:
    controller: TimedAutomaton
    clock: str
    cores: int
    beliefs: int
    viable: int


def _fresh_clock(plant: TimedAutomaton) -> str:
    name = "t_c"
    while name in plant.clocks:
        name += "_"
    return name


def synthesize(plant: TimedAutomaton, constraints, m: int, K: int,
               controllable: frozenset[str], *,
               node_budget: int = 1_000_000) -> SynthesisResult:
    det, witness = is_deterministic(plant)
    if not det:
        a, b = witness
        raise InputError(f"plant is nondeterministic at {a.source} "
                         f"on {sorted(a.symbol)}")
    mu_plant = Granularity(plant.clocks, m, K)
    for t in plant.transitions:
        mu_plant.check_guard(t.guard)
    tracker = translate_spec(constraints, Granularity(frozenset(), m, K))
    arena = Arena(plant, tracker, m, K, controllable)

    # Full state graph, for reachability of program completion.
    init = arena.initial_core()
    cores = {init}
    queue = deque([init])
    while queue:
        core = queue.popleft()
        if len(cores) > node_budget:
            raise BoundExceededError(
                f"state budget {node_budget} exceeded while exploring",
                frontier=len(queue))
        for mv in arena.moves(core):
            if mv.target not in cores:
                cores.add(mv.target)
                queue.append(mv.target)
    finals = plant.finals
    can_finish = _backward_reach(
        cores,
        lambda c: [mv.target for mv in arena.moves(c)],
        lambda c: c.location in finals)

    # Belief graph: one node per set of states the controller cannot
    # tell apart after observing symbols and its own clock.
    init_belief: Belief = frozenset([init])
    beliefs = {init_belief}
    edges: dict[Belief, dict] = {}
    queue = deque([init_belief])
    while queue:
        belief = queue.popleft()
        if len(beliefs) + len(cores) > node_budget:
            raise BoundExceededError(
                f"state budget {node_budget} exceeded while exploring",
                frontier=len(queue))
        # Keyed by symbol, not by plant transition: the controller sees
        # the labels and its own clock, nothing else, so same-symbol
        # moves during one delay class are indistinguishable.
        grouped: dict[tuple, set] = {}
        for core in belief:
            for mv in arena.moves(core):
                grouped.setdefault(
                    (mv.rank, mv.cls, mv.transition.symbol), set()).add(mv.target)
        out = {}
        for (rank, cls, symbol), targets in grouped.items():
            succ: Belief = frozenset(targets)
            out[(rank, cls, symbol)] = succ
            if succ not in beliefs:
                beliefs.add(succ)
                queue.append(succ)
        edges[belief] = out

    def belief_location(belief: Belief) -> str:
        locs = {c.location for c in belief}
        if len(locs) != 1:
            raise InputError("internal: belief mixes plant locations")
        return next(iter(locs))

    def belief_final(belief: Belief) -> bool:
        return belief_location(belief) in finals

    def belief_bad(belief: Belief) -> bool:
        return belief_final(belief) and any(
            tracker.accepting(c.tracker) for c in belief)

    def belief_can_finish(belief: Belief) -> bool:
        return any(can_finish[c] for c in belief)

    viable = {b for b in beliefs if not belief_bad(b)}
    reasons: dict[Belief, str] = {
        b: "a completed run here already violates the constraints"
        for b in beliefs if belief_bad(b)}

    while True:
        usable: dict[Belief, list[Belief]] = {
            b: [tgt for tgt in edges[b].values() if tgt in viable]
            for b in viable}
        reach_fin = _backward_reach(
            viable, lambda b: usable[b], belief_final)
        drop = set()
        for b in viable:
            for (rank, cls, symbol), tgt in edges[b].items():
                if not (symbol & arena.controllable) and tgt not in viable:
                    drop.add(b)
                    reasons[b] = ("the environment can force "
                                  f"{sorted(symbol)} into a losing state")
                    break
            else:
                if belief_can_finish(b) and not reach_fin[b]:
                    drop.add(b)
                    reasons[b] = ("the program could still complete here "
                                  "but no safe completion remains")
        if not drop:
            break
        viable -= drop

    if init_belief not in viable:
        raise UnrealizableError(
            "no controller exists: " + reasons.get(
                init_belief, "the initial state is not viable"))

    controller = _extract(plant, arena, edges, viable, init_belief, m, K)
    return SynthesisResult(controller=controller, clock=_fresh_clock(plant),
                           cores=len(cores), beliefs=len(beliefs),
                           viable=len(viable))


def _backward_reach(nodes, successors, is_goal) -> dict:
    """Least fixpoint of 'some successor chain hits a goal node',
    propagated over reverse edges so every node is settled once."""
    preds: dict = {n: [] for n in nodes}
    flag = {}
    work = deque()
    for n in nodes:
        hit = bool(is_goal(n))
        flag[n] = hit
        if hit:
            work.append(n)
    for n in nodes:
        for s in successors(n):
            if s in preds:
                preds[s].append(n)
    while work:
        node = work.popleft()
        for p in preds[node]:
            if not flag[p]:
                flag[p] = True
                work.append(p)
    return flag


def _extract(plant, arena: Arena, edges, viable, init_belief, m: int, K: int):
    clock = _fresh_clock(plant)
    names: dict[Belief, str] = {init_belief: "n0"}
    order = [init_belief]
    queue = deque([init_belief])
    kept: dict[Belief, list] = {}
    while queue:
        belief = queue.popleft()
        out = []
        for (rank, cls, symbol), tgt in sorted(
                edges[belief].items(),
                key=lambda kv: (kv[0][0], symbol_key(kv[0][2]))):
            if tgt not in viable:
                continue
            out.append((rank, cls, symbol, tgt))
            if tgt not in names:
                names[tgt] = f"n{len(names)}"
                order.append(tgt)
                queue.append(tgt)
        kept[belief] = out
    transitions = []
    for belief in order:
        runs: dict[tuple, list] = {}
        for rank, cls, symbol, tgt in kept[belief]:
            runs.setdefault((symbol, tgt), []).append(rank)
        for (symbol, tgt), ranks in sorted(
                runs.items(),
                key=lambda kv: (symbol_key(kv[0][0]), names[kv[0][1]])):
            ranks.sort()
            start = ranks[0]
            prev = ranks[0]
            for r in ranks[1:] + [None]:
                if r is not None and r == prev + 1:
                    prev = r
                    continue
                guard = coalesced_guard(rank_to_class(start, K),
                                        rank_to_class(prev, K), clock, m, K)
                transitions.append(Transition(names[belief], symbol, guard,
                                              frozenset([clock]), names[tgt]))
                if r is not None:
                    start = prev = r
    finals = frozenset(names[b] for b in order
                       if next(iter(b)).location in plant.finals)
    return TimedAutomaton(
        locations=frozenset(names.values()),
        initial="n0",
        finals=finals,
        clocks=frozenset([clock]),
        transitions=tuple(transitions),
    )
