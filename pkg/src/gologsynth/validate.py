"""Bounded exhaustive validation of a synthesized controller.

Deliberately avoids the game solver's viability machinery: the closed
loop is re-explored from scratch with its own state abstraction, and a
second pass samples concrete runs whose words are checked against the
constraints by direct evaluation.  Agreement between the two routes is
itself one of the checks.

Checks reported:
  controller-shape        deterministic, granular guards, resets its own clock
  constraint-safety       no accepted run violates a constraint
  environment-freedom     the controller never blocks an environment move
  completion-preservation wherever the bare plant could still finish the
                          program, the closed loop can too
  composition-agreement   sampled runs are accepted by the composed automaton
  effect-preservation     accepted words perform exactly program traces and
                          report the right fluents along the way
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from . import mtl
from .bat import BasicActionTheory, initial_state, progress
from .errors import GranularityError, InputError
from .golog import Program, enumerate_traces
from .pta import induced_trace
from .specta import translate_spec
from .synthesis import delay_chain, obligation_coords, renormalize
from .ta import (
    Granularity,
    TimedAutomaton,
    accepts,
    is_deterministic,
    parallel_compose,
    transition_key,
)


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    checks: tuple[Check, ...]
    states: int
    exhausted: bool
    words: int

    def summary(self) -> str:
        lines = []
        for check in self.checks:
            mark = "ok" if check.ok else "FAIL"
            tail = f"  ({check.detail})" if check.detail else ""
            lines.append(f"{mark:4s} {check.name}{tail}")
        scope = "exhaustive" if self.exhausted else "truncated"
        lines.append(f"     {self.states} states ({scope}), {self.words} sampled runs")
        return "\n".join(lines)


@dataclass(frozen=True)
class LoopState:
    plant_loc: str
    ctrl_loc: str
    clocks: tuple[tuple[str, Fraction], ...]
    tracker: frozenset


def _controller_shape(controller: TimedAutomaton, m: int, K: int) -> Check:
    det, witness = is_deterministic(controller)
    if not det:
        a, _b = witness
        return Check("controller-shape", False,
                     f"nondeterministic at {a.source} on {sorted(a.symbol)}")
    if len(controller.clocks) != 1:
        return Check("controller-shape", False,
                     f"expected one clock, found {sorted(controller.clocks)}")
    mu = Granularity(controller.clocks, m, K)
    for t in controller.transitions:
        try:
            mu.check_guard(t.guard)
        except GranularityError as exc:
            return Check("controller-shape", False, str(exc))
        if t.resets != controller.clocks:
            return Check("controller-shape", False,
                         f"{t.source}->{t.target} does not reset the clock")
    return Check("controller-shape", True)


def validate_controller(
    plant: TimedAutomaton,
    controller: TimedAutomaton,
    constraints,
    m: int,
    K: int,
    controllable: frozenset[str],
    *,
    bat: BasicActionTheory | None = None,
    program: Program | None = None,
    max_states: int = 200_000,
    max_words: int = 300,
    word_depth: int = 12,
    sample_cap: int = 60_000,
) -> ValidationReport:
    if plant.clocks & controller.clocks:
        raise InputError("plant and controller share clock names")
    constraints = tuple(constraints)
    tracker = translate_spec(constraints, Granularity(frozenset(), m, K))
    plant_out: dict[str, list] = {}
    for t in plant.transitions:
        plant_out.setdefault(t.source, []).append(t)
    ctrl_out: dict[tuple, list] = {}
    for t in controller.transitions:
        ctrl_out.setdefault((t.source, t.symbol), []).append(t)
    for ts in plant_out.values():
        ts.sort(key=transition_key)
    for ts in ctrl_out.values():
        ts.sort(key=transition_key)
    all_clocks = tuple(sorted(plant.clocks | controller.clocks))

    # Pass 1: canonical exploration of the closed loop.
    zeros = {c: Fraction(0) for c in all_clocks}
    vals0, state0 = renormalize(zeros, tracker.initial(), m, K)
    init = LoopState(plant.initial, controller.initial, vals0, state0)
    states = {init}
    queue = deque([init])
    successors: dict[LoopState, list[LoopState]] = {}
    safety_viol: list[str] = []
    env_viol: list[str] = []
    exhausted = True
    while queue:
        if len(states) > max_states:
            exhausted = False
            break
        here = queue.popleft()
        if here.plant_loc in plant.finals and here.ctrl_loc in controller.finals:
            if tracker.accepting(here.tracker) and len(safety_viol) < 5:
                safety_viol.append(
                    f"accepted at {here.plant_loc} with a violated constraint")
        coords = dict(here.clocks)
        for name, _node, value, _ci in obligation_coords(here.tracker):
            coords[name] = value
        seen_here = set()
        for delta, advanced in delay_chain(coords, m, K):
            for tp in plant_out.get(here.plant_loc, ()):
                if not tp.guard.satisfied(advanced):
                    continue
                partners = [tc for tc in ctrl_out.get((here.ctrl_loc, tp.symbol), ())
                            if tc.guard.satisfied(advanced)]
                if not partners:
                    if not (tp.symbol & controllable) and len(env_viol) < 5:
                        env_viol.append(
                            f"{sorted(tp.symbol)} blocked at {here.plant_loc}"
                            f"/{here.ctrl_loc} after {delta}")
                    continue
                stepped = tracker.step(here.tracker, tp.symbol, delta)
                for tc in partners:
                    resets = tp.resets | tc.resets
                    new_vals = {c: Fraction(0) if c in resets else advanced[c]
                                for c in all_clocks}
                    nv, ns = renormalize(new_vals, stepped, m, K)
                    succ = LoopState(tp.target, tc.target, nv, ns)
                    if succ not in seen_here:
                        seen_here.add(succ)
                        successors.setdefault(here, []).append(succ)
                    if succ not in states:
                        states.add(succ)
                        queue.append(succ)

    closed_final = {s for s in states
                    if s.plant_loc in plant.finals and s.ctrl_loc in controller.finals}
    can_reach_final = _backward(states, successors, closed_final)

    # Plant alone, same abstraction, no controller and no tracker.
    plant_can_finish = _plant_reach(plant, plant_out, m, K, max_states)
    completion_viol: list[str] = []
    for s in states:
        if not exhausted:
            break
        pvals = {c: v for c, v in dict(s.clocks).items() if c in plant.clocks}
        nv, _ = renormalize(pvals, frozenset(), m, K)
        key = (s.plant_loc, nv)
        if plant_can_finish.get(key, False) and not can_reach_final.get(s, False):
            if len(completion_viol) < 5:
                completion_viol.append(
                    f"plant could finish from {s.plant_loc} but the loop cannot")

    # Pass 2: concrete runs, judged by direct formula evaluation.
    closed = parallel_compose(plant, controller)
    words, word_states = _sample_words(
        plant, controller, plant_out, ctrl_out, tracker, all_clocks,
        m, K, max_words, word_depth, sample_cap)
    mtl_viol: list[str] = []
    agree_viol: list[str] = []
    for word in words:
        for phi in constraints:
            if not mtl.eval_word(word, phi):
                if len(mtl_viol) < 5:
                    mtl_viol.append(f"{phi!r} fails on a sampled run")
                break
        if not accepts(closed, word) and len(agree_viol) < 5:
            agree_viol.append("sampled run rejected by the composed automaton")

    effect = _effect_check(words, bat, program, word_depth)

    checks = (
        _controller_shape(controller, m, K),
        Check("constraint-safety", not safety_viol and not mtl_viol,
              "; ".join(safety_viol + mtl_viol)),
        Check("environment-freedom", not env_viol, "; ".join(env_viol)),
        Check("completion-preservation", not completion_viol,
              "; ".join(completion_viol)),
        Check("composition-agreement", not agree_viol, "; ".join(agree_viol)),
        effect,
    )
    return ValidationReport(
        ok=all(c.ok for c in checks),
        checks=checks,
        states=len(states) + word_states,
        exhausted=exhausted,
        words=len(words),
    )


def _backward(states, successors, goals) -> dict:
    preds: dict = {s: [] for s in states}
    for s in states:
        for t in successors.get(s, ()):
            if t in preds:
                preds[t].append(s)
    flag = {s: s in goals for s in states}
    work = deque(s for s in states if flag[s])
    while work:
        node = work.popleft()
        for p in preds[node]:
            if not flag[p]:
                flag[p] = True
                work.append(p)
    return flag


def _plant_reach(plant, plant_out, m: int, K: int, max_states: int) -> dict:
    zeros = {c: Fraction(0) for c in plant.clocks}
    nv, _ = renormalize(zeros, frozenset(), m, K)
    init = (plant.initial, nv)
    seen = {init}
    queue = deque([init])
    successors: dict[tuple, list] = {}
    while queue and len(seen) <= max_states:
        loc, clocks = queue.popleft()
        vals = dict(clocks)
        for delta, advanced in delay_chain(vals, m, K):
            for t in plant_out.get(loc, ()):
                if not t.guard.satisfied(advanced):
                    continue
                new_vals = {c: Fraction(0) if c in t.resets else advanced[c]
                            for c in vals}
                nv, _ = renormalize(new_vals, frozenset(), m, K)
                succ = (t.target, nv)
                successors.setdefault((loc, clocks), []).append(succ)
                if succ not in seen:
                    seen.add(succ)
                    queue.append(succ)
    goals = {s for s in seen if s[0] in plant.finals}
    return _backward(seen, successors, goals)


def _sample_words(plant, controller, plant_out, ctrl_out, tracker,
                  all_clocks, m, K, max_words, word_depth, sample_cap):
    """Concrete closed-loop runs with real timestamps.

    Breadth-first, but pruned through the renormalised abstraction (a
    few visits per abstract state) so completing runs show up at their
    shortest length instead of drowning in idle interleavings."""
    start = (plant.initial, controller.initial,
             tuple((c, Fraction(0)) for c in all_clocks),
             Fraction(0), (), tracker.initial())
    queue = deque([start])
    visits: dict[tuple, int] = {}
    words = []
    explored = 0
    while queue and len(words) < max_words and explored < sample_cap:
        pl, cl, clocks, now, word, tstate = queue.popleft()
        explored += 1
        if word and pl in plant.finals and cl in controller.finals:
            words.append(word)
        if len(word) >= word_depth:
            continue
        coords = dict(clocks)
        for name, _node, value, _ci in obligation_coords(tstate):
            coords[name] = value
        for delta, advanced in delay_chain(coords, m, K):
            for tp in plant_out.get(pl, ()):
                if not tp.guard.satisfied(advanced):
                    continue
                stepped = None
                for tc in ctrl_out.get((cl, tp.symbol), ()):
                    if not tc.guard.satisfied(advanced):
                        continue
                    if stepped is None:
                        stepped = tracker.step(tstate, tp.symbol, delta)
                    resets = tp.resets | tc.resets
                    new_clocks = tuple(
                        (c, Fraction(0) if c in resets else advanced[c])
                        for c in all_clocks)
                    nv, ns = renormalize(dict(new_clocks), stepped, m, K)
                    key = (tp.target, tc.target, nv, ns)
                    stamp = visits.get(key, 0)
                    if stamp >= 3:
                        continue
                    visits[key] = stamp + 1
                    queue.append((tp.target, tc.target, new_clocks,
                                  now + delta,
                                  word + ((tp.symbol, now + delta),),
                                  stepped))
    return words, explored


def _effect_check(words, bat, program, word_depth) -> Check:
    if bat is None or program is None:
        return Check("effect-preservation", True, "skipped: no program given")
    action_labels = bat.action_labels()
    atom_labels = frozenset(bat.atom_labels())
    enum = enumerate_traces(bat, program, word_depth)
    problems: list[str] = []
    for word in words:
        try:
            actions = induced_trace(word, action_labels)
        except InputError as exc:
            problems.append(str(exc))
            break
        if actions not in enum.traces:
            problems.append(
                "accepted run performs " +
                (", ".join(repr(a) for a in actions) or "nothing") +
                ", which is not a completed program trace")
            break
        state = initial_state(bat)
        for symbol, _time in word:
            hits = sorted(label for label in symbol if label in action_labels)
            if hits:
                state = progress(state, action_labels[hits[0]], bat)
            if symbol & atom_labels != frozenset(state.labels()):
                problems.append("run reports fluents that disagree with the theory")
                break
        if problems:
            break
    return Check("effect-preservation", not problems, "; ".join(problems))
