"""Compilation of agent programs into clock-free automata.

Each location stands for a class of reachable configurations sharing the
same world state and the same remaining program up to canonical form.
Symbols expose the full atom labelling of the state reached, plus the
label of the action just performed; every location also carries a
self-loop with its bare state labelling so that composition partners can
move while the program sits still.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .bat import BasicActionTheory, WorldState, initial_state
from .errors import BoundExceededError, InputError
from .golog import Configuration, Program, canonical, is_final, steps
from .ta import TRUE_GUARD, TimedAutomaton, Transition, symbol_key


@dataclass(frozen=True)
class ProgramAutomaton:
    """A compiled program: the automaton plus, for every location other
    than the start marker, the (state, remaining program) it stands for."""

    automaton: TimedAutomaton
    configs: dict


START_LOCATION = "q0"


def compile_program(
    bat: BasicActionTheory,
    program: Program,
    *,
    max_locations: int = 100_000,
) -> ProgramAutomaton:
    program = canonical(program)
    init_state = initial_state(bat)
    first = (init_state, program)
    names: dict[tuple[WorldState, Program], str] = {first: "S0"}
    queue: deque[tuple[WorldState, Program]] = deque([first])
    transitions = []
    finals = []
    transitions.append(
        Transition(START_LOCATION, frozenset(init_state.labels()), TRUE_GUARD, (), "S0")
    )
    while queue:
        state, prog = queue.popleft()
        source = names[(state, prog)]
        here = frozenset(state.labels())
        transitions.append(Transition(source, here, TRUE_GUARD, (), source))
        if is_final(Configuration(state, (), prog), bat):
            finals.append(source)
        for cfg in steps(Configuration(state, (), prog), bat):
            action = cfg.trace[-1]
            key = (cfg.state, canonical(cfg.remaining))
            target = names.get(key)
            if target is None:
                if len(names) >= max_locations:
                    raise BoundExceededError(
                        f"program automaton exceeded {max_locations} locations",
                        frontier=len(queue),
                    )
                target = f"S{len(names)}"
                names[key] = target
                queue.append(key)
            symbol = frozenset(cfg.state.labels()) | {repr(action)}
            transitions.append(Transition(source, symbol, TRUE_GUARD, (), target))
    locations = (START_LOCATION,) + tuple(names.values())
    automaton = TimedAutomaton(
        locations=locations,
        initial=START_LOCATION,
        finals=tuple(sorted(set(finals))),
        clocks=(),
        transitions=tuple(transitions),
    )
    configs = {name: key for key, name in names.items()}
    return ProgramAutomaton(automaton=automaton, configs=configs)


def determinize(automaton: TimedAutomaton) -> TimedAutomaton:
    """Subset construction.  Only meaningful without clocks, which is the
    shape compile_program produces; guards would not survive it."""
    if automaton.clocks:
        raise InputError("determinization requires a clock-free automaton")
    by_source: dict[str, list[Transition]] = {}
    for tr in automaton.transitions:
        by_source.setdefault(tr.source, []).append(tr)

    def name_of(group: frozenset[str]) -> str:
        return "+".join(sorted(group))

    start = frozenset([automaton.initial])
    seen = {start: name_of(start)}
    order = [start]
    queue = deque([start])
    transitions = []
    while queue:
        group = queue.popleft()
        moves: dict[frozenset[str], set[str]] = {}
        for loc in group:
            for tr in by_source.get(loc, ()):
                moves.setdefault(tr.symbol, set()).add(tr.target)
        for symbol in sorted(moves, key=symbol_key):
            target = frozenset(moves[symbol])
            if target not in seen:
                seen[target] = name_of(target)
                order.append(target)
                queue.append(target)
            transitions.append(
                Transition(seen[group], symbol, TRUE_GUARD, (), seen[target])
            )
    final_set = set(automaton.finals)
    finals = tuple(sorted(seen[g] for g in order if g & final_set))
    return TimedAutomaton(
        locations=tuple(seen[g] for g in order),
        initial=seen[start],
        finals=finals,
        clocks=(),
        transitions=tuple(transitions),
    )


def induced_trace(word, action_labels: dict) -> tuple:
    """Project a timed word down to the action sequence it performs.

    action_labels maps label text to action names; a symbol may carry at
    most one of them."""
    out = []
    for symbol, _time in word:
        hits = sorted(label for label in symbol if label in action_labels)
        if len(hits) > 1:
            raise InputError(
                "symbol carries multiple action labels: " + ", ".join(hits)
            )
        if hits:
            out.append(action_labels[hits[0]])
    return tuple(out)
