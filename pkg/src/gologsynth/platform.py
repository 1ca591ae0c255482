"""Device models and their composition with compiled programs.

A platform is a timed automaton over its own label vocabulary: fluent
labels describing what holds at a location, plus action labels for the
moves it reacts to.  Conventions expected by the composition:

  * every location carries an idle self-loop (no guard, no resets, no
    action label) whose symbol is the location's fluent observation;
  * every transition's non-action labels equal the target observation;
  * labels never collide with those of the action theory.

`build_plant` determinizes the compiled program, joins it with the
platform over the disjoint union of their alphabets, and drops letters
that would perform two actions at once; simultaneous actions are
expressed instead by consecutive steps at the same instant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .bat import BasicActionTheory
from .errors import GranularityError, InputError
from .pta import ProgramAutomaton, determinize
from .ta import (
    Granularity,
    TRUE_GUARD,
    TimedAutomaton,
    is_deterministic,
    product,
    reachable_part,
    ta_from_dict,
    ta_to_dict,
)


@dataclass(frozen=True)
class PlatformModel:
    automaton: TimedAutomaton
    fluents: tuple[str, ...] = ()
    actions: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "fluents", tuple(self.fluents))
        object.__setattr__(self, "actions", tuple(self.actions))
        both = set(self.fluents) & set(self.actions)
        if both:
            raise InputError(f"labels declared both fluent and action: {sorted(both)}")

    def labels(self) -> frozenset[str]:
        return frozenset(self.fluents) | frozenset(self.actions)


@dataclass(frozen=True)
class PlatformReport:
    ok: bool
    problems: tuple[str, ...]


def validate_platform(
    platform: PlatformModel,
    bat: BasicActionTheory | None = None,
    granularity: Granularity | None = None,
) -> PlatformReport:
    problems: list[str] = []
    auto = platform.automaton
    declared = platform.labels()
    action_set = frozenset(platform.actions)

    for tr in auto.transitions:
        extra = tr.symbol - declared
        if extra:
            problems.append(
                f"{tr.source}->{tr.target} uses undeclared labels: {sorted(extra)}"
            )
        if len(tr.symbol & action_set) > 1:
            problems.append(
                f"{tr.source}->{tr.target} performs several actions at once"
            )

    if bat is not None:
        theory_labels = frozenset(bat.atom_labels()) | frozenset(bat.action_labels())
        clash = declared & theory_labels
        if clash:
            problems.append(f"labels collide with the action theory: {sorted(clash)}")

    observation: dict[str, frozenset[str]] = {}
    for loc in sorted(auto.locations):
        idles = [
            tr
            for tr in auto.outgoing(loc)
            if tr.target == loc
            and not (tr.symbol & action_set)
            and tr.guard == TRUE_GUARD
            and not tr.resets
        ]
        if not idles:
            problems.append(f"location {loc} lacks an idle self-loop")
        elif len({tr.symbol for tr in idles}) > 1:
            problems.append(f"location {loc} has conflicting idle observations")
        else:
            observation[loc] = idles[0].symbol
    for tr in auto.transitions:
        target_obs = observation.get(tr.target)
        if target_obs is not None and tr.symbol - action_set != target_obs:
            problems.append(
                f"{tr.source}->{tr.target} labels disagree with the observation "
                f"at {tr.target}"
            )

    det, witness = is_deterministic(auto)
    if not det:
        a, b = witness
        problems.append(
            f"nondeterministic at {a.source} on {sorted(a.symbol)}: "
            f"targets {a.target} and {b.target} overlap"
        )

    if granularity is not None:
        for tr in auto.transitions:
            try:
                granularity.check_guard(tr.guard)
            except GranularityError as exc:
                problems.append(f"{tr.source}->{tr.target}: {exc}")

    return PlatformReport(ok=not problems, problems=tuple(problems))


def build_plant(
    compiled: ProgramAutomaton | TimedAutomaton,
    platform: PlatformModel,
    bat: BasicActionTheory,
) -> TimedAutomaton:
    auto = compiled.automaton if isinstance(compiled, ProgramAutomaton) else compiled
    det = determinize(auto)
    joint = product(det, platform.automaton)
    action_labels = frozenset(bat.action_labels()) | frozenset(platform.actions)
    kept = tuple(
        tr for tr in joint.transitions if len(tr.symbol & action_labels) <= 1
    )
    pruned = TimedAutomaton(joint.locations, joint.initial, joint.finals,
                            joint.clocks, kept)
    return reachable_part(pruned)


def platform_to_dict(platform: PlatformModel) -> dict:
    data = ta_to_dict(platform.automaton)
    data["fluents"] = sorted(platform.fluents)
    data["actions"] = sorted(platform.actions)
    return data


def platform_to_json(platform: PlatformModel) -> str:
    return json.dumps(platform_to_dict(platform), indent=2, sort_keys=True) + "\n"


def platform_from_dict(data: dict) -> PlatformModel:
    return PlatformModel(
        automaton=ta_from_dict(data),
        fluents=tuple(data.get("fluents", ())),
        actions=tuple(data.get("actions", ())),
    )


def platform_from_json(text: str) -> PlatformModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"platform is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("platform JSON must be an object")
    return platform_from_dict(data)
