"""Command line front end.

A project lives in one directory:

    domain.bat        name pools, initial sentences, poss and ssa clauses
    program.golog     the agent program
    platform.json     timed model of the execution platform (optional
                      for `compile`)
    constraints.mtl   timing constraints (optional for `compile` and
                      `compose`)

Subcommands: `check` validates the inputs, `compile` builds the program
automaton, `compose` builds the plant, `synthesize` emits a controller,
`verify` synthesizes and then independently validates the closed loop,
`simulate` random-walks the closed loop, and `trace-check` evaluates the
constraints on a recorded timed word.

Unless ``--granularity M K`` is given, the clock resolution 1/M is the
coarsest one expressing every platform guard and constraint endpoint,
and K is the largest scaled constant.

Exit codes: 0 success, 1 negative verdict (unrealizable, failed
validation, violated constraint), 2 malformed input, 3 exhausted
bounds.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from pathlib import Path

from . import mtl
from .bat import BasicActionTheory, check_determinate
from .errors import BoundExceededError, InputError, UnrealizableError
from .golog import Program
from .platform import PlatformModel, build_plant, platform_from_json, validate_platform
from .pta import compile_program
from .specta import translate_spec
from .synthesis import delay_chain, partition_actions, synthesize
from .ta import (
    Granularity,
    TimedAutomaton,
    check_word,
    parse_rational,
    render_rational,
    ta_from_json,
    ta_to_dot,
    ta_to_json,
)
from .textparse import parse_constraints, parse_domain, parse_program
from .validate import validate_controller

DOMAIN_FILE = "domain.bat"
PROGRAM_FILE = "program.golog"
PLATFORM_FILE = "platform.json"
CONSTRAINTS_FILE = "constraints.mtl"


@dataclass
class ProjectBundle:
    root: Path
    bat: BasicActionTheory
    program: Program
    platform: PlatformModel | None
    constraints: tuple[mtl.MtlFormula, ...]
    m: int
    K: int

    def vocabulary(self) -> frozenset[str]:
        labels = set(self.bat.atom_labels()) | set(self.bat.action_labels())
        if self.platform is not None:
            labels |= self.platform.labels()
        return frozenset(labels)


def _interval_constants(formula: mtl.MtlFormula) -> list[Fraction]:
    out: list[Fraction] = []
    stack = [formula]
    while stack:
        f = stack.pop()
        if isinstance(f, mtl.Until):
            out.append(f.interval.lower)
            if f.interval.upper is not None:
                out.append(f.interval.upper)
            stack += [f.left, f.right]
        elif isinstance(f, mtl.Not):
            stack.append(f.body)
        elif isinstance(f, (mtl.And, mtl.Or)):
            stack += [f.left, f.right]
    return out


def infer_granularity(platform: PlatformModel | None, constraints) -> tuple[int, int]:
    """Coarsest resolution covering every guard and interval endpoint."""
    consts: list[Fraction] = []
    if platform is not None:
        for t in platform.automaton.transitions:
            consts.extend(c for _, _, c in t.guard.terms)
    for f in constraints:
        consts.extend(_interval_constants(f))
    m = 1
    for c in consts:
        m = lcm(m, c.denominator)
    top = max((int(c * m) for c in consts), default=0)
    return m, max(top, 1)


def parse_bundle(
    root: Path,
    granularity: tuple[int, int] | None = None,
    *,
    need_platform: bool = False,
    need_constraints: bool = False,
) -> ProjectBundle:
    root = Path(root)
    if not root.is_dir():
        raise InputError(f"{root} is not a project directory")

    def read(name: str, required: bool) -> str | None:
        path = root / name
        if not path.is_file():
            if required:
                raise InputError(f"missing {path}")
            return None
        return path.read_text()

    bat = parse_domain(read(DOMAIN_FILE, True), str(root / DOMAIN_FILE))
    program = parse_program(read(PROGRAM_FILE, True), bat, str(root / PROGRAM_FILE))
    platform_text = read(PLATFORM_FILE, need_platform)
    platform = None if platform_text is None else platform_from_json(platform_text)

    labels = set(bat.atom_labels()) | set(bat.action_labels())
    if platform is not None:
        labels |= platform.labels()
    constraints_text = read(CONSTRAINTS_FILE, need_constraints)
    constraints: tuple[mtl.MtlFormula, ...] = ()
    if constraints_text is not None:
        constraints = tuple(parse_constraints(
            constraints_text, labels, str(root / CONSTRAINTS_FILE), bat=bat))

    if granularity is None:
        m, K = infer_granularity(platform, constraints)
    else:
        m, K = granularity
    return ProjectBundle(root, bat, program, platform, constraints, m, K)


# --- timed word serialization ---------------------------------------------------


def word_to_jsonable(word) -> list[dict]:
    return [{"labels": sorted(symbol), "time": render_rational(time)}
            for symbol, time in word]


def word_from_jsonable(data) -> tuple:
    if isinstance(data, dict) and isinstance(data.get("word"), list):
        data = data["word"]  # accept simulate output as-is
    if not isinstance(data, list):
        raise InputError("a timed word is a JSON array of steps")
    word = []
    for i, entry in enumerate(data):
        try:
            labels = entry["labels"]
            time = parse_rational(str(entry["time"]))
        except (TypeError, KeyError) as exc:
            raise InputError(f"step {i} needs 'labels' and 'time': {exc}") from exc
        if not isinstance(labels, list) or not all(isinstance(l, str) for l in labels):
            raise InputError(f"step {i}: labels must be strings")
        word.append((frozenset(labels), time))
    return check_word(word)


# --- commands -------------------------------------------------------------------


def _emit_automaton(args, automaton: TimedAutomaton, name: str) -> None:
    wrote = False
    if getattr(args, "json", None):
        Path(args.json).write_text(ta_to_json(automaton))
        wrote = True
    if getattr(args, "dot", None):
        Path(args.dot).write_text(ta_to_dot(automaton, name))
        wrote = True
    if not wrote:
        if getattr(args, "format", "json") == "dot":
            sys.stdout.write(ta_to_dot(automaton, name))
        else:
            sys.stdout.write(ta_to_json(automaton))


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def cmd_check(args) -> int:
    bundle = parse_bundle(args.bundle, args.granularity)
    problems: list[str] = []
    lines: list[str] = [f"granularity: steps of 1/{bundle.m} up to {bundle.K}/{bundle.m}"]

    report = check_determinate(bundle.bat)
    if not report.consistent:
        problems.append("initial sentences are inconsistent")
    elif not report.determinate:
        undecided = ", ".join(map(repr, report.witnesses))
        problems.append(f"initial sentences leave atoms undecided: {undecided}")
    else:
        lines.append("ok: initial sentences pin down one world")

    if bundle.platform is None:
        lines.append(f"note: no {PLATFORM_FILE}")
    else:
        mu = Granularity(bundle.platform.automaton.clocks, bundle.m, bundle.K)
        pr = validate_platform(bundle.platform, bundle.bat, mu)
        if pr.ok:
            lines.append("ok: platform model is well formed")
        problems.extend(pr.problems)

    if not bundle.constraints:
        lines.append(f"note: no {CONSTRAINTS_FILE}")
    else:
        translate_spec(bundle.constraints, Granularity(frozenset(), bundle.m, bundle.K))
        lines.append(f"ok: {len(bundle.constraints)} constraints fit the granularity")

    for line in lines:
        print(line)
    for problem in problems:
        print(f"problem: {problem}")
    return 1 if problems else 0


def cmd_compile(args) -> int:
    bundle = parse_bundle(args.bundle, args.granularity)
    compiled = compile_program(bundle.bat, bundle.program,
                               max_locations=args.max_locations)
    auto = compiled.automaton
    _note(f"program automaton: {len(auto.locations)} locations, "
          f"{len(auto.transitions)} transitions, {len(auto.finals)} final")
    _emit_automaton(args, auto, "program")
    return 0


def _plant_of(bundle: ProjectBundle, max_locations: int) -> TimedAutomaton:
    compiled = compile_program(bundle.bat, bundle.program, max_locations=max_locations)
    return build_plant(compiled, bundle.platform, bundle.bat)


def cmd_compose(args) -> int:
    bundle = parse_bundle(args.bundle, args.granularity, need_platform=True)
    plant = _plant_of(bundle, args.max_locations)
    _note(f"plant: {len(plant.locations)} locations, "
          f"{len(plant.transitions)} transitions, {len(plant.finals)} final")
    _emit_automaton(args, plant, "plant")
    return 0


def _controllable(bundle: ProjectBundle, prefixes) -> frozenset[str]:
    labels = set(bundle.bat.action_labels())
    if bundle.platform is not None:
        labels |= set(bundle.platform.actions)
    return partition_actions(labels, tuple(prefixes)).controllable


def cmd_synthesize(args) -> int:
    bundle = parse_bundle(args.bundle, args.granularity,
                          need_platform=True, need_constraints=True)
    plant = _plant_of(bundle, args.max_locations)
    result = synthesize(plant, bundle.constraints, bundle.m, bundle.K,
                        _controllable(bundle, args.controllable_prefix),
                        node_budget=args.node_budget)
    ctrl = result.controller
    _note(f"controller: {len(ctrl.locations)} locations, "
          f"{len(ctrl.transitions)} transitions "
          f"({result.viable}/{result.beliefs} viable beliefs, "
          f"{result.cores} game states)")
    _emit_automaton(args, ctrl, "controller")
    return 0


def cmd_verify(args) -> int:
    bundle = parse_bundle(args.bundle, args.granularity,
                          need_platform=True, need_constraints=True)
    plant = _plant_of(bundle, args.max_locations)
    controllable = _controllable(bundle, args.controllable_prefix)
    result = synthesize(plant, bundle.constraints, bundle.m, bundle.K,
                        controllable, node_budget=args.node_budget)
    report = validate_controller(
        plant, result.controller, bundle.constraints, bundle.m, bundle.K,
        controllable, bat=bundle.bat, program=bundle.program,
        word_depth=args.bound)
    print(report.summary())
    if getattr(args, "json", None):
        Path(args.json).write_text(ta_to_json(result.controller))
    return 0 if report.ok else 1


def _closed_loop_walk(plant: TimedAutomaton, controller: TimedAutomaton,
                      m: int, K: int, depth: int, rng: random.Random):
    plant_out: dict[str, list] = {}
    for t in plant.transitions:
        plant_out.setdefault(t.source, []).append(t)
    ctrl_out: dict[str, list] = {}
    for t in controller.transitions:
        ctrl_out.setdefault(t.source, []).append(t)

    vals = {c: Fraction(0) for c in plant.clocks | controller.clocks}
    ploc, cloc = plant.initial, controller.initial
    now = Fraction(0)
    word = []
    for _ in range(depth):
        options = []
        for delay, advanced in delay_chain(vals, m, K):
            for pt in plant_out.get(ploc, ()):
                if not pt.guard.satisfied(advanced):
                    continue
                for ct in ctrl_out.get(cloc, ()):
                    if ct.symbol == pt.symbol and ct.guard.satisfied(advanced):
                        options.append((delay, advanced, pt, ct))
        at_final = ploc in plant.finals and cloc in controller.finals
        if not options or (at_final and rng.random() < 0.4):
            break
        delay, advanced, pt, ct = rng.choice(options)
        now += delay
        resets = pt.resets | ct.resets
        vals = {c: (Fraction(0) if c in resets else v) for c, v in advanced.items()}
        ploc, cloc = pt.target, ct.target
        word.append((pt.symbol, now))
    accepted = ploc in plant.finals and cloc in controller.finals
    return tuple(word), accepted


def cmd_simulate(args) -> int:
    bundle = parse_bundle(args.bundle, args.granularity,
                          need_platform=True, need_constraints=True)
    plant = _plant_of(bundle, args.max_locations)
    if args.controller is not None:
        controller = ta_from_json(Path(args.controller).read_text())
    else:
        controller = synthesize(
            plant, bundle.constraints, bundle.m, bundle.K,
            _controllable(bundle, args.controllable_prefix),
            node_budget=args.node_budget).controller
    rng = random.Random(args.seed)
    word, accepted = _closed_loop_walk(plant, controller, bundle.m, bundle.K,
                                       args.bound, rng)
    print(json.dumps({
        "word": word_to_jsonable(word),
        "completed": accepted,
        "constraints": [
            {"constraint": repr(c), "holds": mtl.eval_word(word, c)}
            for c in bundle.constraints
        ],
    }, indent=2))
    return 0


def cmd_trace_check(args) -> int:
    bundle = parse_bundle(args.bundle, args.granularity, need_constraints=True)
    word = word_from_jsonable(json.loads(Path(args.word).read_text()))
    failures = 0
    for c in bundle.constraints:
        holds = mtl.eval_word(word, c)
        print(f"{'ok' if holds else 'VIOLATED'}: {c!r}")
        failures += 0 if holds else 1
    return 1 if failures else 0


# --- argument parsing -------------------------------------------------------------


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gologsynth",
        description="Compile agent programs to timed automata and synthesize "
                    "controllers against platform models and timing constraints.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, *, outputs=False, synth=False):
        sp.add_argument("bundle", type=Path, help="project directory")
        sp.add_argument("--granularity", nargs=2, type=int, metavar=("M", "K"),
                        default=None,
                        help="clock resolution 1/M with constants up to K/M "
                             "(default: inferred)")
        sp.add_argument("--max-locations", type=int, default=100_000,
                        help="program automaton size bound")
        if outputs:
            sp.add_argument("--format", choices=("json", "dot"), default="json",
                            help="stdout format for the resulting automaton")
            sp.add_argument("--json", type=Path, default=None,
                            help="write the resulting automaton as JSON here")
            sp.add_argument("--dot", type=Path, default=None,
                            help="write the resulting automaton as DOT here")
        if synth:
            sp.add_argument("--node-budget", type=int, default=1_000_000,
                            help="game state budget for synthesis")
            sp.add_argument("--controllable-prefix", action="append",
                            default=None, metavar="PREFIX",
                            help="label prefixes under the controller's command "
                                 "(default: s_)")

    sp = sub.add_parser("check", help="validate the project inputs")
    common(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("compile", help="compile the program to an automaton")
    common(sp, outputs=True)
    sp.set_defaults(func=cmd_compile)

    sp = sub.add_parser("compose", help="compose the program with the platform")
    common(sp, outputs=True)
    sp.set_defaults(func=cmd_compose)

    sp = sub.add_parser("synthesize", help="synthesize a controller")
    common(sp, outputs=True, synth=True)
    sp.set_defaults(func=cmd_synthesize)

    sp = sub.add_parser("verify", help="synthesize and validate the closed loop")
    common(sp, synth=True)
    sp.add_argument("--bound", type=int, default=12,
                    help="depth for sampled closed-loop runs")
    sp.add_argument("--json", type=Path, default=None,
                    help="also write the controller as JSON here")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("simulate", help="random-walk the closed loop")
    common(sp, synth=True)
    sp.add_argument("--controller", type=Path, default=None,
                    help="reuse a controller JSON instead of synthesizing")
    sp.add_argument("--bound", type=int, default=12, help="walk length")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("trace-check", help="evaluate constraints on a timed word")
    common(sp)
    sp.add_argument("--word", type=Path, required=True,
                    help="JSON file with the recorded timed word")
    sp.set_defaults(func=cmd_trace_check)

    return parser


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    if getattr(args, "controllable_prefix", None) is None and hasattr(args, "node_budget"):
        args.controllable_prefix = ["s_"]
    try:
        return args.func(args)
    except UnrealizableError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BoundExceededError as exc:
        print(f"bound exceeded: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
