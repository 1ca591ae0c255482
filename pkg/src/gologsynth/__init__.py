"""Golog-to-timed-automaton compilation and controller synthesis.

The pipeline, end to end:

1. `textparse.parse_domain` / `parse_program` read a finite-domain
   action theory and an agent program,
2. `pta.compile_program` turns the program into a clock-free automaton
   over atom/action labels,
3. `platform.build_plant` composes it with a timed platform model,
4. `synthesis.synthesize` produces a controller whose closed loop obeys
   the given timing constraints without cutting off program completion,
5. `validate.validate_controller` re-checks that claim independently.

`cli.main` wires these up behind a command line.
"""

from .bat import (
    BasicActionTheory,
    Precondition,
    SuccessorStateAxiom,
    WorldState,
    check_determinate,
    initial_state,
    poss,
    progress,
    replay,
)
from .errors import (
    BoundExceededError,
    DeclarationError,
    GranularityError,
    InputError,
    InternalError,
    UnrealizableError,
)
from .golog import (
    Act,
    Choice,
    Configuration,
    Interleave,
    Pick,
    Program,
    Seq,
    Star,
    Test,
    enumerate_traces,
    is_final,
    steps,
)
from .logic import Domain, GroundAtom, StandardName, Var, act, obj, perf
from .mtl import Interval, MtlFormula, Prop, SymbolIs, eval_word
from .platform import (
    PlatformModel,
    build_plant,
    platform_from_json,
    platform_to_json,
    validate_platform,
)
from .pta import ProgramAutomaton, compile_program, determinize, induced_trace
from .specta import SpecTracker, translate_spec
from .synthesis import SynthesisResult, partition_actions, synthesize
from .ta import (
    ClockConstraint,
    Granularity,
    TimedAutomaton,
    Transition,
    accepts,
    parallel_compose,
    product,
    reachable_part,
    ta_from_json,
    ta_to_json,
)
from .textparse import parse_constraints, parse_domain, parse_program
from .validate import ValidationReport, validate_controller

__all__ = [name for name in dir() if not name.startswith("_")]
