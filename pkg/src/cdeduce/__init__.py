"""Deduction about causality from partial knowledge."""

from cdeduce.bisim import (accuracy_leq, analogous, check_backward_bisimulation,
                           check_forward_bisimulation, compare_accuracy,
                           run_permutation_experiment)
from cdeduce.core import (Correspondence, Rel, Verdict, World, cr, generate_world, hb, par,
                          satisfies, world_models, world_models_star)
from cdeduce.microcosm import (EXTERNAL, INTERNAL, EvolutionStep, Microcosm, add,
                               add_hypothetical, member_event, remove, update,
                               update_hypothetical, validate)
from cdeduce.offline import offline_saturate, refute_by_addition, refute_by_update
from cdeduce.online import decide, initial_closure, verdict
from cdeduce.scenario import parse_scenario, run_scenario

__all__ = [
    "Correspondence", "Rel", "Verdict", "World", "cr", "generate_world", "hb", "par",
    "satisfies", "world_models", "world_models_star",
    "EXTERNAL", "INTERNAL", "EvolutionStep", "Microcosm", "add", "add_hypothetical",
    "member_event", "remove", "update", "update_hypothetical", "validate",
    "decide", "initial_closure", "verdict",
    "offline_saturate", "refute_by_addition", "refute_by_update",
    "accuracy_leq", "analogous", "check_backward_bisimulation", "check_forward_bisimulation",
    "compare_accuracy", "run_permutation_experiment",
    "parse_scenario", "run_scenario",
]
