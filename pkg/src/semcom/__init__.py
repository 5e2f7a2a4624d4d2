"""Goal-oriented semantic communication: scenario simulator and a top-down
curriculum of Q-learning pruning steps, with flat-RL and non-semantic baselines."""

from .beliefs import (
    BeliefSet,
    CostParams,
    CostVector,
    description_cost,
    episode_cost,
    normalize_costs,
    objective_contribution,
    satisfies_cardinality_constraint,
    subsets_of_cardinality,
)
from .dynamics import EndReason, StepOutcome, WorldState, begin_episode, is_perfect, listener_reconstruct, step
from .learner import (
    CurriculumLearner,
    CurriculumState,
    Hyperparams,
    QTable,
    action_space_step1,
    action_space_step_l,
    description_from_action,
    evaluate,
    extract_pruned_set,
    q_update,
    reward,
    run_cl,
    run_flat_rl,
    run_non_semantic,
    select_optimal_description,
)
from .metrics import MetricRecord, compare_methods, window_average
from .scenario import (
    Event,
    EventKind,
    Scenario,
    ScenarioConfig,
    TaskType,
    expected_perfect_length,
    generate_scenario,
)

__version__ = "0.1.0"
