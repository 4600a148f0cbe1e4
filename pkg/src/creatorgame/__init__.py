"""Repeated game between a learning recommendation platform and strategic
content producers: policies, exact and Monte Carlo evaluation, equilibrium
verification, welfare optimization, and bound checkers."""

from .bestresponse import (
    BestResponseResult,
    DeviationSet,
    NashCertificate,
    best_response_defect,
    candidate_profile,
    candidate_row,
    defect_row,
    deviation_gain,
    punishuserutility_candidate,
    verify_epsilon_nash,
)
from .bounds import (
    BoundReport,
    EffortBound,
    eta_threshold,
    fd_symmetric_derivatives,
    mt_bound,
    softmax_shift_bound,
    symmetric_derivatives,
    thm31_effort_bound,
    thm32_effort_bound,
    weighted_tail_sum,
)
from .core import (
    ConfigError,
    FeedbackMode,
    GameConfig,
    HistoryRecord,
    StrategyProfile,
    UserDistribution,
    load_config,
    load_profile,
    mean_user,
    naive_effort_cap,
    rng_stream,
    sample_user,
    serialize_config,
    serialize_profile,
)
from .experiments import SweepSpec, builtin_sweeps, run_sweep
from .policies import (
    LinExp3,
    LinHedge,
    PlatformPolicy,
    PolicyState,
    PunishHedge,
    PunishLinDirectionHedge,
    PunishUserUtility,
    SelectionDistribution,
    linexp3_estimate,
    linhedge_distribution,
    make_policy,
)
from .simulator import (
    EvalReport,
    GapReport,
    exact_eval_fullinfo,
    mc_eval,
    run_episode,
    selection_gap,
)
from .welfare import (
    WelfareSolution,
    closed_form_2user,
    criteria_shares,
    min_norm_meet,
    naive_effort_bound,
    solve_G,
    solve_W,
    theta_star,
    welfare_upper_bound,
)

__version__ = "0.1.0"
