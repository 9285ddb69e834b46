"""Simulation, analytics, and exact verification for age-biased random
graph processes (preferential and uniform attachment), with online greedy
matching / independent-set observers and their limit laws."""

from .process import (
    Fenwick,
    LoopsVariant,
    Model,
    ProcessConfig,
    ProcessState,
    Selection,
    StepOutcome,
    advance_step,
    attachment_distribution,
    init_process,
    run,
)
from .observers import (
    DescendantObserver,
    IndependentSetObserver,
    MatchingObserver,
    RootStep,
    SnapshotSeries,
    geometric_schedule,
    record_snapshot,
)
from .analytics import (
    BetaComponent,
    BetaMixture,
    ConstantKind,
    LimitConstant,
    PointMass,
    asymptotic_constant,
    beta_mixture_descendant_law,
    betainc_regularized,
    descendant_limit_law,
    drift_value,
    min_uniform_law,
    mixture_cdf,
    mixture_moment,
    r_uam_matching,
    rho_pam_matching,
    w_independent,
)
from .exact import (
    enumeration_oracle,
    expected_increments_exact,
    factorial_moments_check,
    falling_factorial,
    loop_free_factor,
    rising_factorial,
    step_law_exact,
    stirling_unsigned,
    verify_martingale_step,
    verify_stirling_identity,
)
from .coupling import (
    CoupledRun,
    RetainedGraph,
    collapse,
    coupled_run,
    descendant_count,
    descendant_coupling_check,
    run_fine_process,
    transition_equivalence_check,
)
from .harness import (
    ConfigError,
    ExperimentReport,
    ExperimentSpec,
    empirical_moments,
    emit_csv,
    emit_report,
    ks_statistic,
    parse_config,
    run_experiment,
    run_single,
    run_trials,
)
from .rng import Xoshiro256PP, derive_trial_seed

__version__ = "1.0.0"
