"""matchsim: a simulator and analysis toolkit for repeated assessment-matching
markets with moral hazard and two-sided adverse selection."""

from .errors import (AssumptionViolatedError, EnumerationCapError,
                     InvalidConfigError, LedgerIncompleteError,
                     MalformedPreferencesError, MatchsimError,
                     NonConstantTailError, OffGridEffortError, OutOfPhaseError)
from .market import (AssumptionCheck, DerivedConstants, GenerationConfig,
                     MarketInstance, NoiseModel, check_assumption,
                     derived_constants, generate_instance)
from .matching import (Matching, PreferenceList, assortative_matching,
                       blocking_pairs_reported, client_preferences_from_outputs,
                       gale_shapley, max_weight_assignment)
from .payments import (PaymentRule, settle_linear, settle_quadratic,
                       settle_stochastic_quadratic)
from .strategies import (MTBB, ConstantEffort, StochasticMTBB, Tabular,
                         WorkerLedger, enumerate_payoff_relevant_strategies,
                         mtbb_profile, stochastic_mtbb_profile, zero_effort,
                         zero_effort_profile)
from .engine import (FINITE_AVERAGE, LIMIT, OutcomeReport, SimulationTrace,
                     SlotRecord, long_run_values, play_slot, replicate)
from .mechanisms import (AVERAGE_OUTPUT, FILI, IILI, INITIAL_BELIEF,
                         MechanismSpec, OUTPUT_ONLY, RunResult, fili_assignment,
                         run_baseline_average_output, run_baseline_initial_belief,
                         run_baseline_output_only, run_fili, run_iili)
from .analysis import (BestResponseReport, BlockingPair, ComparisonRow,
                       EfficiencyReport, Prop3Report, RegretReport,
                       StabilityVerdict, ThetaExperimentReport, bbe_closed_form,
                       best_match_value, check_best_response,
                       check_long_run_stability, check_prop3_optimality,
                       incentive_compatible_optimum, measure_regret_scaling,
                       obedient_upper_bound, random_general_instance,
                       run_appendix_i_comparison, run_theta_bound_experiment,
                       theta_bound, uniform_cdf)
from .instances import (counterexample_instance, manipulation_instance,
                        rate_experiment_instance)

__version__ = "0.1.0"
