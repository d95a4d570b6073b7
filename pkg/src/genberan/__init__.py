"""Conditional survival estimation under right-censoring with soft
(probabilistic) censoring indicators."""

from .bandwidth import (BandwidthGrid, PairWeights, default_grid, loo_cv_score,
                        select_bandwidth, soft_pair_weights, useful_pairs)
from .curves import (Dataset, ObservedSample, StepFunction, SubDistributions,
                     SurvivalCurve, beran_fit, cumulative_hazard, curve_eval,
                     curve_quantile, gbe_fit, lemma1_gap, subdistributions)
from .errors import (AllInfeasible, ConfigError, DegenerateTail,
                     EmptyAfterFiltering, EmptyNeighborhood, GenBeranError,
                     MissingColumn, NonFiniteLoss, NonNumericCell,
                     QuantileUnattained, ZeroVariance)
from .evaluation import (ComparisonSummary, MSECurve, StudyResult, TTestResult,
                         exponential_study_model, global_mise, mse_curve,
                         multidim_study_model, paired_t_test, run_study,
                         summarize_study, theoretical_variance_exponential,
                         variance_diagnostic)
from .kernels import (KernelSpec, density_estimate, kernel_eval, nw_weights,
                      profile_l2_squared)
from .probability import (FeatureScaler, LogisticModel, MLPModel,
                          NadarayaWatsonModel, OracleModel, ProbabilityModel,
                          TrainingConfig, fit_logistic, fit_mlp,
                          fit_nadaraya_watson, load_model, predict,
                          prior_indicator, save_model)
from .synthetic import (ExponentialModelParams, MultiDimModel,
                        MultiDimModelParams,
                        SimulationConfig, SyntheticSample, erf,
                        oracle_p_exponential, oracle_p_multidim,
                        replication_rng, sample_exponential, sample_multidim,
                        true_F_exponential, true_F_multidim)

__version__ = "0.1.0"
