"""State estimation from banks of one-bit threshold sensors.

Linear and nonlinear Kalman-like filters that correct only on sensors whose
observed bit disagrees with the predicted bit, with guaranteed covariance
bounds under the threshold-crossing uncertainty, plus baselines, scenarios,
a Monte Carlo harness, and test oracles.
"""

from .baselines import (SwitchSet, clairvoyant_kf_step, open_loop_step,
                        switch_klf_step, switch_set)
from .errors import ConfigurationError, NumericalError
from .harness import (FilterTrace, McReport, Scenario, affine_exactness_error,
                      build_scenario, dominance_oracle, nonlinear_scenario,
                      o2_scenario, parameter_scan_oracle,
                      random_linear_instance, random_nonlinear_instance,
                      run_monte_carlo, run_trace, trace_objective,
                      worker_count)
from .innovation import InnovationSet, innovation_set, predicted_bits
from .lbklf import (FilterState, LbklfStepReport, choose_beta, compute_alpha,
                    lbklf_gain, lbklf_step, lbklf_update, predict)
from .models import (LinearModel, NonlinearModel, Trajectory, binary_output,
                     simulate)
from .nbklf import (NbklfStepReport, choose_xi, compute_epsilon, nbklf_gain,
                    nbklf_step, nbklf_update)
from .unscented import (DEFAULT_UT, SigmaSet, UtParams, sigma_points,
                        ut_cross_covs, ut_predict_sensed, ut_predict_state)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "NumericalError",
    "LinearModel", "NonlinearModel", "Trajectory", "binary_output", "simulate",
    "InnovationSet", "innovation_set", "predicted_bits",
    "FilterState", "LbklfStepReport", "predict", "compute_alpha", "choose_beta",
    "lbklf_gain", "lbklf_update", "lbklf_step",
    "UtParams", "DEFAULT_UT", "SigmaSet", "sigma_points",
    "ut_predict_state", "ut_predict_sensed", "ut_cross_covs",
    "NbklfStepReport", "compute_epsilon", "choose_xi", "nbklf_gain",
    "nbklf_update", "nbklf_step",
    "SwitchSet", "switch_set", "open_loop_step", "clairvoyant_kf_step",
    "switch_klf_step",
    "Scenario", "McReport", "FilterTrace", "o2_scenario", "nonlinear_scenario",
    "build_scenario", "run_monte_carlo", "run_trace", "dominance_oracle",
    "parameter_scan_oracle", "trace_objective", "random_linear_instance",
    "random_nonlinear_instance", "affine_exactness_error", "worker_count",
    "__version__",
]
