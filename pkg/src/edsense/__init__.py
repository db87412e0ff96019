"""Energy-detector spectrum sensing over multi-user Nakagami-m fading.

Closed-form and simulated detection/false-alarm probabilities for a classical
energy detector sharing a band with several independently active primary
transmitters, plus threshold solving and ROC generation.
"""

from ._backend import BACKEND
from .closed_form import (
    EnergyThreshold,
    SensingProbabilities,
    cdf_all_idle,
    cdf_given_occupancy,
    cdf_given_sigma,
    cdf_rayleigh,
    cdf_single_pu,
    detection_probability,
    false_alarm_probability,
    sensing_probabilities,
    solve_threshold,
)
from .gamma_mixture import (
    GammaComponent,
    GammaMixture,
    XiTable,
    merge_equal_scales,
    mixture_cdf,
    mixture_mgf,
    mixture_pdf,
    xi_coefficients,
)
from .monte_carlo import (
    EstimateWithCI,
    SimConfig,
    estimate_pd_pfa,
    estimate_roc,
    sample_statistics,
    sample_statistics_fixed_occ,
    simulate_statistic,
    wilson_interval,
)
from .scenario import (
    OccupancySet,
    PuProfile,
    RawLink,
    Scenario,
    active_mixture,
    enumerate_occupancies,
    load_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from .specfun import (
    QuadratureSettings,
    ext_inc_gamma,
    ext_inc_gamma_scaled,
    reg_lower_gamma,
    reg_upper_gamma,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "EnergyThreshold",
    "EstimateWithCI",
    "GammaComponent",
    "GammaMixture",
    "OccupancySet",
    "PuProfile",
    "QuadratureSettings",
    "RawLink",
    "Scenario",
    "SensingProbabilities",
    "SimConfig",
    "XiTable",
    "active_mixture",
    "cdf_all_idle",
    "cdf_given_occupancy",
    "cdf_given_sigma",
    "cdf_rayleigh",
    "cdf_single_pu",
    "detection_probability",
    "enumerate_occupancies",
    "estimate_pd_pfa",
    "estimate_roc",
    "ext_inc_gamma",
    "ext_inc_gamma_scaled",
    "false_alarm_probability",
    "load_scenario",
    "merge_equal_scales",
    "mixture_cdf",
    "mixture_mgf",
    "mixture_pdf",
    "reg_lower_gamma",
    "reg_upper_gamma",
    "sample_statistics",
    "sample_statistics_fixed_occ",
    "scenario_from_dict",
    "scenario_to_dict",
    "sensing_probabilities",
    "simulate_statistic",
    "solve_threshold",
    "wilson_interval",
    "xi_coefficients",
]
