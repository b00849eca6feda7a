"""MMST simulations of two-level systems in a 1D multimode cavity."""

from ._core import (
    SystemConfig,
    FitResult,
    centered_first_mode,
    fgr_rate,
    mode_frequencies,
    run_quantum,
    run_ensemble,
    fit_exponential,
    fit_biexponential,
    effective_rate,
    delay_time,
    delay_reference,
    dicke_ladder_population,
    scenario_names,
    run_scenario,
)

__all__ = [
    "SystemConfig",
    "FitResult",
    "centered_first_mode",
    "fgr_rate",
    "mode_frequencies",
    "run_quantum",
    "run_ensemble",
    "fit_exponential",
    "fit_biexponential",
    "effective_rate",
    "delay_time",
    "delay_reference",
    "dicke_ladder_population",
    "scenario_names",
    "run_scenario",
]
