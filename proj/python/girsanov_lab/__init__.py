"""Python face of the change-of-drift simulation toolkit.

The heavy lifting lives in the C++ extension; this package re-exports the
operations most useful from notebooks: matrix pseudo-inverses, seeded path
simulation, weight accumulation and the config-file experiment runner.
"""

from ._core import (
    ConfigError,
    RangeConditionError,
    __version__,
    brownian_increments,
    effective_sample_size,
    list_models,
    log_weight,
    martingale_mean,
    ou_exact_terminal,
    pseudo_inverse,
    reduce_diffusion,
    run_config_file,
    self_normalized_estimate,
    simulate,
    uniform_grid_nodes,
)

__all__ = [
    "ConfigError",
    "RangeConditionError",
    "__version__",
    "brownian_increments",
    "effective_sample_size",
    "list_models",
    "log_weight",
    "martingale_mean",
    "ou_exact_terminal",
    "pseudo_inverse",
    "reduce_diffusion",
    "run_config_file",
    "self_normalized_estimate",
    "simulate",
    "uniform_grid_nodes",
]
