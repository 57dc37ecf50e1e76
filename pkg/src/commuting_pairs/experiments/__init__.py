"""
Experiments: seeded instance generators, bound sweeps and the standalone studies.
"""

from .generators import (
    GeneratedInstance,
    build_instance,
    gen_instance,
    random_hermitian,
    random_unitary,
    recipes_for,
)
from .studies import (
    RotatedEventInstance,
    rotated_event_instance,
    rotated_event_study,
    rounding_study,
    warmup_study,
)
from .sweep import (
    CSV_HEADER,
    SweepResult,
    SweepRow,
    build_params_grid,
    calibrate_constant,
    parse_eps_grid,
    run_sweep,
    write_csv,
)

__all__ = [
    "GeneratedInstance",
    "build_instance",
    "gen_instance",
    "random_hermitian",
    "random_unitary",
    "recipes_for",
    "RotatedEventInstance",
    "rotated_event_instance",
    "rotated_event_study",
    "rounding_study",
    "warmup_study",
    "CSV_HEADER",
    "SweepResult",
    "SweepRow",
    "build_params_grid",
    "calibrate_constant",
    "parse_eps_grid",
    "run_sweep",
    "write_csv",
]
