from chaoscast.systems.generation import generate_instance
from chaoscast.systems.lorenz import (
    ConstantLorenzField,
    NonparametricLorenzField,
    VectorFieldSpec,
    eval_field,
    sample_initial_condition,
    sample_nonpar_field,
    sample_random_params,
)
from chaoscast.systems.seeding import derive_rng, derive_seed

__all__ = [
    "ConstantLorenzField",
    "NonparametricLorenzField",
    "VectorFieldSpec",
    "derive_rng",
    "derive_seed",
    "eval_field",
    "generate_instance",
    "sample_initial_condition",
    "sample_nonpar_field",
    "sample_random_params",
]
