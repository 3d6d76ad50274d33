"""Perfect dyadic operators on finite dyadic trees: decomposition, weight constants and condition checks."""
from .dyadic import (
    ROOT,
    CellVector,
    DomainError,
    DyadicInterval,
    DyadicTree,
    HaarExpansion,
    delta,
    haar_coefficient,
    haar_function,
    haar_synthesize,
    haar_transform,
    interval_average,
)
from .kernel import (
    KernelCoeffs,
    T1Coefficients,
    apply_component,
    apply_T,
    apply_Tstar,
    decay_kernel,
    decomposition_residual,
    t1_coefficients,
    testing_value,
    uniform_kernel,
)
from .weights import (
    Weight,
    WeightPair,
    a2_constant,
    ainfty_constant,
    carleson_constant,
    generate_weight,
    joint_a2_constant,
    rh1_constant,
)
from .spectral import DenseOperator, l2_norm, materialize, weighted_norm
from .conditions import (
    Battery,
    ConditionReport,
    OperatorConstants,
    apply_T0,
    buckley_sides,
    check_bilinear_embedding,
    check_lemma_be,
    check_littleoo,
    check_t1_implication,
    check_testing_implication,
    operator_constants,
    two_weight_battery,
    two_weight_battery_ainfty,
)

__version__ = "0.1.0"

__all__ = [
    "Battery",
    "CellVector",
    "ConditionReport",
    "DenseOperator",
    "DomainError",
    "DyadicInterval",
    "DyadicTree",
    "HaarExpansion",
    "KernelCoeffs",
    "OperatorConstants",
    "ROOT",
    "T1Coefficients",
    "Weight",
    "WeightPair",
    "a2_constant",
    "ainfty_constant",
    "apply_T",
    "apply_T0",
    "apply_Tstar",
    "apply_component",
    "buckley_sides",
    "carleson_constant",
    "check_bilinear_embedding",
    "check_lemma_be",
    "check_littleoo",
    "check_t1_implication",
    "check_testing_implication",
    "decay_kernel",
    "decomposition_residual",
    "delta",
    "generate_weight",
    "haar_coefficient",
    "haar_function",
    "haar_synthesize",
    "haar_transform",
    "interval_average",
    "joint_a2_constant",
    "l2_norm",
    "materialize",
    "operator_constants",
    "rh1_constant",
    "t1_coefficients",
    "testing_value",
    "two_weight_battery",
    "two_weight_battery_ainfty",
    "uniform_kernel",
    "weighted_norm",
]
