"""weylkit: matrix Herglotz functions, boundary values, and extension calculus."""
from __future__ import annotations

from weylkit._version import __version__
from weylkit.errors import (
    DomainError,
    IllConditionedTransformError,
    JacobiConvergenceError,
    NotStrictError,
    NumericalError,
    PoleError,
    ValidationError,
    WeylkitError,
)
from weylkit.intervals import IntervalSet, verify_ac_lemmas
from weylkit.linalg import HermitianMatrix, eigh, fro_norm, matrix_function, op_norm, rank_eps
from weylkit.measures import (
    OperatorMeasure,
    ac_multiplicity,
    ac_support,
    evaluate_measure,
    is_subordinate,
    lebesgue_decompose,
    measure_from_json,
    measure_to_json,
    spectrally_equivalent,
    spectrally_subordinate,
)
from weylkit.nevanlinna import (
    BoundaryLimit,
    Conjugation,
    DirectSum,
    IntegralModel,
    KreinModelSL,
    KreinTransform,
    LimitConfig,
    MultiplicityProfile,
    NeumannModelSL,
    NevanlinnaFunction,
    RegularizedSqrtModel,
    Sandwich,
    SqrtModel,
    StieltjesInversion,
    ac_spectrum,
    boundary_limit,
    evaluate,
    herglotz_margin,
    invariant_max_normal,
    max_normal,
    multiplicity_profile,
    node_from_json,
    node_to_json,
    sandwich,
    stieltjes_invert,
    support_set,
    symmetry_check,
)
from weylkit.report import Report, render_report, run
from weylkit.scene import Scene, load_scene, parse_scene, parse_scene_text
from weylkit.sturm_liouville import (
    NormalBoundReport,
    SLModel,
    friedrichs_profile,
    gamma_gram,
    krein_parameter,
    krein_weyl,
    neumann_weyl,
    normal_bound_check,
    re_im_sqrt_shift,
    regularized_weyl,
    weyl,
)
from weylkit.transforms import (
    ComparisonVerdict,
    SelfAdjointRelation,
    compare_extensions,
    conjugate,
    direct_sum,
    krein_transform,
    regularize,
    relation_from_json,
    relation_project,
    relation_to_json,
)
from weylkit.verify import (
    CheckResult,
    VerifyReport,
    builtin_model_names,
    default_bundle,
    verify_suite,
)

import types as _types

__all__ = sorted(
    name
    for name, obj in list(globals().items())
    if not name.startswith("_")
    and name != "annotations"
    and not isinstance(obj, _types.ModuleType)
) + ["__version__"]
