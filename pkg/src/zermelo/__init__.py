"""Randers metrics from Zermelo navigation data: metric calculus, hypersurface
curvature and isoparametric-function checks on Riemannian space forms."""

from .config import DEFAULT, Tolerances
from .hypersurfaces import (
    CurvatureReport,
    Immersion,
    UnsupportedHypothesis,
    catalog,
    induced_metric,
    shape_operator,
    unit_normals,
    verify_shift,
)
from .isoparametric import (
    Setting,
    assess,
    builtin_field,
    check_direct,
    check_navigation,
    check_riemannian,
    check_sphere_criterion,
    check_transfer,
    fit_profiles,
    homogeneous_field,
    parsed_field,
    sample_level_set,
    sphere_calculus,
    sphere_setting,
    survey,
)
from .randers import ConsistencyError, NavigationDomainError, NavigationSpec, RandersMetric, randers_from
from .riemannian import (
    SpaceForm,
    VectorFieldSpec,
    affine_field,
    classify_field,
    custom_field,
    projective_field,
    sphere_rotation_field,
)

__version__ = "0.1.0"
