"""Numerical geometry of 3-dimensional semidirect products.

Subpackages cover the group and its canonical left-invariant metric
(`group`, `metric`), curvature of parametric surfaces and mean-convex
elliptical cylinders (`surfaces`), discrete least-area graphs over convex
domains (`meshing`, `plateau`), and reproducible experiment sweeps with
CSV/JSON/OBJ export (`experiments`, `reports`, `cli`).
"""

from .group import (
    GroupSpec,
    GroupSpecError,
    NegativeParameter,
    NonZeroTrace,
    beta_floor,
    exp_zA,
    exp_zA_series,
    identity_point,
    inverse,
    left_frame,
    milnor_d,
    multiply,
    nonunimodular_spec,
    normalize_spec,
    project_pi,
    right_frame,
    spec_from_dict,
    spec_from_json,
    unimodular_spec,
)
from .metric import (
    DNotLessThanOne,
    StepTooLarge,
    appendix_norms,
    apply_isometry_rotation_pi,
    apply_phi_s,
    christoffel_at,
    connection_frame,
    distance_to_vertical_geodesic,
    eigen_data,
    eigenfield_norm,
    geodesic_shoot,
    metric_at,
    path_length,
    speed,
)

__version__ = "0.1.0"
