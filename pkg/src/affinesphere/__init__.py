"""Numerics for definite affine spheres and what they generate: the gauge
characterisation inside the Hitchin system, Painleve III radial reductions
with an isomonodromic 3x3 Lax pair, and explicit semi-flat Calabi-Yau
metrics with verifiable SU(3)-structure residuals."""

from . import gauge, geometry, hessian, matalg3, painleve, pdesolve
from .gauge import (
    GaugeData,
    RealForm,
    RealityMode,
    build_affine_sphere_ansatz,
    build_first_ansatz,
    build_toda_ansatz,
    build_tzitzeica_ansatz,
    build_wang_ansatz,
    check_prop42,
    check_theorem11,
    classify_real_form,
    hitchin_residual,
    lax_commutator_coeffs,
    toda_residual,
)
from .geometry import (
    assemble_g_omega,
    cone_point,
    cy_coframe,
    frame_loop_defect,
    integrate_frame,
    remark2_gauge_check,
    structure_matrices,
    su3_structure_residuals,
)
from .hessian import (
    GraphFunction,
    dual_ma_residual,
    graph_metric,
    legendre,
    tzitzeica_residual,
)
from .matalg3 import ETA, in_su21, min_poly_is_t2, normalize_higgs_pair, star
from .painleve import (
    PIII_AFFINE_SPHERE,
    PIIIParams,
    RadialSolution,
    integrate_piii,
    isomonodromy_residual,
    lax_pair_at,
    piii_rhs,
    radial_to_psi,
    reduction_params,
)
from .pdesolve import (
    CubicDifferential,
    ScalarGrid,
    affine_sphere_residual,
    liouville_psi,
    radial_n3_first_integral,
    solve_affine_sphere,
    travelling_wave_profile,
    tzitzeica_march,
)

__version__ = "0.1.0"
