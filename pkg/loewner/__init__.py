# ==============================================================================
# loewner
# Cadenas de Loewner en la bola unidad de C^n: generadores, transición,
# ecuaciones de coeficientes, límite de la cadena y teoría espiral.
# ==============================================================================

from .chains import (
    ChainEvaluation, asymptotic_necessary_condition, chain_jacobian_at_origin, chain_limit,
    check_growth_bound, check_subordination, coefficient_recovery_check, growth_profile,
    parametric_limit, sphere_sup, taylor_coefficients, univalence_spot_check,
)
from .coefficients import (
    CoefficientSolution, bk_split, compute_Nk, residual_check, resonance_report,
    solve_chain_coefficients, solve_polybounded,
)
from .generators import (
    GeneratorSpec, PolynomialAutonomous, PolynomialTimeDependent, Pushforward, TimeFunction,
    example_generator, generator_from_json, monomial_remark_generator, roper_suffridge_field,
    roper_suffridge_generator, validate,
)
from .linalg_spectral import OperatorA, SpectralSplit, analyze, exp_norm_certificates, matrix_exp, spectral_split
from .polyspace import HomPolyMap, bk_eigenbasis, build_Bk, compose_jacobian, exp_identities_check
from .spirallike import (
    AffineSolutionSet, TruncatedMap, noncompactness_witness, roper_suffridge_extend,
    solve_spirallike, spirallike_membership, spirallike_residual,
)
from .transition import Trajectory, example_transition, integrate, integrate_batch

__version__ = "1.0.0"
