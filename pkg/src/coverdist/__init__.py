"""Covering systems over Z and quadratic integer rings: exact coverage
checks, distortion measures with rational moment certificates, and
effective minimum-norm bounds."""

from .bounds import (
    BoundCertificate,
    ModuliCertificate,
    alpha_upper_bound,
    certify_moduli,
    class_measure_bound,
    effective_bound,
    eta1_major,
    eta2_major,
    m1_bound,
    m2_bound,
    mertens_sum_bound,
    rankin_W,
    verify_certificate,
)
from .distortion import (
    CertifyResult,
    DistortionProblem,
    DistortionState,
    MomentReport,
    RunResult,
    alpha,
    certify,
    check_problem,
    initial_state,
    mask_mass,
    moments,
    per_target_mass,
    run,
    step,
    target_mass,
)
from .errors import (
    CoverdistError,
    DeltaOutOfRange,
    DisallowedD,
    EnumerationTooLarge,
    IdealNotDividingQ,
    IndistinguishableModulus,
    InputError,
    MixedFields,
    NonSquarefree,
    NormTooLargeToFactor,
    PMinOnIndistinguishable,
    ResourceError,
    SearchBudgetExceeded,
    SoundnessError,
    UnitIdeal,
    UnitModulus,
    XNotPerfectSquare,
    YTooSmall,
    ZeroIdeal,
)
from .kernels import backend_name
from .ring import (
    FieldSpec,
    Ideal,
    PrimeIdeal,
    check_hnf,
    elem_add,
    elem_conj,
    elem_mul,
    elem_norm,
    elem_sub,
    factor_ideal,
    ideal_divides,
    ideal_from_gens,
    ideal_intersect,
    ideal_mul,
    ideal_norm,
    ideal_principal,
    in_class,
    in_ideal,
    is_distinguishable,
    make_field,
    p_min,
    pmin_with_exponent,
    prime_norms_up_to,
    primes_above,
    primes_up_to_norm,
    reduce,
    residue_at,
    residue_index,
    residues,
    unit_ideal,
)
from .system import (
    CongruenceClass,
    CoveringInstance,
    build_problem,
    build_targets,
    covers,
    multiplicity,
    resolve_delta_policy,
    resolve_policy_for_primes,
    target_mask,
    validate,
)

__version__ = "0.1.0"
