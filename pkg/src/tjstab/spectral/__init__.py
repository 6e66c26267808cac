"""Closed-form eigenvalue machinery: determinants, full systems, verdict."""
from .determinants import (
    case_III_limit,
    case_III_residual,
    case_IV_limit,
    case_IV_residual,
    d1_small_L_limit,
    d2_asymptote,
    d2_scaled,
    d2_small_L_limit,
    det_D1,
    det_D2,
    lemma_hypothesis,
    sa_residual_I,
    sa_residual_II,
    sa_residual_IV,
    xcot,
)
from .systems import (
    CASE_I,
    CASE_II,
    CASE_III,
    CASE_IV,
    CASES,
    CaseSolution,
    SpectralCase,
    assemble_full_system,
    singular_ratio,
)
from .verdict import (
    INCONCLUSIVE,
    STABLE,
    UNSTABLE,
    CaseScan,
    OracleCheck,
    Root,
    StabilityReport,
    oracle_check,
    scan_and_verdict,
)
