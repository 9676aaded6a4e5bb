from ol_index_ident_core.kernels.arum import (
    EULER_GAMMA,
    CcpEstimate,
    ConfigurationError,
    SurplusEstimate,
    arum_lambda_gumbel,
    arum_surplus_gumbel,
    ccp_mc,
    smoothed_ccp_mc,
    surplus_mc,
    wdz_gap_mc,
    wdz_gradient_check,
)
from ol_index_ident_core.kernels.competing_risks import (
    competing_risks_lambda_gumbel,
    competing_risks_mc,
    competing_risks_parts,
    smoothed_competing_risks_mc,
)
from ol_index_ident_core.kernels.injectivity import (
    CollisionWitness,
    InjectivityReport,
    injectivity_probe,
)
from ol_index_ident_core.kernels.perturbed import (
    PerturbationSpec,
    PerturbedSolveError,
    entropy_perturbation,
    foc_residual,
    log_barrier_perturbation,
    perturbed_lambda,
    perturbed_solve,
)
from ol_index_ident_core.kernels.registry import build_kernel, kernel_stderr

__all__ = [
    "EULER_GAMMA",
    "CcpEstimate",
    "CollisionWitness",
    "ConfigurationError",
    "InjectivityReport",
    "PerturbationSpec",
    "PerturbedSolveError",
    "SurplusEstimate",
    "arum_lambda_gumbel",
    "arum_surplus_gumbel",
    "build_kernel",
    "ccp_mc",
    "competing_risks_lambda_gumbel",
    "competing_risks_mc",
    "competing_risks_parts",
    "entropy_perturbation",
    "foc_residual",
    "injectivity_probe",
    "kernel_stderr",
    "log_barrier_perturbation",
    "perturbed_lambda",
    "perturbed_solve",
    "smoothed_ccp_mc",
    "smoothed_competing_risks_mc",
    "surplus_mc",
    "wdz_gap_mc",
    "wdz_gradient_check",
]
