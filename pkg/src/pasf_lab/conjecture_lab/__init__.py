"""Search harnesses, solvers and certificate checks for the open problems."""
from .decomposition import decomposition_search
from .dynamics import dynamical_build
from .inequalities import (
    NormProfile,
    fundamental_inequality_check,
    inverse_design_search,
    majorization_check,
    witness_pasf,
)
from .partitions import (
    akemann_weaver_search,
    feichtinger_search,
    r_eps_search,
    verify_certificate,
    weaver_search,
)
from .retrieval import retrieval_check
from .scaling import ScalingResult, kothe_lorch_check, scaling_solve
from .search import (
    HOLDS,
    INCONCLUSIVE,
    REFUTED,
    Budget,
    PartitionCertificate,
    SearchReport,
    bell_number,
    restricted_growth_strings,
)

__all__ = [
    "Budget",
    "HOLDS",
    "INCONCLUSIVE",
    "NormProfile",
    "PartitionCertificate",
    "REFUTED",
    "ScalingResult",
    "SearchReport",
    "akemann_weaver_search",
    "bell_number",
    "decomposition_search",
    "dynamical_build",
    "feichtinger_search",
    "fundamental_inequality_check",
    "inverse_design_search",
    "kothe_lorch_check",
    "majorization_check",
    "r_eps_search",
    "restricted_growth_strings",
    "retrieval_check",
    "scaling_solve",
    "verify_certificate",
    "weaver_search",
    "witness_pasf",
]
