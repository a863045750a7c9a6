"""Maximum-entropy partial information decomposition of three discrete sources.

The trivariate decomposition comes from four mutual-information minimizations
over polytopes of distributions that share the input's (target, source)
marginals. The same solver drives the bivariate decomposition and the
recovery of all eighteen lattice atoms.

>>> from pidmaxent import gate, pid
>>> round(pid(gate("xor-duplicate"))["CI"], 6)
1.0
"""
from .bivariate import BivariatePid, broja, broja_groups
from .distributions import (
    JointDistribution,
    MarginalSpec,
    from_json,
    from_pairs,
    from_tsv,
    gate,
    group_sources,
    marginal,
    random_simplex,
    read_distribution,
    to_json,
    to_tsv,
)
from .errors import InputError, PidError, SolverFailed
from .finer import ATOM_NAMES, FineAtoms, consistency_report, fine_decompose
from .info import conditional_entropy, conditional_mutual_information, entropy, mutual_information
from .lattice import Collection
from .pipeline import KEYS, PidResult, pid, qp_repair, run_modes
from .solver import BACKEND, SolveReport, Tolerances, build_program, solve

__version__ = "0.1.0"

__all__ = [
    "ATOM_NAMES", "BACKEND", "BivariatePid", "Collection", "FineAtoms", "InputError",
    "JointDistribution", "KEYS", "MarginalSpec", "PidError", "PidResult", "SolveReport",
    "SolverFailed", "Tolerances", "broja", "broja_groups", "build_program",
    "conditional_entropy", "conditional_mutual_information", "consistency_report",
    "entropy", "fine_decompose", "from_json", "from_pairs", "from_tsv", "gate",
    "group_sources", "marginal", "mutual_information", "pid", "qp_repair",
    "random_simplex", "read_distribution", "run_modes", "solve", "to_json", "to_tsv",
]
