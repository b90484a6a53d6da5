"""Variational product-state Max-kSAT solver with classical baselines.

Boolean clauses become an even-degree spin polynomial whose degree-2d terms
are encoded as sparse symmetric matrices acting on the d-fold tensor power of
a real n-qubit state; a variational circuit minimizes their expectations under
approximate amplitude-uniformity constraints.  Solutions are extracted either
by the sample-efficient estimate (SEE) or by sign-rounding the amplitudes
(FST).  Brute force, random guessing, WalkSAT-style local search, and a
sum-of-squares relaxation serve as classical reference points.
"""

from .cnf import (
    Assignment,
    CnfInstance,
    Literal,
    count_satisfied,
    generate_random,
    parse_dimacs,
    to_dimacs,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DimacsError,
    SizeLimitError,
    SpinsatError,
)
from .poly import PolynomialObjective, SparseSymmetric, build_objective, evaluate, w_matrices
from .qsim import (
    Ansatz,
    HadamardConfig,
    RealState,
    expval,
    hadamard_test_im,
    pauli_z_expectations,
    prepare,
    uniform_state,
)
from .solution import SolutionReport, fst_round, observed_performance, see_value
from .sos import SosRelaxation, SosResult, build_relaxation, solve_sdp, sos_round
from .train import PopulationBalance, TrainConfig, TrainResult, gradient, loss

__version__ = "0.1.0"
