"""Loss assembly and variational minimization.

The loss combines the objective expectations with approximate amplitude
constraints:

    L = sum_d O_d + lambda * (C_pauli + O_P)

where O_d estimates <Psi^(d)| W^{-,(d)} |Psi^(d)> (exactly, or through the
emulated Hadamard test divided by alpha), C_pauli aggregates all Pauli-z
string expectations of length <= 2 (which vanish exactly on amplitude-uniform
states), and O_P is the population-balance expectation built from the row
sums of W^{-,(1)}.  Gradients come from the parameter-shift rule (exact for
the planar-rotation gates, applied per register for product-state terms) or
central finite differences.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import qsim, solution
from .cnf import Assignment
from .errors import ConfigError
from .poly import PolynomialObjective, SparseSymmetric, w_matrices

PENALTY_SQUARED = "squared"
PENALTY_SIGNED = "signed"
GRAD_PARAM_SHIFT = "parameter-shift"
GRAD_FINITE_DIFF = "finite-difference"
MODE_EXACT = "exact"
MODE_HADAMARD = "hadamard"

# shift for gates of the form exp(-i theta Y): eigenvalue gap 2, so pi/4
_SHIFT = math.pi / 4


@dataclass
class PopulationBalance:
    """Diagonal population-balancing generator P and its scale beta.

    P_ii = -(P_max - sum_j |W^{-,(1)}_ij|) with P_max = max_i sum_j W^{-,(1)}_ij;
    padded rows (indices >= num_y) have zero row sums.
    """

    diag: np.ndarray
    p_max: float
    beta: float
    matrix: SparseSymmetric = field(repr=False, default=None)

    def __post_init__(self):
        if self.matrix is None:
            m = SparseSymmetric(self.diag.size)
            for i, v in enumerate(self.diag):
                if v != 0.0:
                    m.add(i, i, float(v))
            self.matrix = m


def build_population_balance(w_minus_1: SparseSymmetric, beta: float) -> PopulationBalance:
    row_sums = w_minus_1.row_sums()
    p_max = float(row_sums.max()) if row_sums.size else 0.0
    diag = -(p_max - w_minus_1.row_abs_sums())
    return PopulationBalance(diag=diag, p_max=p_max, beta=beta)


@dataclass
class TrainConfig:
    """Hyperparameters for a training run."""

    lam: float = 1.0
    alpha: float = 0.01
    beta: Optional[float] = None  # defaults to alpha
    layers: Optional[int] = None  # defaults to 2n
    epochs: int = 100
    learning_rate: float = 0.05
    penalty: str = PENALTY_SQUARED
    grad_method: str = GRAD_PARAM_SHIFT
    fd_eps: float = 1e-4
    mode: str = MODE_EXACT
    taylor_order: int = 12
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.lam < 0:
            raise ConfigError("lambda must be nonnegative")
        if self.alpha <= 0:
            raise ConfigError("alpha must be positive")
        if self.penalty not in (PENALTY_SQUARED, PENALTY_SIGNED):
            raise ConfigError(f"unknown penalty form {self.penalty!r}")
        if self.grad_method not in (GRAD_PARAM_SHIFT, GRAD_FINITE_DIFF):
            raise ConfigError(f"unknown gradient method {self.grad_method!r}")
        if self.mode not in (MODE_EXACT, MODE_HADAMARD):
            raise ConfigError(f"unknown estimator mode {self.mode!r}")
        if self.beta is None:
            self.beta = self.alpha

    def resolve_layers(self, n: int) -> int:
        return self.layers if self.layers is not None else 2 * n


@dataclass
class TrainResult:
    """Per-epoch trajectories and the best rounded solution encountered."""

    losses: List[float]
    sees: List[float]
    fsts: List[int]
    best_fst: int
    best_epoch: int
    best_assignment: Assignment
    final_params: np.ndarray

    def to_json(self) -> str:
        payload = {
            "losses": self.losses,
            "sees": self.sees,
            "fsts": self.fsts,
            "best_fst": self.best_fst,
            "best_epoch": self.best_epoch,
            "best_assignment": [int(v) for v in self.best_assignment.y],
            "final_params": [float(v) for v in self.final_params],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def trajectory_csv(self) -> str:
        lines = ["epoch,loss,see,fst"]
        for e, (l, s, f) in enumerate(zip(self.losses, self.sees, self.fsts)):
            lines.append(f"{e},{l!r},{s!r},{f}")
        return "\n".join(lines) + "\n"


class _LossEngine:
    """Caches the W matrices, Pauli signs and estimator config for one run."""

    def __init__(self, obj: PolynomialObjective, pb: PopulationBalance, cfg: TrainConfig):
        self.obj = obj
        self.cfg = cfg
        self.pb = pb
        self.n = obj.qubits
        self.layers = cfg.resolve_layers(self.n)
        self.weights: List[Tuple[int, SparseSymmetric]] = []
        for d in range(1, obj.degree + 1):
            _, wm = w_matrices(obj, d)
            if len(wm):
                self.weights.append((d, wm))
        self._hcfg_obj = None
        self._hcfg_pop = None
        if cfg.mode == MODE_HADAMARD:
            self._hcfg_obj = qsim.HadamardConfig(alpha=cfg.alpha, taylor_order=cfg.taylor_order)
            self._hcfg_pop = qsim.HadamardConfig(alpha=cfg.beta, taylor_order=cfg.taylor_order)

    def prepare(self, theta: np.ndarray) -> qsim.RealState:
        return qsim.prepare(qsim.Ansatz(self.n, self.layers, theta))

    def objective_term(self, states: List[qsim.RealState], W: SparseSymmetric) -> float:
        if self._hcfg_obj is not None:
            return qsim.hadamard_test_im_registers(states, W, self._hcfg_obj) / self.cfg.alpha
        return qsim.expval_registers(states, W)

    def population_term(self, state: qsim.RealState) -> float:
        if len(self.pb.matrix) == 0:
            return 0.0
        if self._hcfg_pop is not None:
            return qsim.hadamard_test_im_registers([state], self.pb.matrix, self._hcfg_pop) / self.cfg.beta
        return float(self.pb.diag @ (state.amplitudes**2))

    def penalty_value(self, pauli: np.ndarray) -> float:
        if self.cfg.penalty == PENALTY_SQUARED:
            return float(pauli @ pauli)
        return float(pauli.sum())

    def loss(self, state: qsim.RealState) -> float:
        total = 0.0
        for d, wm in self.weights:
            total += self.objective_term([state] * d, wm)
        pauli = qsim.pauli_z_expectations(state)
        total += self.cfg.lam * (self.penalty_value(pauli) + self.population_term(state))
        return total

    def loss_from_theta(self, theta: np.ndarray) -> float:
        return self.loss(self.prepare(theta))

    def gradient_fd(self, theta: np.ndarray) -> np.ndarray:
        eps = self.cfg.fd_eps
        grad = np.empty_like(theta)
        for j in range(theta.size):
            probe = theta.copy()
            probe[j] = theta[j] + eps
            up = self.loss_from_theta(probe)
            probe[j] = theta[j] - eps
            down = self.loss_from_theta(probe)
            grad[j] = (up - down) / (2 * eps)
        return grad

    def gradient_ps(self, theta: np.ndarray) -> np.ndarray:
        """Exact parameter-shift gradient.

        Every loss piece is an expectation of a fixed Hermitian operator in
        the prepared state (or a smooth function of such expectations), so the
        shift rule f'(t) = f(t + pi/4) - f(t - pi/4) applies gate by gate.
        Product-state terms get one shift per register while the other
        registers stay at the unshifted state.
        """
        state0 = self.prepare(theta)
        pauli0 = qsim.pauli_z_expectations(state0)
        grad = np.empty_like(theta)
        for j in range(theta.size):
            probe = theta.copy()
            probe[j] = theta[j] + _SHIFT
            plus = self.prepare(probe)
            probe[j] = theta[j] - _SHIFT
            minus = self.prepare(probe)

            g = 0.0
            for d, wm in self.weights:
                for t in range(d):
                    regs = [state0] * d
                    regs[t] = plus
                    up = self.objective_term(regs, wm)
                    regs[t] = minus
                    down = self.objective_term(regs, wm)
                    g += up - down

            d_pauli = qsim.pauli_z_expectations(plus) - qsim.pauli_z_expectations(minus)
            if self.cfg.penalty == PENALTY_SQUARED:
                d_penalty = float(2.0 * pauli0 @ d_pauli)
            else:
                d_penalty = float(d_pauli.sum())
            d_pop = self.population_term(plus) - self.population_term(minus)
            grad[j] = g + self.cfg.lam * (d_penalty + d_pop)
        return grad

    def gradient(self, theta: np.ndarray) -> np.ndarray:
        if self.cfg.grad_method == GRAD_FINITE_DIFF:
            return self.gradient_fd(theta)
        return self.gradient_ps(theta)


def loss(state: qsim.RealState, obj: PolynomialObjective, pb: PopulationBalance,
         cfg: TrainConfig) -> float:
    """Loss value of a prepared state; see the module docstring for the form."""
    return _LossEngine(obj, pb, cfg).loss(state)


def gradient(theta: np.ndarray, obj: PolynomialObjective, pb: PopulationBalance,
             cfg: TrainConfig) -> np.ndarray:
    """Gradient of the loss with respect to the ansatz parameters."""
    return _LossEngine(obj, pb, cfg).gradient(np.asarray(theta, dtype=np.float64))


def default_population_balance(obj: PolynomialObjective, cfg: TrainConfig) -> PopulationBalance:
    _, wm1 = w_matrices(obj, 1)
    return build_population_balance(wm1, beta=cfg.beta)


def train(obj: PolynomialObjective, cfg: TrainConfig) -> TrainResult:
    """Adam minimization of the loss; deterministic for a fixed config/seed.

    Per epoch the loss, SEE value and rounded FST value of the current state
    are recorded before the parameter update; the best FST assignment over
    all epochs is returned.
    """
    pb = default_population_balance(obj, cfg)
    engine = _LossEngine(obj, pb, cfg)
    see_eval = solution.SeeEvaluator(
        obj, mode=cfg.mode, alpha=cfg.alpha, taylor_order=cfg.taylor_order
    )
    rng = np.random.default_rng(cfg.seed)
    theta = rng.uniform(-math.pi / 4, math.pi / 4, size=engine.n * engine.layers)

    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    losses: List[float] = []
    sees: List[float] = []
    fsts: List[int] = []
    best_fst = -1
    best_epoch = -1
    best_assignment = None

    for epoch in range(cfg.epochs):
        state = engine.prepare(theta)
        losses.append(engine.loss(state))
        sees.append(see_eval.value(state))
        assignment, value = solution.fst_value(state, obj)
        fsts.append(value)
        if value > best_fst:
            best_fst = value
            best_epoch = epoch
            best_assignment = assignment

        grad = engine.gradient(theta)
        m = cfg.adam_beta1 * m + (1 - cfg.adam_beta1) * grad
        v = cfg.adam_beta2 * v + (1 - cfg.adam_beta2) * grad * grad
        t = epoch + 1
        m_hat = m / (1 - cfg.adam_beta1**t)
        v_hat = v / (1 - cfg.adam_beta2**t)
        theta = theta - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)

    return TrainResult(
        losses=losses,
        sees=sees,
        fsts=fsts,
        best_fst=best_fst,
        best_epoch=best_epoch,
        best_assignment=best_assignment,
        final_params=theta,
    )
