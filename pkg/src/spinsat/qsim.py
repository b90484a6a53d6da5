"""Real-amplitude statevector simulation.

The variational state lives on n qubits and is kept real by construction
(planar rotations plus CNOTs).  Degree-2d objective terms are expectations of
sparse symmetric matrices over the d-fold tensor power of the state; they are
evaluated either exactly from the sparse entries or through an emulated
Hadamard test Im<Psi| e^{i a W} |Psi>, which approximates a <Psi|W|Psi> to
third order in a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Sequence

import numpy as np

from .errors import ConfigError, ConvergenceError
from .poly import SparseSymmetric

MODE_EXACT = "exact-expectation"
MODE_TAYLOR = "taylor-unitary"


@dataclass
class RealState:
    """Unit-norm real amplitude vector of length 2^n."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.float64)
        if amps.ndim != 1 or amps.size < 2 or amps.size & (amps.size - 1):
            raise ValueError("amplitudes must be a 1-d vector of length 2^n, n >= 1")
        norm = float(amps @ amps)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state norm^2 = {norm} is not 1 within 1e-10")
        self.amplitudes = amps

    @property
    def n(self) -> int:
        return self.amplitudes.size.bit_length() - 1


@dataclass
class Ansatz:
    """Hardware-efficient real ansatz: per-layer planar rotations + CNOT chain."""

    n: int
    layers: int
    params: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("ansatz needs at least one qubit")
        if self.layers < 1:
            raise ValueError("ansatz needs at least one layer")
        params = np.asarray(self.params, dtype=np.float64)
        if params.shape != (self.n * self.layers,):
            raise ValueError(
                f"params must have length n*layers = {self.n * self.layers}"
            )
        self.params = params


@dataclass
class HadamardConfig:
    """Settings for the emulated Hadamard test.

    ``alpha`` scales the generator in U = e^{i alpha W}; the truncated Taylor
    series of order ``taylor_order`` is applied with scaling-and-squaring when
    alpha * ||W||_1 is too large for a single pass.
    """

    alpha: float = 0.01
    taylor_order: int = 12
    mode: str = MODE_TAYLOR
    scale_and_square: bool = True

    def __post_init__(self):
        if self.alpha <= 0:
            raise ConfigError("alpha must be positive")
        if self.taylor_order < 3:
            raise ConfigError("taylor_order must be at least 3")
        if self.mode not in (MODE_EXACT, MODE_TAYLOR):
            raise ConfigError(f"unknown mode {self.mode!r}")


def _rotate(amps: np.ndarray, qubit: int, n: int, theta: float) -> np.ndarray:
    """Apply [[cos, -sin], [sin, cos]] on one qubit (qubit 0 = most significant)."""
    c, s = math.cos(theta), math.sin(theta)
    view = amps.reshape(1 << qubit, 2, 1 << (n - qubit - 1))
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = c * a0 - s * a1
    view[:, 1, :] = s * a0 + c * a1
    return amps


def _cnot(amps: np.ndarray, control: int, n: int) -> np.ndarray:
    """CNOT with target = control + 1 (adjacent chain)."""
    view = amps.reshape(1 << control, 2, 2, 1 << (n - control - 2))
    view[:, 1] = view[:, 1, ::-1]
    return amps


def prepare(ansatz: Ansatz) -> RealState:
    """Run the ansatz on |0..0>: per layer one rotation per qubit, then the
    CNOT chain q -> q+1.  Output is always real and unit norm."""
    n = ansatz.n
    amps = np.zeros(1 << n)
    amps[0] = 1.0
    for layer in range(ansatz.layers):
        offset = layer * n
        for q in range(n):
            _rotate(amps, q, n, ansatz.params[offset + q])
        for q in range(n - 1):
            _cnot(amps, q, n)
    return RealState(amps)


def uniform_state(n: int) -> RealState:
    """Equal superposition H^{(x)n} |0..0>."""
    if n < 1:
        raise ValueError("need at least one qubit")
    return RealState(np.full(1 << n, 2.0 ** (-n / 2)))


@lru_cache(maxsize=16)
def _pauli_sign_matrix(n: int) -> np.ndarray:
    """Rows of +-1 signs for single-qubit Z strings followed by all ZZ pairs."""
    idx = np.arange(1 << n)
    singles = np.stack([1 - 2 * ((idx >> (n - 1 - a)) & 1) for a in range(n)])
    rows = [singles[a] for a in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            rows.append(singles[a] * singles[b])
    return np.array(rows, dtype=np.float64)


def pauli_z_expectations(state: RealState) -> np.ndarray:
    """<Z_a> for a < n, then <Z_a Z_b> for a < b; n + n(n-1)/2 values."""
    probs = state.amplitudes**2
    return _pauli_sign_matrix(state.n) @ probs


def expval(state: RealState, W: SparseSymmetric, d: int) -> float:
    """<psi^(x)d| W |psi^(x)d> from the sparse entries.

    Never materializes the tensor power: row/col indices are split into
    per-register digits and the amplitude products are accumulated directly.
    """
    return expval_registers([state] * d, W)


def expval_registers(states: Sequence[RealState], W: SparseSymmetric) -> float:
    """Like ``expval`` but with an independent state on each register."""
    d = len(states)
    if d < 1:
        raise ValueError("need at least one register")
    n = states[0].n
    if any(s.n != n for s in states):
        raise ValueError("all registers must have the same qubit count")
    if W.dim != (1 << n) ** d:
        raise ValueError(f"matrix dim {W.dim} does not match {d} registers of {n} qubits")
    _, _, vals = W.coo()
    if vals.size == 0:
        return 0.0
    rdig, cdig = W.register_digits(n, d)
    prod = vals.copy()
    for t in range(d):
        amps = states[t].amplitudes
        prod *= amps[rdig[t]]
        prod *= amps[cdig[t]]
    return float(prod.sum())


def _tensor(states: Sequence[RealState]) -> np.ndarray:
    return reduce(np.kron, [s.amplitudes for s in states])


def _apply_exp_taylor(W: SparseSymmetric, vec: np.ndarray, alpha: float, order: int,
                      scale_and_square: bool) -> np.ndarray:
    """Apply e^{i alpha W} via a truncated Taylor series.

    The series is run with scaled alpha and repeated squaring steps so the
    remainder stays below ~1e-9 in operator norm; raises when that cannot be
    achieved (the fix is to lower alpha).
    """
    x = alpha * W.one_norm()
    steps = 1
    while x / steps > 1e-12 and (x / steps) ** (order + 1) / math.factorial(order + 1) > 1e-9:
        if not scale_and_square or steps >= (1 << 30):
            raise ConvergenceError(
                f"Taylor series of order {order} cannot absorb alpha*||W||_1 = {x:.3g}; "
                "lower alpha or raise taylor_order"
            )
        steps *= 2
    csr = W.csr()
    out = vec.astype(np.complex128)
    coeff = 1j * alpha / steps
    for _ in range(steps):
        term = out.copy()
        acc = out.copy()
        for t in range(1, order + 1):
            term = csr.dot(term) * (coeff / t)
            acc += term
        out = acc
    return out


def hadamard_test_im(state: RealState, W: SparseSymmetric, cfg: HadamardConfig,
                     d: int) -> float:
    """Emulated Hadamard test: Im <psi^(x)d| e^{i alpha W} |psi^(x)d>.

    The ancilla measurement of the physical circuit equals this imaginary
    part exactly, so the test is computed analytically (no sampling noise).
    """
    return hadamard_test_im_registers([state] * d, W, cfg)


def hadamard_test_im_registers(states: Sequence[RealState], W: SparseSymmetric,
                               cfg: HadamardConfig) -> float:
    if cfg.mode != MODE_TAYLOR:
        raise ConfigError("Hadamard emulation requires taylor-unitary mode")
    d = len(states)
    n = states[0].n
    if W.dim != (1 << n) ** d:
        raise ValueError(f"matrix dim {W.dim} does not match {d} registers of {n} qubits")
    vec = _tensor(states)
    evolved = _apply_exp_taylor(W, vec, cfg.alpha, cfg.taylor_order, cfg.scale_and_square)
    return float(np.imag(vec @ evolved))
