"""Sum-of-squares relaxation of the spin polynomial, desk scale only.

The satisfied-clause polynomial p(y) = C0 - sum_m w_m m(y) is bounded above
by finding a Gram matrix Q >= 0 with

    F(y) := -p(y) - gamma = b^T Q b      (modulo y_i^2 = 1)

over a monomial basis b = (1, y_0, .., y_{N-1}) for quadratic objectives,
extended with pair monomials for degree-4 ones.
Products of basis monomials reduce modulo y_i^2 = 1 to the symmetric
difference of their index sets, so coefficient matching becomes one linear
constraint per reachable multilinear monomial; the y_i^2 - 1 multiplier
polynomials are implicit in that reduction.  Maximizing gamma is then the
semidefinite program

    min tr(Q)   s.t.   <A_m, Q> = c_m  for all reachable m != {},  Q >= 0,

with gamma = -C0 - tr(Q).  The constraint matrices A_m have disjoint
supports, which makes both the affine projection and the normal equations of
the splitting scheme diagonal.

The solver alternates a least-squares projection onto the affine constraint
set with a projection onto the PSD cone (eigenvalue clipping) in an ADMM
loop.  The reported bound adds the residual slack sum_m |<A_m,Q> - c_m|, so
it is certified by the returned PSD matrix even before full convergence.

Rounding follows the null-space procedure: sample a random unit combination
of the near-null eigenvectors of Q, read its entries at the singleton basis
positions, and round their signs to +-1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .cnf import Assignment
from .errors import ConvergenceError, SizeLimitError
from .poly import Monomial, PolynomialObjective, evaluate_many

_NULL_TOL_REL = 1e-6


@dataclass
class PolyBasis:
    """Ordered monomial basis: the constant first, then singletons, then pairs."""

    monomials: List[Monomial]

    def __post_init__(self):
        if not self.monomials or self.monomials[0] != ():
            raise ValueError("basis must start with the constant monomial")
        if len(set(self.monomials)) != len(self.monomials):
            raise ValueError("duplicate basis monomials")

    def __len__(self) -> int:
        return len(self.monomials)

    def index(self, mono: Monomial) -> int:
        return self.monomials.index(mono)


@dataclass
class SosRelaxation:
    """Gram-matrix SDP data for one objective."""

    obj: PolynomialObjective
    basis: PolyBasis
    c0: float
    # one linear constraint per reachable nonempty monomial, stored as the
    # flat list of (row, col) entry positions tagged with their group id
    entry_rows: np.ndarray
    entry_cols: np.ndarray
    entry_group: np.ndarray
    group_sizes: np.ndarray
    rhs: np.ndarray
    group_monomials: List[Monomial]
    pair_checks: List[Tuple[int, int, int]] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.basis)

    @property
    def num_constraints(self) -> int:
        return self.rhs.size

    def apply_a(self, Q: np.ndarray) -> np.ndarray:
        """A(Q): per-constraint sums of Q over the group's entry positions."""
        return np.bincount(
            self.entry_group, weights=Q[self.entry_rows, self.entry_cols],
            minlength=self.num_constraints,
        )

    def apply_at(self, y: np.ndarray) -> np.ndarray:
        """Adjoint A^T(y) as a dense symmetric matrix."""
        Z = np.zeros((self.size, self.size))
        Z[self.entry_rows, self.entry_cols] = y[self.entry_group]
        return Z

    def residuals(self, Q: np.ndarray) -> np.ndarray:
        return self.apply_a(Q) - self.rhs

    def bound_from(self, Q: np.ndarray) -> float:
        """Upper bound certified by a PSD Q: C0 + tr(Q) + sum |residual|."""
        return self.c0 + float(np.trace(Q)) + float(np.abs(self.residuals(Q)).sum())

    def to_json(self) -> str:
        payload = {
            "basis": [list(m) for m in self.basis.monomials],
            "num_constraints": int(self.num_constraints),
            "c0": self.c0,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


@dataclass
class SosResult:
    """Outcome of solving and rounding the relaxation."""

    upper_bound: float
    gamma: float
    rounded_assignment: Assignment
    rounded_value: int
    null_space_dim: int
    consistency_violations: int
    fallback_used: bool = False

    def to_json(self) -> str:
        payload = {
            "upper_bound": self.upper_bound,
            "gamma": self.gamma,
            "rounded_value": self.rounded_value,
            "rounded_assignment": [int(v) for v in self.rounded_assignment.y],
            "null_space_dim": self.null_space_dim,
            "consistency_violations": self.consistency_violations,
            "fallback_used": self.fallback_used,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def build_relaxation(obj: PolynomialObjective, max_vars: int = 13,
                     reduced_basis: bool = False) -> SosRelaxation:
    """Assemble the basis and coefficient-matching constraints.

    Degree-2 objectives get the level-1 basis (constant plus singletons);
    degree-4 objectives additionally get every pair monomial, which is what
    reproduces the textbook bounds.  ``reduced_basis`` keeps only the pairs
    obtained by consecutively pairing each degree-4 objective monomial; that
    shrinks the SDP considerably but can loosen the bound.  ``max_vars``
    guards the basis size.
    """
    N = obj.num_y
    if N > max_vars:
        raise SizeLimitError(
            f"relaxation guarded at {max_vars} spin variables, instance has {N}"
        )
    if obj.degree > 2:
        raise SizeLimitError("relaxation supports degree-4 objectives at most")

    monomials: List[Monomial] = [()]
    monomials.extend((i,) for i in range(N))
    if obj.degree == 2:
        if reduced_basis:
            pairs = set()
            for mono in obj.terms:
                if len(mono) == 4:
                    pairs.add((mono[0], mono[1]))
                    pairs.add((mono[2], mono[3]))
            monomials.extend(sorted(pairs))
        else:
            monomials.extend((i, j) for i in range(N) for j in range(i + 1, N))
    basis = PolyBasis(monomials)
    sets = [frozenset(m) for m in basis.monomials]
    S = len(basis)

    w: Dict[Monomial, float] = {}
    c0 = float(obj.constant)
    for mono, (a, b) in obj.terms.items():
        c0 += float(a + b)
        w[mono] = w.get(mono, 0.0) + float(a - b)

    groups: Dict[Monomial, List[Tuple[int, int]]] = {}
    for i in range(S):
        for j in range(i + 1, S):
            m = tuple(sorted(sets[i] ^ sets[j]))
            groups.setdefault(m, []).append((i, j))

    group_monomials = sorted(groups)
    rows, cols, gid, sizes, rhs = [], [], [], [], []
    for g, m in enumerate(group_monomials):
        count = 0
        for (i, j) in groups[m]:
            rows.extend((i, j))
            cols.extend((j, i))
            gid.extend((g, g))
            count += 2
        sizes.append(count)
        rhs.append(w.get(m, 0.0))

    covered = set(group_monomials)
    missing = [m for m in w if m not in covered and w[m] != 0.0]
    if missing:
        raise ValueError(f"basis cannot express objective monomials {missing}")

    singleton_pos = {i: basis.index((i,)) for i in range(N)}
    pair_checks = [
        (basis.index(m), singleton_pos[m[0]], singleton_pos[m[1]])
        for m in basis.monomials
        if len(m) == 2
    ]

    return SosRelaxation(
        obj=obj,
        basis=basis,
        c0=c0,
        entry_rows=np.array(rows, dtype=np.int64),
        entry_cols=np.array(cols, dtype=np.int64),
        entry_group=np.array(gid, dtype=np.int64),
        group_sizes=np.array(sizes, dtype=np.float64),
        rhs=np.array(rhs, dtype=np.float64),
        group_monomials=group_monomials,
        pair_checks=pair_checks,
    )


def _project_affine(relax: SosRelaxation, M: np.ndarray) -> np.ndarray:
    """Least-squares projection onto {Q : A(Q) = rhs} (disjoint supports)."""
    shift = (relax.apply_a(M) - relax.rhs) / relax.group_sizes
    out = M.copy()
    out[relax.entry_rows, relax.entry_cols] -= shift[relax.entry_group]
    return out


def _project_psd(M: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(M)
    pos = vals > 0.0
    n_pos = int(pos.sum())
    # rebuild from whichever side of the spectrum is smaller
    if n_pos <= M.shape[0] - n_pos:
        V = vecs[:, pos]
        out = (V * vals[pos]) @ V.T
    else:
        V = vecs[:, ~pos]
        out = M - (V * vals[~pos]) @ V.T
    return 0.5 * (out + out.T)


def solve_sdp(relax: SosRelaxation, tol: float = 1e-6, max_iter: int = 50000,
              rho: float = 1.0, over_relax: float = 1.6) -> Tuple[float, np.ndarray]:
    """ADMM between the affine projection and the PSD cone.

    Terminates when the scaled primal and dual residuals drop below ``tol``.
    Returns (gamma, Q) with Q >= 0 and gamma = -(C0 + tr Q + residual slack),
    so -gamma is a valid upper bound on the polynomial whenever the scheme
    converged.  Raises ConvergenceError with the final residuals otherwise.
    """
    S = relax.size
    C = np.eye(S)
    Z = np.zeros((S, S))
    U = np.zeros((S, S))
    b_scale = 1.0 + float(np.linalg.norm(relax.rhs))
    c_scale = 1.0 + float(np.linalg.norm(C))
    pinf = dinf = math.inf
    for it in range(1, max_iter + 1):
        X = _project_affine(relax, Z - U - C / rho)
        X_hat = over_relax * X + (1.0 - over_relax) * Z
        Z_prev = Z
        Z = _project_psd(X_hat + U)
        U = U + X_hat - Z

        pinf = float(np.linalg.norm(relax.residuals(Z))) / b_scale
        dinf = rho * float(np.linalg.norm(Z - Z_prev)) / c_scale
        if pinf <= tol and dinf <= tol:
            break
        if it % 100 == 0:
            if pinf > 10 * dinf:
                rho *= 2.0
                U /= 2.0
            elif dinf > 10 * pinf:
                rho /= 2.0
                U *= 2.0
    else:
        raise ConvergenceError(
            f"SDP did not converge in {max_iter} iterations "
            f"(primal residual {pinf:.2e}, dual residual {dinf:.2e})"
        )
    bound = relax.bound_from(Z)
    return -bound, Z


def sos_round(relax: SosRelaxation, Q: np.ndarray, samples: int = 100,
              seed: int = 0, null_tol_rel: float = _NULL_TOL_REL) -> SosResult:
    """Null-space rounding of a solved Gram matrix.

    Eigenvectors with eigenvalue below ``null_tol_rel`` times the spectral
    radius span the (near-)null space; each draw combines them with a
    uniformly random unit vector, reads the singleton entries, and
    sign-rounds (ties to +1).  An empty null space falls back to the
    smallest-eigenvalue eigenvector.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    N = relax.obj.num_y
    vals, vecs = np.linalg.eigh(Q)
    null_tol = null_tol_rel * max(float(vals[-1]), 0.0)
    null_mask = vals <= null_tol
    fallback = not bool(null_mask.any())
    if fallback:
        V = vecs[:, :1]
        null_dim = 0
    else:
        V = vecs[:, null_mask]
        null_dim = int(null_mask.sum())

    rng = np.random.default_rng(seed)
    best_value = -1
    best_assignment = None
    violations = 0
    for _ in range(samples):
        lam = rng.standard_normal(V.shape[1])
        norm = float(np.linalg.norm(lam))
        if norm == 0.0:
            lam[0] = 1.0
            norm = 1.0
        P = V @ (lam / norm)
        y = np.where(P[1 : N + 1] >= 0.0, 1, -1).astype(np.int8)
        if any(
            (P[p] >= 0.0) != ((P[i] >= 0.0) == (P[j] >= 0.0))
            for p, i, j in relax.pair_checks
        ):
            violations += 1
        value = int(round(evaluate_many(relax.obj, y[None, :].astype(np.float64))[0]))
        if value > best_value:
            best_value = value
            best_assignment = Assignment(y)

    bound = relax.bound_from(Q)
    return SosResult(
        upper_bound=bound,
        gamma=-bound,
        rounded_assignment=best_assignment,
        rounded_value=best_value,
        null_space_dim=null_dim,
        consistency_violations=violations,
        fallback_used=fallback,
    )
