"""Max-kSAT instances: DIMACS parsing, random generation, and evaluation.

Boolean variables x_1..x_V are mirrored by spin variables y_0, y_1, .., y_V
(one extra reference spin y_0).  A variable x_i is true exactly when
y_i == y_0, which makes the truth of an assignment invariant under a global
spin flip.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .errors import DimacsError


@dataclass(frozen=True)
class Literal:
    """A possibly negated boolean variable, 1-based like DIMACS."""

    var: int
    negated: bool = False

    def __post_init__(self):
        if self.var < 1:
            raise ValueError(f"literal variable index must be >= 1, got {self.var}")

    @property
    def sign(self) -> int:
        """+1 for a plain literal, -1 for a negated one."""
        return -1 if self.negated else 1

    def encode(self) -> int:
        """Signed-integer DIMACS encoding."""
        return -self.var if self.negated else self.var

    @staticmethod
    def decode(code: int) -> "Literal":
        if code == 0:
            raise ValueError("0 is a clause terminator, not a literal")
        return Literal(abs(code), negated=code < 0)


Clause = Tuple[Literal, ...]


@dataclass
class Assignment:
    """Spin vector y of +-1 entries; index 0 is the truth reference y_0."""

    y: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.int8)
        if y.ndim != 1 or y.size < 1:
            raise ValueError("assignment must be a non-empty 1-d vector")
        if not np.all(np.abs(y) == 1):
            raise ValueError("assignment entries must be +1 or -1")
        self.y = y

    def __len__(self) -> int:
        return self.y.size

    def truth(self) -> np.ndarray:
        """Boolean truth values of x_1..x_V (true iff y_i == y_0)."""
        return self.y[1:] == self.y[0]

    @classmethod
    def from_bools(cls, values: Sequence[bool], y0: int = 1) -> "Assignment":
        y = np.empty(len(values) + 1, dtype=np.int8)
        y[0] = y0
        y[1:] = np.where(np.asarray(values, dtype=bool), y0, -y0)
        return cls(y)

    def flipped(self) -> "Assignment":
        return Assignment(-self.y)


@dataclass
class CnfInstance:
    """A normalized Max-kSAT instance.

    ``clauses`` never contain a repeated variable.  Clauses that mention both
    x and !x are tautological; they are dropped from ``clauses`` and counted
    in ``tautologies`` so they still contribute to satisfied-clause counts.
    ``k`` is the uniform clause length, or 0 when lengths are mixed or there
    are no regular clauses.
    """

    num_vars: int
    clauses: List[Clause]
    tautologies: int = 0
    k: int = field(init=False, default=0)

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("instance needs at least one variable")
        if self.tautologies < 0:
            raise ValueError("negative tautology count")
        norm = []
        for cl in self.clauses:
            if len(cl) == 0:
                raise ValueError("empty clause is unsatisfiable and unsupported")
            seen = {}
            for lit in cl:
                if lit.var > self.num_vars:
                    raise ValueError(
                        f"literal {lit.encode()} exceeds declared variable count {self.num_vars}"
                    )
                if lit.var in seen and seen[lit.var] != lit.negated:
                    raise ValueError("tautological clause must be normalized away")
                seen[lit.var] = lit.negated
            if len(seen) != len(cl):
                raise ValueError("clause with duplicated variable must be normalized")
            norm.append(tuple(sorted(cl, key=lambda l: l.var)))
        self.clauses = norm
        lengths = {len(cl) for cl in self.clauses}
        self.k = lengths.pop() if len(lengths) == 1 else 0

    @property
    def num_clauses(self) -> int:
        """All clauses, including recorded tautological ones."""
        return len(self.clauses) + self.tautologies

    @property
    def num_y(self) -> int:
        """Number of spin variables including the reference y_0."""
        return self.num_vars + 1


def _normalize(raw_clauses: Iterable[Sequence[int]], num_vars: int) -> Tuple[List[Clause], int]:
    """Deduplicate literals inside clauses and strip tautologies."""
    clauses: List[Clause] = []
    tautologies = 0
    for raw in raw_clauses:
        by_var = {}
        tautological = False
        for code in raw:
            lit = Literal.decode(code)
            if lit.var > num_vars:
                raise DimacsError(
                    f"literal {code} exceeds declared variable count {num_vars}"
                )
            prev = by_var.get(lit.var)
            if prev is None:
                by_var[lit.var] = lit.negated
            elif prev != lit.negated:
                tautological = True
                break
        if tautological:
            tautologies += 1
            continue
        if not by_var:
            raise DimacsError("empty clause")
        clauses.append(tuple(Literal(v, neg) for v, neg in sorted(by_var.items())))
    return clauses, tautologies


def parse_dimacs(text: str) -> CnfInstance:
    """Parse DIMACS CNF text into a normalized instance.

    Accepts 'c' comment lines, a 'p cnf <vars> <clauses>' header, and
    0-terminated clauses that may span lines.
    """
    num_vars = None
    tokens: List[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if num_vars is not None:
                raise DimacsError(f"line {lineno}: duplicate header")
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            try:
                num_vars = int(parts[2])
                declared_clauses = int(parts[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: malformed header {line!r}") from None
            if num_vars < 1 or declared_clauses < 0:
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            continue
        if num_vars is None:
            raise DimacsError(f"line {lineno}: clause before 'p cnf' header")
        try:
            tokens.extend(int(tok) for tok in line.split())
        except ValueError:
            raise DimacsError(f"line {lineno}: non-integer clause token") from None
    if num_vars is None:
        raise DimacsError("missing 'p cnf' header")

    raw_clauses: List[List[int]] = []
    current: List[int] = []
    for tok in tokens:
        if tok == 0:
            if not current:
                raise DimacsError("empty clause")
            raw_clauses.append(current)
            current = []
        else:
            current.append(tok)
    if current:
        raise DimacsError("unterminated clause at end of input")

    clauses, tautologies = _normalize(raw_clauses, num_vars)
    return CnfInstance(num_vars=num_vars, clauses=clauses, tautologies=tautologies)


def to_dimacs(instance: CnfInstance) -> str:
    """Serialize back to DIMACS CNF.

    Recorded tautologies are emitted as canonical '1 -1 0' clauses so that a
    parse/serialize round trip preserves the instance exactly.
    """
    total = instance.num_clauses
    lines = [f"p cnf {instance.num_vars} {total}"]
    for cl in instance.clauses:
        lines.append(" ".join(str(lit.encode()) for lit in cl) + " 0")
    lines.extend("1 -1 0" for _ in range(instance.tautologies))
    return "\n".join(lines) + "\n"


def generate_random(num_vars: int, num_clauses: int, k: int, seed: int) -> CnfInstance:
    """Random Max-kSAT: k distinct variables per clause, each negated with
    probability 1/2.  Pure function of its arguments."""
    if k < 1 or num_vars < k:
        raise ValueError(f"need num_vars >= k >= 1, got num_vars={num_vars}, k={k}")
    if num_clauses < 1:
        raise ValueError("need at least one clause")
    rng = np.random.default_rng(seed)
    clauses: List[Clause] = []
    for _ in range(num_clauses):
        chosen = np.sort(rng.choice(num_vars, size=k, replace=False)) + 1
        negs = rng.integers(0, 2, size=k)
        clauses.append(tuple(Literal(int(v), bool(s)) for v, s in zip(chosen, negs)))
    return CnfInstance(num_vars=num_vars, clauses=clauses)


def _clause_arrays(instance: CnfInstance) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Per-clause (variable index, sign) arrays for vectorized evaluation."""
    out = []
    for cl in instance.clauses:
        vars_ = np.fromiter((lit.var for lit in cl), dtype=np.int64, count=len(cl))
        signs = np.fromiter((lit.sign for lit in cl), dtype=np.int8, count=len(cl))
        out.append((vars_, signs))
    return out


def count_satisfied(instance: CnfInstance, assignment: Assignment) -> int:
    """Number of clauses with at least one true literal, tautologies included."""
    y = assignment.y
    if y.size != instance.num_y:
        raise ValueError(
            f"assignment length {y.size} does not match num_vars+1 = {instance.num_y}"
        )
    count = instance.tautologies
    y0 = y[0]
    for cl in instance.clauses:
        for lit in cl:
            if (y[lit.var] == y0) != lit.negated:
                count += 1
                break
    return count


def count_satisfied_many(instance: CnfInstance, Y: np.ndarray) -> np.ndarray:
    """Vectorized ``count_satisfied`` over rows of Y (shape (m, num_vars+1))."""
    Y = np.asarray(Y)
    if Y.ndim != 2 or Y.shape[1] != instance.num_y:
        raise ValueError("Y must have shape (m, num_vars + 1)")
    truth_ref = Y[:, :1]
    counts = np.full(Y.shape[0], instance.tautologies, dtype=np.int64)
    for vars_, signs in _clause_arrays(instance):
        lit_true = (Y[:, vars_] * truth_ref) == signs[None, :]
        counts += lit_true.any(axis=1)
    return counts
