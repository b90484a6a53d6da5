"""Classical reference solvers: brute force, random guess, local search.

y_0 is fixed to +1 throughout; the global spin-flip symmetry of the encoding
makes this lossless.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np
from numba import njit

from .cnf import Assignment, CnfInstance, count_satisfied_many
from .errors import SizeLimitError

_BRUTE_VAR_LIMIT = 26
_CHUNK_BITS = 20


def _assignments_chunk(num_vars: int, start: int, stop: int) -> np.ndarray:
    """Spin matrix (stop-start, num_vars+1) for assignment codes start..stop-1;
    bit i of the code is the truth of x_{i+1}, y_0 = +1."""
    codes = np.arange(start, stop, dtype=np.int64)
    Y = np.empty((codes.size, num_vars + 1), dtype=np.int8)
    Y[:, 0] = 1
    for i in range(num_vars):
        Y[:, i + 1] = np.where((codes >> i) & 1, 1, -1)
    return Y


def brute_force(instance: CnfInstance) -> Tuple[int, Assignment]:
    """Exhaustive optimum over all 2^num_vars truth assignments."""
    if instance.num_vars > _BRUTE_VAR_LIMIT:
        raise SizeLimitError(
            f"brute force capped at {_BRUTE_VAR_LIMIT} variables, got {instance.num_vars}"
        )
    total = 1 << instance.num_vars
    chunk = 1 << min(_CHUNK_BITS, instance.num_vars)
    best = -1
    best_code = 0
    for start in range(0, total, chunk):
        Y = _assignments_chunk(instance.num_vars, start, min(start + chunk, total))
        counts = count_satisfied_many(instance, Y)
        idx = int(np.argmax(counts))
        if counts[idx] > best:
            best = int(counts[idx])
            best_code = start + idx
    witness = _assignments_chunk(instance.num_vars, best_code, best_code + 1)[0]
    return best, Assignment(witness)


def random_guess(instance: CnfInstance, trials: int, seed: int) -> Tuple[float, int]:
    """Mean and best satisfied count over uniformly random assignments."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    total = 0.0
    best = -1
    chunk = max(1, min(trials, (1 << 22) // max(1, instance.num_vars)))
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        Y = np.empty((m, instance.num_y), dtype=np.int8)
        Y[:, 0] = 1
        Y[:, 1:] = rng.choice(np.array([-1, 1], dtype=np.int8), size=(m, instance.num_vars))
        counts = count_satisfied_many(instance, Y)
        total += float(counts.sum())
        best = max(best, int(counts.max()))
        done += m
    return total / trials, best


@njit(cache=True)
def _splitmix64(x):
    x = (x + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = x
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _next_u64(state):
    # xorshift64*, state must stay nonzero
    x = state
    x ^= x >> np.uint64(12)
    x ^= (x << np.uint64(25)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    x ^= x >> np.uint64(27)
    return x, (x * np.uint64(0x2545F4914F6CDD1D)) & np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True)
def _walksat_restart(lits, clause_ptr, occ, occ_ptr, num_vars, max_flips,
                     noise_threshold, seed):
    """One WalkSAT restart; returns (best count, best truth assignment).

    Bookkeeping: per-clause count of currently-true literals, and the stack of
    unsatisfied clauses with per-clause positions for O(1) insert/remove.
    """
    num_clauses = clause_ptr.size - 1
    rng = _splitmix64(seed)
    if rng == np.uint64(0):
        rng = np.uint64(0x1234567887654321)

    assign = np.empty(num_vars + 1, dtype=np.int8)
    for v in range(1, num_vars + 1):
        rng, r = _next_u64(rng)
        assign[v] = 1 if (r & np.uint64(1)) else 0

    num_true = np.zeros(num_clauses, dtype=np.int32)
    unsat = np.empty(num_clauses, dtype=np.int32)
    unsat_pos = np.full(num_clauses, -1, dtype=np.int32)
    unsat_len = 0
    for c in range(num_clauses):
        cnt = 0
        for t in range(clause_ptr[c], clause_ptr[c + 1]):
            lit = lits[t]
            v = lit if lit > 0 else -lit
            want = 1 if lit > 0 else 0
            if assign[v] == want:
                cnt += 1
        num_true[c] = cnt
        if cnt == 0:
            unsat[unsat_len] = c
            unsat_pos[c] = unsat_len
            unsat_len += 1

    best = num_clauses - unsat_len
    best_assign = assign.copy()
    for _ in range(max_flips):
        if unsat_len == 0:
            break
        rng, r = _next_u64(rng)
        c = unsat[int(r % np.uint64(unsat_len))]
        begin = clause_ptr[c]
        end = clause_ptr[c + 1]
        rng, r = _next_u64(rng)
        if r < noise_threshold:
            t = begin + int((r >> np.uint64(32)) % np.uint64(end - begin))
            lit = lits[t]
            flip_var = lit if lit > 0 else -lit
        else:
            flip_var = 0
            best_break = 1 << 30
            for t in range(begin, end):
                lit = lits[t]
                v = lit if lit > 0 else -lit
                brk = 0
                for o in range(occ_ptr[v], occ_ptr[v + 1]):
                    cc = occ[o]
                    if num_true[cc] == 1:
                        # flipping v breaks cc iff v currently satisfies it
                        for tt in range(clause_ptr[cc], clause_ptr[cc + 1]):
                            l2 = lits[tt]
                            v2 = l2 if l2 > 0 else -l2
                            if v2 == v:
                                want = 1 if l2 > 0 else 0
                                if assign[v] == want:
                                    brk += 1
                                break
                if brk < best_break:
                    best_break = brk
                    flip_var = v

        old = assign[flip_var]
        assign[flip_var] = 1 - old
        for o in range(occ_ptr[flip_var], occ_ptr[flip_var + 1]):
            cc = occ[o]
            delta = 0
            for tt in range(clause_ptr[cc], clause_ptr[cc + 1]):
                l2 = lits[tt]
                v2 = l2 if l2 > 0 else -l2
                if v2 == flip_var:
                    want = 1 if l2 > 0 else 0
                    if assign[flip_var] == want:
                        delta += 1
                    else:
                        delta -= 1
            was = num_true[cc]
            num_true[cc] = was + delta
            if was == 0 and num_true[cc] > 0:
                # remove cc from unsat stack
                pos = unsat_pos[cc]
                last = unsat[unsat_len - 1]
                unsat[pos] = last
                unsat_pos[last] = pos
                unsat_pos[cc] = -1
                unsat_len -= 1
            elif was > 0 and num_true[cc] == 0:
                unsat[unsat_len] = cc
                unsat_pos[cc] = unsat_len
                unsat_len += 1
        sat_now = num_clauses - unsat_len
        if sat_now > best:
            best = sat_now
            best_assign = assign.copy()
    return best, best_assign


def _flatten(instance: CnfInstance):
    lits = []
    clause_ptr = [0]
    for cl in instance.clauses:
        lits.extend(lit.encode() for lit in cl)
        clause_ptr.append(len(lits))
    lits = np.array(lits, dtype=np.int32)
    clause_ptr = np.array(clause_ptr, dtype=np.int32)
    occ_lists = [[] for _ in range(instance.num_vars + 1)]
    for c, cl in enumerate(instance.clauses):
        for lit in cl:
            occ_lists[lit.var].append(c)
    occ = []
    occ_ptr = [0]
    for v in range(instance.num_vars + 1):
        occ.extend(occ_lists[v])
        occ_ptr.append(len(occ))
    return lits, clause_ptr, np.array(occ, dtype=np.int32), np.array(occ_ptr, dtype=np.int32)


def default_flip_budget(instance: CnfInstance) -> int:
    return int(50 * instance.num_vars * np.sqrt(max(1, len(instance.clauses))))


def local_search(instance: CnfInstance, restarts: int = 20, flips: int = None,
                 noise: float = 0.3, seed: int = 0) -> Tuple[int, Assignment]:
    """WalkSAT-style search: from a random assignment, repeatedly pick an
    unsatisfied clause and flip either the least-breaking variable or, with
    probability ``noise``, a random one.  Deterministic per seed; restart r
    uses an RNG stream derived from (seed, r)."""
    if restarts < 1 or noise < 0 or noise > 1:
        raise ValueError("restarts must be >= 1 and noise in [0, 1]")
    if flips is None:
        flips = default_flip_budget(instance)
    if flips < 1:
        raise ValueError("flips must be >= 1")
    lits, clause_ptr, occ, occ_ptr = _flatten(instance)
    noise_threshold = np.uint64(int(noise * float(2**64 - 1)))
    best = -1
    best_truth = None
    for r in range(restarts):
        stream = np.uint64((seed & 0xFFFFFFFF) * 0x100000000 + r + 1)
        count, truth = _walksat_restart(
            lits, clause_ptr, occ, occ_ptr, instance.num_vars, flips,
            noise_threshold, stream,
        )
        if count > best:
            best = int(count)
            best_truth = truth
    assignment = Assignment.from_bools([bool(b) for b in best_truth[1:]])
    return best + instance.tautologies, assignment
