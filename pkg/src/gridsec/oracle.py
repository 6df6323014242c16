"""Independent reference solvers and diagnostics for security indices.

Everything here reaches the same answers as the production path by a
different route: exhaustive enumeration backed by exact rank tests, a
big-M mixed-integer formulation solved by branch and bound on exact LP
relaxations, and compressed-sensing measures (mutual coherence, restricted
isometry) of the nullspace reformulation.  None of it shares solver state
with the l1 path, so agreement between the two is meaningful evidence.

Meter/row indices are 1-based, matching the measurement-system convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from time import perf_counter

import numpy as np

from . import lp
from .errors import (
    CapExceeded,
    HasInjections,
    InfeasibleIndex,
    SizeLimitExceeded,
    TrivialNullspace,
    ValidationError,
    ZeroColumn,
)
from .exactla import frac_rref, in_row_space, int_rank, left_nullspace
from .grid import MeasurementSystem, Network, incidence
from .security import AttackVector, CriticalTuple, SecurityIndexResult


def _int_matrix(A) -> list[list[int]]:
    M = np.asarray(A)
    if M.ndim != 2 or M.size == 0:
        raise ValueError("expected a nonempty 2-D matrix")
    if not issubclass(M.dtype.type, np.integer):
        Mf = np.asarray(M, dtype=float)
        if not np.array_equal(Mf, np.round(Mf)):
            raise ValueError("expected integer entries")
        M = Mf.astype(int)
    return [[int(v) for v in row] for row in M]


# --- exhaustive enumeration ----------------------------------------------


def exhaustive_min_support(A, k: int, I=frozenset(), *,
                           cap: int = 200_000) -> int | None:
    """Minimum attack cardinality against row k by subset enumeration.

    A set S of unprotected rows (k excluded) admits an attack touching only
    S and k exactly when row k is outside the row space of the protected
    rows plus the remaining untouched rows.  Scanning S by increasing size
    gives the minimum as 1 + |first feasible S|.  Returns None when even
    touching everything cannot move row k (it lies in the protected row
    space); raises CapExceeded past the subset budget.
    """
    rows = _int_matrix(A)
    m = len(rows)
    if not 1 <= k <= m:
        raise ValueError(f"target row {k} outside 1..{m}")
    I = frozenset(int(i) for i in I)
    if any(not 1 <= i <= m for i in I):
        raise ValueError("protected row outside 1..m")
    if k in I:
        raise ValueError("target row cannot be protected")
    target = rows[k - 1]
    prot_rows = [rows[i - 1] for i in sorted(I)]
    if in_row_space(target, prot_rows):
        return None
    others = [j for j in range(1, m + 1) if j != k and j not in I]
    tested = 0
    for size in range(len(others) + 1):
        for S in combinations(others, size):
            tested += 1
            if tested > cap:
                raise CapExceeded(cap)
            silent = set(others) - set(S)
            basis_rows = prot_rows + [rows[j - 1] for j in sorted(silent)]
            if not in_row_space(target, basis_rows):
                return size + 1
    return None


def exhaustive_min_tuple(A, k: int, *, cap: int = 200_000) -> CriticalTuple | None:
    """Smallest critical tuple containing row k, by direct enumeration.

    J is critical for k when the rows outside J leave the state
    undetermined while restoring row k alone determines it again.
    """
    rows = _int_matrix(A)
    m, n = len(rows), len(rows[0])
    if not 1 <= k <= m:
        raise ValueError(f"target row {k} outside 1..{m}")
    others = [j for j in range(1, m + 1) if j != k]
    tested = 0
    for size in range(1, m + 1):
        for rest in combinations(others, size - 1):
            tested += 1
            if tested > cap:
                raise CapExceeded(cap)
            J = frozenset(rest) | {k}
            outside = [rows[j - 1] for j in range(1, m + 1) if j not in J]
            if int_rank(outside) >= n:
                continue
            if int_rank(outside + [rows[k - 1]]) == n:
                return CriticalTuple(J, size, k)
    return None


# --- big-M mixed-integer reference solver --------------------------------


@dataclass(frozen=True)
class MilpInstance:
    """Data of the big-M formulation: binaries y mark touched rows.

    minimize sum(y) subject to |A(j,:) d| <= big_m * y_j on unprotected
    rows, A(I,:) d = 0, A(k,:) d = 1.  big_m must dominate |A(j,:) d| at
    some optimum; the max column sum of the truncated incidence works for
    flow rows because an optimal d exists with entries in {-1,0,1}.
    """

    A: np.ndarray
    k: int
    protected: frozenset[int] = frozenset()
    big_m: Fraction = Fraction(2)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=int)
        if A.ndim != 2 or A.size == 0:
            raise ValueError("A must be a nonempty 2-D integer matrix")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "protected",
                           frozenset(int(i) for i in self.protected))
        object.__setattr__(self, "big_m", Fraction(self.big_m))
        m = A.shape[0]
        if not 1 <= self.k <= m:
            raise ValueError(f"target row {self.k} outside 1..{m}")
        if any(not 1 <= i <= m for i in self.protected):
            raise ValueError("protected row outside 1..m")
        if self.k in self.protected:
            raise ValueError("target row cannot be protected")
        if self.big_m <= 0:
            raise ValueError("big_m must be positive")

    @classmethod
    def from_system(cls, net: Network, meas: MeasurementSystem, k: int) -> "MilpInstance":
        if meas.injection_meters:
            raise HasInjections(f"{len(meas.injection_meters)} injection meters present")
        kind, _ = meas.meter_kind(k)
        assert kind == "flow"
        if k in meas.protected:
            raise ValidationError(f"meter {k} is protected and cannot be targeted")
        _, B = incidence(net)
        A = B.T[[lid - 1 for lid in meas.flow_meters], :]
        big_m = Fraction(int(np.abs(B).sum(axis=0).max()))
        return cls(A, k, frozenset(meas.protected), big_m)


def _node_lp(inst: MilpInstance, fixed0: frozenset[int], fixed1: frozenset[int]):
    """Exact LP relaxation with the fixed binaries substituted out.

    Free rows contribute y_j = (t+ + t-)/big_m through a link row
    A(j,:) d - t+ + t- = 0 and a box t+ + t- + u = big_m; rows fixed to 1
    keep only the box |A(j,:) d| <= big_m; rows fixed to 0 become
    equalities.  States split as d = dp - dm for nonnegativity.
    """
    A = inst.A
    m, n = A.shape
    M = inst.big_m
    free = [j for j in range(1, m + 1)
            if j != inst.k and j not in inst.protected
            and j not in fixed0 and j not in fixed1]
    col = 2 * n
    tcol = {}
    for j in free:
        tcol[j] = col
        col += 3
    scol = {}
    for j in sorted(fixed1):
        scol[j] = col
        col += 2
    p = col

    def state_part(j, sign=1):
        row = [Fraction(0)] * p
        for c in range(n):
            a = sign * int(A[j - 1, c])
            if a:
                row[c] = Fraction(a)
                row[n + c] = Fraction(-a)
        return row

    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for j in free:
        link = state_part(j)
        link[tcol[j]] = Fraction(-1)
        link[tcol[j] + 1] = Fraction(1)
        rows.append(link)
        rhs.append(Fraction(0))
        box = [Fraction(0)] * p
        box[tcol[j]] = box[tcol[j] + 1] = box[tcol[j] + 2] = Fraction(1)
        rows.append(box)
        rhs.append(M)
    for j in sorted(fixed1):
        up = state_part(j)
        up[scol[j]] = Fraction(1)
        rows.append(up)
        rhs.append(M)
        lo = state_part(j, sign=-1)
        lo[scol[j] + 1] = Fraction(1)
        rows.append(lo)
        rhs.append(M)
    for j in sorted(fixed0 | inst.protected):
        rows.append(state_part(j))
        rhs.append(Fraction(0))
    rows.append(state_part(inst.k))
    rhs.append(Fraction(1))

    cost = [Fraction(0)] * p
    inv = 1 / M
    for j in free:
        cost[tcol[j]] = cost[tcol[j] + 1] = inv

    int_rows: list[list[int]] = []
    int_rhs: list[int] = []
    for row, b in zip(rows, rhs):
        scaled = lp._int_row(row + [b])
        int_rows.append(scaled[:-1])
        int_rhs.append(scaled[-1])
    return int_rows, int_rhs, cost, p, free, tcol


def solve_milp_instance(inst: MilpInstance, *, rule: str = "dantzig",
                        trace=None) -> tuple[int, tuple[Fraction, ...], frozenset[int], int] | None:
    """Branch and bound on the big-M formulation.

    Depth-first, branching the lowest-index fractional binary with the
    zero branch explored first; node bounds come from exact LP
    relaxations, so a subtree is pruned only when its bound provably
    exceeds best - 1 (the objective is integral).  Returns
    (optimum, d, support, nodes) or None when even the root is infeasible.
    """
    A = inst.A
    m, n = A.shape
    M = inst.big_m
    best: int | None = None
    best_d: list[Fraction] | None = None
    nodes = 0
    stack: list[tuple[frozenset[int], frozenset[int]]] = [(frozenset(), frozenset())]
    while stack:
        fixed0, fixed1 = stack.pop()
        nodes += 1
        # the target row always counts: |A(k,:) d| = 1 forces its binary to 1
        if best is not None and len(fixed1) + 1 > best - 1:
            if trace is not None:
                trace.write(f"node depth={len(fixed0) + len(fixed1)} "
                            f"fixed1={len(fixed1)} action=prune-depth\n")
            continue
        rows, rhs, cost, p, free, tcol = _node_lp(inst, fixed0, fixed1)
        status, values, _, objective, _, _ = lp._solve_standard_ints(
            rows, rhs, cost, p, rule=rule)
        if status == "infeasible":
            if trace is not None:
                trace.write(f"node depth={len(fixed0) + len(fixed1)} action=infeasible\n")
            continue
        if status != "optimal":
            raise RuntimeError("bounded relaxation reported unbounded; solver defect")
        bound = objective + len(fixed1) + 1
        if best is not None and bound > best - 1:
            if trace is not None:
                trace.write(f"node depth={len(fixed0) + len(fixed1)} "
                            f"bound={bound} best={best} action=prune-bound\n")
            continue
        y = {j: (values[tcol[j]] + values[tcol[j] + 1]) / M for j in free}
        frac = [j for j in free if y[j] != 0 and y[j] != 1]
        if not frac:
            value = len(fixed1) + sum(1 for j in free if y[j] == 1) + 1
            if best is None or value < best:
                best = value
                best_d = [values[c] - values[n + c] for c in range(n)]
                if trace is not None:
                    trace.write(f"node depth={len(fixed0) + len(fixed1)} "
                                f"value={value} action=incumbent\n")
            continue
        j = frac[0]
        if trace is not None:
            trace.write(f"node depth={len(fixed0) + len(fixed1)} "
                        f"bound={bound} branch={j}\n")
        stack.append((fixed0, fixed1 | {j}))
        stack.append((fixed0 | {j}, fixed1))
    if best is None:
        return None
    assert best_d is not None
    support = frozenset(
        j for j in range(1, m + 1) if j not in inst.protected
        and sum(int(A[j - 1, c]) * best_d[c] for c in range(n)) != 0)
    if len(support) != best:
        raise AssertionError("incumbent support disagrees with the optimum")
    return best, tuple(best_d), support, nodes


def milp_solve(net: Network, meas: MeasurementSystem, k: int, *,
               rule: str = "dantzig", trace=None) -> SecurityIndexResult:
    """Security index of flow meter k via the big-M reference solver.

    Self-contained alternative to the l1 path: same reduction to integer
    rows, entirely different search.  The witness is rescaled so meter k
    reads +1 in measurement units.
    """
    t0 = perf_counter()
    inst = MilpInstance.from_system(net, meas, k)
    out = solve_milp_instance(inst, rule=rule, trace=trace)
    if out is None:
        raise InfeasibleIndex(k)
    value, d, support, _ = out
    xk = net.lines[meas.flow_meters[k - 1] - 1].reactance
    dtheta = [xk * v for v in d]
    dz = []
    for pos, lid in enumerate(meas.flow_meters):
        xj = net.lines[lid - 1].reactance
        w = sum(Fraction(int(inst.A[pos, c])) * d[c] for c in range(inst.A.shape[1]))
        dz.append(w * xk / xj)
    touched = frozenset(i + 1 for i, v in enumerate(dz) if v != 0)
    if touched != support:
        raise AssertionError("witness support disagrees with the solver")
    attack = AttackVector(np.array([float(v) for v in dtheta]),
                          np.array([float(v) for v in dz]), touched)
    return SecurityIndexResult(
        meter=k, index=value, attack=attack, method="milp",
        bounds=(value, value), solve_time=perf_counter() - t0)


# --- compressed-sensing diagnostics --------------------------------------


def _frac_value(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float) or isinstance(v, np.floating):
        return Fraction(repr(float(v)))
    return Fraction(int(v))


def _frac_matrix(phi) -> list[list[Fraction]]:
    if isinstance(phi, CsInstance):
        return [list(row) for row in phi.phi]
    if isinstance(phi, np.ndarray) and phi.dtype != object:
        return [[_frac_value(v) for v in row] for row in phi]
    return [[_frac_value(v) for v in row] for row in phi]


@dataclass(frozen=True)
class CsInstance:
    """Sparse-recovery form of an index problem: minimize ||w||_0, phi w = b.

    Columns range over the unprotected meters (ids in `columns`); the last
    row pins the target meter to 1 and the rest force w into the
    measurement range space.
    """

    phi: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]
    columns: tuple[int, ...]
    target: int

    def __post_init__(self):
        phi = tuple(tuple(Fraction(v) for v in row) for row in self.phi)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "b", tuple(Fraction(v) for v in self.b))
        object.__setattr__(self, "columns", tuple(int(c) for c in self.columns))
        if len(self.b) != len(phi):
            raise ValueError("b length must match the row count")
        if phi and any(len(row) != len(self.columns) for row in phi):
            raise ValueError("column labels must match the row width")
        if self.target not in self.columns:
            raise ValueError("target meter missing from the columns")


def nullspace_reformulate(A, k: int, I=frozenset()) -> CsInstance:
    """Express the index of row k as sparse recovery over meter space.

    The reachable measurement moves are exactly the kernel of the left
    nullspace of A, so with L spanning that nullspace the problem reads:
    minimize ||dz||_0 subject to L dz = 0, dz_k = 1, dz_I = 0.  Protected
    coordinates are substituted out (their columns are dropped), the
    remaining homogeneous rows are re-reduced to a full-row-rank canonical
    form, and the target row e_k, rhs 1, is appended.
    """
    rows = _frac_matrix(A)
    m = len(rows)
    if not 1 <= k <= m:
        raise ValueError(f"target row {k} outside 1..{m}")
    I = frozenset(int(i) for i in I)
    if any(not 1 <= i <= m for i in I):
        raise ValueError("protected row outside 1..m")
    if k in I:
        raise ValueError("target row cannot be protected")
    L = left_nullspace(rows)
    if not L:
        raise TrivialNullspace(
            "full row rank: every measurement move is reachable")
    cols = [i for i in range(1, m + 1) if i not in I]
    restricted = [[row[i - 1] for i in cols] for row in L]
    reduced = _full_row_rank(restricted)
    kpos = cols.index(k)
    e_k = [Fraction(0)] * len(cols)
    e_k[kpos] = Fraction(1)
    phi = tuple(tuple(r) for r in reduced + [e_k])
    b = tuple([Fraction(0)] * len(reduced) + [Fraction(1)])
    return CsInstance(phi, b, tuple(cols), k)


def _full_row_rank(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    """Canonical (reduced row echelon) basis of the row space."""
    if not rows:
        return []
    reduced, _ = frac_rref(rows)
    return reduced


def mutual_coherence(phi) -> float:
    """Largest normalized inner product between distinct columns.

    Computed from exact Gram entries, so values like 1 or 0 come out
    exactly.  A zero column has no direction, hence ZeroColumn.
    """
    rows = _frac_matrix(phi)
    if not rows:
        raise ValueError("empty matrix")
    m = len(rows[0])
    cols = [[row[j] for row in rows] for j in range(m)]
    norms2 = [sum(v * v for v in col) for col in cols]
    for j, s in enumerate(norms2):
        if s == 0:
            raise ZeroColumn(f"column {j + 1} is zero")
    best = Fraction(0)          # best mu^2 so far
    for i in range(m):
        for j in range(i + 1, m):
            dot = sum(a * b for a, b in zip(cols[i], cols[j]))
            ratio = dot * dot / (norms2[i] * norms2[j])
            if ratio > best:
                best = ratio
    return math.sqrt(best)


def coherence_bound(phi) -> float:
    """Sparsity level below which l0/l1 recovery is guaranteed: (1 + 1/mu)/2."""
    mu = mutual_coherence(phi)
    if mu == 0:
        return math.inf
    return 0.5 * (1.0 + 1.0 / mu)


def rip_constant(phi, s: int, *, budget: int = 200_000) -> float:
    """Restricted isometry constant of order s, by support enumeration.

    For each column subset T with |T| <= s the Gram spectrum of phi_T is
    compared against 1; subsets up to size 2 use closed-form eigenvalues
    on exact Gram entries, larger ones use floating eigendecomposition.
    """
    rows = _frac_matrix(phi)
    if not rows:
        raise ValueError("empty matrix")
    m = len(rows[0])
    if not 1 <= s <= m:
        raise ValueError(f"order must lie in 1..{m}")
    total = sum(math.comb(m, t) for t in range(1, s + 1))
    if total > budget:
        raise SizeLimitExceeded(f"{total} supports exceeds budget {budget}")
    cols = [[row[j] for row in rows] for j in range(m)]

    def dot(i, j):
        return sum(a * b for a, b in zip(cols[i], cols[j]))

    delta = 0.0
    for i in range(m):
        g = dot(i, i)
        delta = max(delta, abs(float(g) - 1.0))
    if s >= 2:
        for i in range(m):
            for j in range(i + 1, m):
                a, b, c = dot(i, i), dot(i, j), dot(j, j)
                mean = Fraction(a + c, 2)
                disc2 = Fraction(a - c, 2) ** 2 + b * b
                root = math.sqrt(disc2)
                lam_hi = float(mean) + root
                lam_lo = float(mean) - root
                delta = max(delta, lam_hi - 1.0, 1.0 - lam_lo)
    for t in range(3, s + 1):
        for T in combinations(range(m), t):
            G = np.array([[float(dot(i, j)) for j in T] for i in T])
            lam = np.linalg.eigvalsh(G)
            delta = max(delta, float(lam[-1]) - 1.0, 1.0 - float(lam[0]))
    return delta


def exhaustive_min_card(phi, b=None, *, cap: int = 200_000) -> int | None:
    """Minimum support size of w with phi w = b, by support enumeration.

    A support T works exactly when b lies in the span of the T columns,
    an exact rank comparison.  Returns None when even the full support
    fails (b outside the range); raises CapExceeded past the budget.
    """
    if isinstance(phi, CsInstance) and b is None:
        b = list(phi.b)
    if b is None:
        raise ValueError("b is required unless phi is a CsInstance")
    rows = _frac_matrix(phi)
    bvec = [_frac_value(v) for v in b]
    if len(bvec) != len(rows):
        raise ValueError("b length must match the row count")
    m = len(rows[0]) if rows else 0
    # one integer scaling of the augmented rows; row scaling preserves
    # both ranks in the comparison
    aug = []
    for row, bv in zip(rows, bvec):
        mult = 1
        for v in list(row) + [bv]:
            mult = mult * v.denominator // math.gcd(mult, v.denominator)
        aug.append([int(v * mult) for v in list(row) + [bv]])
    if all(row[-1] == 0 for row in aug):
        return 0
    tested = 0
    for size in range(1, m + 1):
        for T in combinations(range(m), size):
            tested += 1
            if tested > cap:
                raise CapExceeded(cap)
            sub = [[row[c] for c in T] for row in aug]
            sub_b = [[row[c] for c in T] + [row[-1]] for row in aug]
            if int_rank(sub) == int_rank(sub_b):
                return size
    return None
