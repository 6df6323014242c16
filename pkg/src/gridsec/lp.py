"""Exact two-phase simplex for standard-form linear programs.

Problems are  min f'x  s.t.  C x = d,  x >= 0,  with every coefficient an
exact rational.  No floating point enters the solve path, so the returned
basic feasible solutions are exact and the Infeasible/Unbounded/Optimal
trichotomy is decided, not estimated.

The tableau kernel stores each row as integer numerators over one positive
denominator, so pivots are integer cross-multiplications followed by a gcd
sweep.  On the unimodular-style instances this package cares about the
denominators stay tiny, which is what makes exact arithmetic affordable.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import gcd, lcm

from .errors import DimensionMismatch, InconsistentRow
from .exactla import int_rank

# Carrier for exact rational scalars: arbitrary precision, canonical reduced
# form, positive denominator.  The stdlib type meets the contract as-is.
Rational = Fraction


def _to_frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # floats are taken at their shortest decimal repr, so 0.1 means 1/10
        return Fraction(repr(float(x)))
    if isinstance(x, str):
        return Fraction(x)
    try:
        return Fraction(int(x))
    except (TypeError, ValueError):
        return Fraction(x)


@dataclass(frozen=True)
class StandardFormLP:
    """min cost'x  subject to  constraint_matrix @ x = rhs,  x >= 0."""

    constraint_matrix: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[Fraction, ...]
    cost: tuple[Fraction, ...]

    @staticmethod
    def create(C, d, f) -> "StandardFormLP":
        rows = tuple(tuple(_to_frac(v) for v in row) for row in C)
        rhs = tuple(_to_frac(v) for v in d)
        cost = tuple(_to_frac(v) for v in f)
        if len(rows) != len(rhs):
            raise DimensionMismatch("constraint matrix and rhs disagree on row count")
        width = len(cost)
        if any(len(r) != width for r in rows):
            raise DimensionMismatch("constraint row width does not match cost length")
        return StandardFormLP(rows, rhs, cost)

    @property
    def num_rows(self) -> int:
        return len(self.constraint_matrix)

    @property
    def num_vars(self) -> int:
        return len(self.cost)


@dataclass(frozen=True)
class BasicFeasibleSolution:
    """Exact vertex: values >= 0, C@values = d, nonbasic entries zero."""

    values: tuple[Fraction, ...]
    basis: tuple[int, ...]
    objective: Fraction


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpOutcome:
    status: LpStatus
    solution: BasicFeasibleSolution | None = None
    pivots: int = 0


def _int_row(fracs) -> list[int]:
    """Scale a row of Fractions to integers by its lcm denominator."""
    mult = 1
    for v in fracs:
        mult = lcm(mult, v.denominator)
    return [int(v * mult) for v in fracs]


def _gcd_reduce(nums: list[int], den: int) -> tuple[list[int], int]:
    g = den
    for v in nums:
        g = gcd(g, v)
        if g == 1:
            return nums, den
    if g > 1:
        nums = [v // g for v in nums]
        den //= g
    return nums, den


def preprocess(lp: StandardFormLP) -> StandardFormLP:
    """Drop linearly dependent rows; raise InconsistentRow on 0 = nonzero.

    The returned LP keeps the surviving original rows (same feasible set,
    same objective) and has full row rank.
    """
    kept: list[int] = []
    pivoted: list[tuple[int, list[int]]] = []   # (pivot col, reduced augmented row)
    p = lp.num_vars
    for idx, (row, b) in enumerate(zip(lp.constraint_matrix, lp.rhs)):
        aug = _int_row(list(row) + [b])
        for pc, base in pivoted:
            v = aug[pc]
            if v:
                pv = base[pc]
                aug = [a * pv - v * c for a, c in zip(aug, base)]
                aug, _ = _gcd_reduce(aug, 1)
        pivot = next((j for j in range(p) if aug[j]), None)
        if pivot is None:
            if aug[p]:
                raise InconsistentRow(f"row {idx} reduces to 0 = {aug[p]}")
            continue
        if aug[pivot] < 0:
            aug = [-v for v in aug]
        pivoted.append((pivot, aug))
        kept.append(idx)
    return StandardFormLP(
        tuple(lp.constraint_matrix[i] for i in kept),
        tuple(lp.rhs[i] for i in kept),
        lp.cost,
    )


class _Tableau:
    """Simplex tableau over integer numerators with per-row denominators."""

    def __init__(self, rows: list[list[int]], dens: list[int], basis: list[int]):
        self.rows = rows            # each row: coefficients + rhs in last slot
        self.dens = dens            # positive
        self.basis = basis
        self.zrow: list[int] = []   # objective row, rhs slot holds -z
        self.zden: int = 1

    def pivot(self, r: int, c: int) -> None:
        prow = self.rows[r]
        pv = prow[c]
        if pv < 0:
            prow = [-v for v in prow]
            pv = -pv
        prow, pv = _gcd_reduce(prow, pv)
        self.rows[r] = prow
        self.dens[r] = pv
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row[c]
            if f:
                new = [a * pv - f * b for a, b in zip(row, prow)]
                new, nd = _gcd_reduce(new, self.dens[i] * pv)
                self.rows[i] = new
                self.dens[i] = nd
        f = self.zrow[c]
        if f:
            new = [a * pv - f * b for a, b in zip(self.zrow, prow)]
            self.zrow, self.zden = _gcd_reduce(new, self.zden * pv)
        self.basis[r] = c

    def entering(self, ncols: int, dantzig: bool) -> int | None:
        z = self.zrow
        if not dantzig:
            for j in range(ncols):
                if z[j] < 0:
                    return j
            return None
        best = None
        best_v = 0
        for j in range(ncols):
            if z[j] < best_v:
                best, best_v = j, z[j]
        return best

    def leaving(self, c: int) -> int | None:
        """Minimum-ratio row; ties broken by smallest basic variable index."""
        best = None
        bn = bd = 0
        for i, row in enumerate(self.rows):
            a = row[c]
            if a > 0:
                rn = row[-1]
                if best is None:
                    best, bn, bd = i, rn, a
                    continue
                lhs = rn * bd
                rhs = bn * a
                if lhs < rhs or (lhs == rhs and self.basis[i] < self.basis[best]):
                    best, bn, bd = i, rn, a
        return best

    def objective(self) -> Fraction:
        return -Fraction(self.zrow[-1], self.zden)


def _run_simplex(tab: _Tableau, ncols: int, rule: str, max_pivots: int,
                 pivots: list[int], trace) -> str:
    # Dantzig selection may stall on degenerate vertices; past a budget we
    # fall back to Bland, whose termination is unconditional.
    dantzig_budget = pivots[0] + 3 * (len(tab.rows) + ncols) + 20
    while True:
        dantzig = rule == "dantzig" and pivots[0] < dantzig_budget
        c = tab.entering(ncols, dantzig)
        if c is None:
            return "optimal"
        r = tab.leaving(c)
        if r is None:
            return "unbounded"
        if trace is not None:
            trace.write(f"pivot enter={c} leave={tab.basis[r]} row={r}\n")
        tab.pivot(r, c)
        pivots[0] += 1
        if pivots[0] > max_pivots:
            raise RuntimeError(
                f"pivot budget {max_pivots} exceeded; anti-cycling defect")


def _solve_standard_ints(coeff_rows: list[list[int]], rhs: list[int],
                         cost, p: int, rule: str = "bland",
                         max_pivots: int | None = None, trace=None):
    """Exact simplex on integer data.

    Returns (status, values, basis, objective, pivots, dropped_rows).
    Redundant rows surviving to phase 1 are dropped exactly; inconsistent
    systems surface as "infeasible" via the phase-1 optimum.
    """
    l = len(coeff_rows)
    if max_pivots is None:
        max_pivots = 10_000 + 60 * (l + p)
    rows: list[list[int]] = []
    for r, b in zip(coeff_rows, rhs):
        if b < 0:
            rows.append([-v for v in r] + [-b])
        else:
            rows.append(list(r) + [b])

    # crash basis: singleton positive columns serve as ready-made basic vars
    col_count = [0] * p
    col_row = [0] * p
    for i, row in enumerate(rows):
        for j in range(p):
            if row[j]:
                col_count[j] += 1
                col_row[j] = i
    basis = [-1] * l
    used: set[int] = set()
    dens = [1] * l
    for i, row in enumerate(rows):
        for j in range(p):
            if col_count[j] == 1 and col_row[j] == i and row[j] > 0 and j not in used:
                basis[i] = j
                used.add(j)
                dens[i] = row[j]
                break

    art_rows = [i for i in range(l) if basis[i] == -1]
    n_art = len(art_rows)
    ncols = p + n_art
    rows = [row[:p] + [0] * n_art + [row[p]] for row in rows]
    for a, i in enumerate(art_rows):
        rows[i][p + a] = 1
        basis[i] = p + a

    tab = _Tableau(rows, dens, basis)
    pivots = [0]
    dropped = 0

    if art_rows:
        if trace is not None:
            trace.write(f"phase 1: rows={l} cols={ncols} artificials={len(art_rows)}\n")
        zrow = [0] * (ncols + 1)
        for i in art_rows:
            for j, v in enumerate(rows[i]):
                zrow[j] -= v
        for a in range(len(art_rows)):
            zrow[p + a] += 1
        tab.zrow, tab.zden = _gcd_reduce(zrow, 1)
        status = _run_simplex(tab, ncols, rule, max_pivots, pivots, trace)
        if status != "optimal":
            raise RuntimeError("phase 1 objective is bounded below; solver defect")
        if tab.objective() > 0:
            return "infeasible", None, None, None, pivots[0], dropped
        # drive leftover artificials out of the basis or drop redundant rows
        i = 0
        while i < len(tab.rows):
            if tab.basis[i] >= p:
                col = next((j for j in range(p) if tab.rows[i][j]), None)
                if col is None:
                    del tab.rows[i]
                    del tab.dens[i]
                    del tab.basis[i]
                    dropped += 1
                    continue
                tab.pivot(i, col)
            i += 1
        for i, row in enumerate(tab.rows):
            tab.rows[i] = row[:p] + [row[-1]]

    # phase 2: price out the true cost over the current basis
    acc = [_to_frac(c) for c in cost] + [Fraction(0)]
    for i, row in enumerate(tab.rows):
        cb = _to_frac(cost[tab.basis[i]])
        if cb:
            d = tab.dens[i]
            for j in range(p + 1):
                if row[j]:
                    acc[j] -= cb * Fraction(row[j], d)
    mult = 1
    for v in acc:
        mult = lcm(mult, v.denominator)
    tab.zrow = [int(v * mult) for v in acc]
    tab.zden = mult
    if trace is not None:
        trace.write(f"phase 2: rows={len(tab.rows)} cols={p}\n")
    status = _run_simplex(tab, p, rule, max_pivots, pivots, trace)
    if status == "unbounded":
        return "unbounded", None, None, None, pivots[0], dropped
    values = [Fraction(0)] * p
    for i, row in enumerate(tab.rows):
        values[tab.basis[i]] = Fraction(row[-1], tab.dens[i])
    return ("optimal", values, sorted(tab.basis), tab.objective(), pivots[0], dropped)


def solve_lp(lp: StandardFormLP, *, rule: str = "bland",
             max_pivots: int | None = None, trace=None) -> LpOutcome:
    """Two-phase simplex over exact rationals.

    rule="bland" (default) never cycles; rule="dantzig" picks the most
    negative reduced cost for speed and falls back to Bland past a pivot
    budget.  The input is preprocessed internally, so the returned basis
    refers to preprocess(lp)'s rows (preprocess is idempotent).  Optimal
    outcomes are only emitted from a tableau whose reduced costs are all
    nonnegative, which is the exactness certificate.
    """
    if rule not in ("bland", "dantzig"):
        raise ValueError(f"unknown pivot rule {rule!r}")
    try:
        pre = preprocess(lp)
    except InconsistentRow:
        return LpOutcome(LpStatus.INFEASIBLE)
    coeff = []
    rhs = []
    for row, b in zip(pre.constraint_matrix, pre.rhs):
        scaled = _int_row(list(row) + [b])
        coeff.append(scaled[:-1])
        rhs.append(scaled[-1])
    status, values, basis, obj, pivots, dropped = _solve_standard_ints(
        coeff, rhs, pre.cost, pre.num_vars, rule, max_pivots, trace)
    if dropped:
        raise RuntimeError("rank drop after preprocess; solver defect")
    if status == "infeasible":
        return LpOutcome(LpStatus.INFEASIBLE, pivots=pivots)
    if status == "unbounded":
        return LpOutcome(LpStatus.UNBOUNDED, pivots=pivots)
    check = sum(c * v for c, v in zip(pre.cost, values))
    if check != obj:
        raise RuntimeError("objective bookkeeping mismatch; solver defect")
    sol = BasicFeasibleSolution(tuple(values), tuple(basis), obj)
    return LpOutcome(LpStatus.OPTIMAL, sol, pivots)


def verify_bfs(lp: StandardFormLP, sol: BasicFeasibleSolution) -> bool:
    """Exact check of the BFS invariants against the given (preprocessed) LP.

    Raises DimensionMismatch when sizes make the check meaningless; returns
    False for any violated invariant (negativity, C x != d, dependent basis
    columns, nonzero nonbasic entries, wrong objective).
    """
    l, p = lp.num_rows, lp.num_vars
    if len(sol.values) != p:
        raise DimensionMismatch(f"expected {p} values, got {len(sol.values)}")
    if any(not (0 <= j < p) for j in sol.basis):
        raise DimensionMismatch("basis index out of range")
    if len(sol.basis) != l or len(set(sol.basis)) != l:
        return False
    if any(v < 0 for v in sol.values):
        return False
    basic = set(sol.basis)
    if any(v != 0 for j, v in enumerate(sol.values) if j not in basic):
        return False
    for row, b in zip(lp.constraint_matrix, lp.rhs):
        if sum(c * v for c, v in zip(row, sol.values)) != b:
            return False
    cols = [[row[j] for j in sol.basis] for row in lp.constraint_matrix]
    if l and int_rank([_int_row(r) for r in cols]) != l:
        return False
    if sum(c * v for c, v in zip(lp.cost, sol.values)) != sol.objective:
        return False
    return True
