"""Shared constants and random instance generators for the test suite."""
from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from gridsec import Network, MeasurementSystem, TUProblem
from gridsec.tumin import gen_consecutive_ones

CASES = Path(__file__).resolve().parent.parent / "cases"
IEEE14_CASE = CASES / "ieee14.case"
SIXBUS_CASE = CASES / "sixbus7.case"

# two triangles joined by three rungs; the edge list fixes meter numbering
SIXBUS_EDGES = ((1, 2), (2, 3), (4, 5), (5, 6), (1, 4), (2, 5), (3, 6))

# incidence transpose over all six buses (one column per bus)
SIXBUS_A_FULL = np.array([
    [1, -1, 0, 0, 0, 0],
    [0, 1, -1, 0, 0, 0],
    [0, 0, 0, 1, -1, 0],
    [0, 0, 0, 0, 1, -1],
    [1, 0, 0, -1, 0, 0],
    [0, 1, 0, 0, -1, 0],
    [0, 0, 1, 0, 0, -1],
], dtype=int)

# reference bus 1 dropped
SIXBUS_A = SIXBUS_A_FULL[:, 1:]

# published minimum-cardinality attack images for meter 6 (signed A x)
SIXBUS_OPTIMA = (
    (-1, 0, 0, -1, 0, 1, 0),
    (-1, 1, 0, 0, 0, 1, 0),
)

# published nullspace reformulation for meter 6: rows span the left
# nullspace of A, the last row pins meter 6
PAPER_L = (
    (1, 1, -1, -1, -1, 0, 1),
    (1, 0, -1, 0, -1, 1, 0),
)
PAPER_PHI = PAPER_L + ((0, 0, 0, 0, 0, 1, 0),)
PAPER_B = (0, 0, 1)


def sixbus_network(scale: Fraction = Fraction(1)) -> Network:
    lines = tuple((u, v, Fraction(1) * scale) for u, v in SIXBUS_EDGES)
    return Network(6, lines)


def sixbus_meas(protected=frozenset()) -> MeasurementSystem:
    return MeasurementSystem(tuple(range(1, 8)), protected=frozenset(protected))


def random_connected_edges(rng: random.Random, max_nodes: int = 10):
    """Random connected multigraph: spanning tree plus a few extra edges."""
    n = rng.randint(3, max_nodes)
    edges = [(rng.randint(1, i - 1), i) for i in range(2, n + 1)]
    extra = rng.randint(0, n)
    for _ in range(extra):
        u = rng.randint(1, n)
        v = rng.randint(1, n)
        if u != v:
            edges.append((min(u, v), max(u, v)))
    rng.shuffle(edges)
    return n, edges


def incidence_transpose(n_nodes: int, edges, truncate: bool) -> np.ndarray:
    """Rows are edges with +1 at the first endpoint; column 1 drops if asked."""
    A = np.zeros((len(edges), n_nodes), dtype=int)
    for r, (u, v) in enumerate(edges):
        A[r, u - 1] = 1
        A[r, v - 1] = -1
    return A[:, 1:] if truncate else A


def random_graph_problem(rng: random.Random, max_nodes: int = 10) -> TUProblem:
    """Metered-subset incidence transpose with random target and protection."""
    n, edges = random_connected_edges(rng, max_nodes)
    A = incidence_transpose(n, edges, truncate=rng.random() < 0.5)
    m = A.shape[0]
    keep = sorted(rng.sample(range(m), rng.randint(1, m)))
    A = A[keep, :]
    m = A.shape[0]
    k = rng.randint(1, m)
    pool = [j for j in range(1, m + 1) if j != k]
    I = frozenset(rng.sample(pool, rng.randint(0, min(len(pool), 3))))
    return TUProblem(A, k, I)


def random_interval_problem(rng: random.Random, max_side: int = 10) -> TUProblem:
    """Consecutive-ones matrix with random target and protection."""
    m = rng.randint(2, max_side)
    n = rng.randint(1, max_side)
    A = gen_consecutive_ones(m, n, seed=rng.randrange(2**30))
    k = rng.randint(1, m)
    pool = [j for j in range(1, m + 1) if j != k]
    I = frozenset(rng.sample(pool, rng.randint(0, min(len(pool), 3))))
    return TUProblem(A, k, I)


def random_tu_problem(rng: random.Random) -> TUProblem:
    if rng.random() < 0.5:
        return random_graph_problem(rng)
    return random_interval_problem(rng)


def random_injection_system(rng: random.Random, max_nodes: int = 5):
    """Small network with all flows metered plus at least one injection."""
    n, edges = random_connected_edges(rng, max_nodes)
    lines = tuple((u, v, Fraction(rng.randint(1, 9), rng.randint(1, 9)))
                  for u, v in edges)
    net = Network(n, lines)
    candidates = [b for b in range(1, n + 1) if b != net.reference_bus]
    buses = tuple(sorted(rng.sample(candidates, rng.randint(1, len(candidates)))))
    nf = len(lines)
    k = rng.randint(1, nf)
    pool = [j for j in range(1, nf + 1) if j != k]
    protected = frozenset(rng.sample(pool, rng.randint(0, min(len(pool), 2))))
    meas = MeasurementSystem(tuple(range(1, nf + 1)), buses, protected)
    return net, meas, k


@pytest.fixture
def sixbus():
    return sixbus_network(), sixbus_meas()
