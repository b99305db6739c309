"""Shared fixtures: reference graphs and the fixed-seed random graph pool."""

from collections import namedtuple

import numpy as np
import pytest

import grovertails as gt

POOL_SEED = 20240613
POOL_SIZE = 50
MAX_PAIRS_PER_GRAPH = 10

Walk = namedtuple("Walk", "graph tg arcs ops cycles")


def make_walk(graph: gt.InternalGraph, tails) -> Walk:
    tg = gt.attach_tails(graph, list(tails))
    arcs = gt.arc_space(graph)
    ops = gt.build_operators(tg, arcs)
    cycles = gt.fundamental_cycles(graph, arcs)
    return Walk(graph, tg, arcs, ops, cycles)


def random_connected_graph(rng: np.random.Generator) -> gt.InternalGraph:
    """Random tree on 2..8 vertices plus extra edges with probability 0.35."""
    n = int(rng.integers(2, 9))
    edges = set()
    for v in range(1, n):
        edges.add((int(rng.integers(0, v)), v))
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in edges and rng.random() < 0.35:
                edges.add((u, v))
    return gt.make_graph(n, sorted(edges))


def sampled_pairs(graph: gt.InternalGraph, graph_index: int) -> list[tuple[int, int]]:
    """Up to 10 distinct boundary pairs (u <= v, same vertex allowed),
    sampled deterministically per graph."""
    pairs = [(u, v) for u in range(graph.vertex_count) for v in range(u, graph.vertex_count)]
    if len(pairs) <= MAX_PAIRS_PER_GRAPH:
        return pairs
    rng = np.random.default_rng([POOL_SEED, graph_index])
    chosen = rng.choice(len(pairs), size=MAX_PAIRS_PER_GRAPH, replace=False)
    return [pairs[i] for i in sorted(chosen)]


@pytest.fixture(scope="session")
def graph_pool() -> list[gt.InternalGraph]:
    rng = np.random.default_rng(POOL_SEED)
    return [random_connected_graph(rng) for _ in range(POOL_SIZE)]


@pytest.fixture()
def c3() -> Walk:
    """Triangle with tails at vertices 0 (input) and 1 (output)."""
    return make_walk(gt.parse_edge_list("0 1\n1 2\n2 0"), [0, 1])


@pytest.fixture()
def p2() -> Walk:
    """Single edge with a tail at each end."""
    return make_walk(gt.parse_edge_list("0 1"), [0, 1])


C3_STATIONARY_MULTISET = sorted([1 / 3, 1 / 6, 1 / 3, 2 / 3, 2 / 3, 5 / 6])
C3_UNIT_EIGENVECTOR = np.array([1.0, -1.0, -1.0, 1.0, 1.0, -1.0])
C3_INTERNAL_MASS = 11 / 6
