from __future__ import annotations

import sys

import numpy as np
import pytest

from switchcert import certify, feasible_interval, make_system

import helpers


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None) if acceptance else None
    if results:
        terminalreporter.section("acceptance criteria")
        for line in results:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def saddle_pair_system():
    graph, matrices = helpers.symmetric_saddle_ring()
    return make_system(graph, matrices)


@pytest.fixture(scope="session")
def prescribed_ring():
    return helpers.prescribed_basis_ring()


@pytest.fixture(scope="session")
def prescribed_certificate(prescribed_ring):
    """Certificate for the prescribed-basis ring at mid-window dwells."""
    return certify(prescribed_ring["system"], {(1, 2): 2.5, (2, 1): 1.75})


@pytest.fixture(scope="session")
def diagonal_ring_system():
    graph, matrices = helpers.diagonal_saddle_ring()
    return make_system(graph, matrices)


@pytest.fixture(scope="session")
def trace_ring_system():
    graph, matrices = helpers.positive_trace_ring()
    return make_system(graph, matrices)


@pytest.fixture(scope="session")
def branched_system():
    graph, matrices = helpers.branched_four_mode_system()
    return make_system(graph, matrices)


@pytest.fixture(scope="session")
def three_ring():
    return helpers.three_ring_prescribed()


@pytest.fixture(scope="session")
def three_ring_certificate(three_ring):
    system = three_ring["system"]
    etas = {}
    for edge in system.graph.edges:
        components = feasible_interval(system, edge)
        lo, hi = max(components, key=lambda c: c[1] - c[0])
        etas[edge] = 0.5 * (lo + hi)
    return certify(system, etas)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260815)
