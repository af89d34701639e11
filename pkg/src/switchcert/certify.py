"""Dwell-interval stability certificates for graph-constrained switching.

A switched system couples one subsystem matrix per graph vertex with a
spectral decomposition ``A_r = P_r J_r P_r^-1``. The certificate condition
is per-edge: switching from r to s after a dwell of length t contributes a
factor ``P_s^-1 P_r exp(J_r t)`` to the chained solution operator, and the
system is exponentially stable over a signal class as soon as every such
factor has spectral norm < 1 on that edge's dwell interval.

This module evaluates those norms, scans for feasible dwell intervals,
classifies edges by whether the norm can be beaten with arbitrarily small
dwells, runs cheap necessary-condition pre-checks, derives per-loop time
budgets for the slow (norm-shrinking) edges, and assembles certificates
with explicit decay constants K (per-switch contraction) and C (transient
amplification).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import networkx as nx
import numpy as np

from . import matrixcore as mc
from .errors import (
    ConditionViolated,
    DimensionMismatch,
    BadLambdaStar,
    MissingInterval,
    NotAnEdge,
    NotHurwitz,
    SignalOutsideClass,
)
from .graph import enumerate_simple_loops, path_edges

#: Classification tags for edges by transition-matrix norm.
E1 = "E1"
E2 = "E2"

#: Edges whose transition norm is within this much of 1 count as E1.
_PARTITION_TOL = 1e-12


@dataclass(frozen=True)
class SwitchedSystem:
    """Subsystem matrices plus spectral decompositions, one per vertex."""

    graph: object
    subsystems: tuple
    decompositions: tuple

    def __post_init__(self):
        k = self.graph.vertex_count
        mats = tuple(
            mc.as_square_matrix(a, f"subsystem {i + 1}")
            for i, a in enumerate(self.subsystems)
        )
        decs = tuple(self.decompositions)
        if len(mats) != k or len(decs) != k:
            raise DimensionMismatch(
                f"need one subsystem and one decomposition per vertex "
                f"({k}), got {len(mats)} and {len(decs)}"
            )
        n = mats[0].shape[0]
        for i, (a, dec) in enumerate(zip(mats, decs)):
            if a.shape[0] != n or dec.n != n:
                raise DimensionMismatch("subsystem dimensions are not uniform")
            if not np.allclose(dec.source, a, atol=1e-8 * (1 + mc.spectral_norm(a))):
                raise ValueError(
                    f"decomposition {i + 1} does not reproduce its subsystem"
                )
        for a in mats:
            a.setflags(write=False)
        object.__setattr__(self, "subsystems", mats)
        object.__setattr__(self, "decompositions", decs)

    @property
    def n(self):
        return self.subsystems[0].shape[0]

    def subsystem(self, vertex):
        return self.subsystems[vertex - 1]

    def decomposition(self, vertex):
        return self.decompositions[vertex - 1]


def make_system(graph, matrices, decompositions=None):
    """Assemble a :class:`SwitchedSystem`, eigendecomposing where needed.

    ``decompositions`` may be omitted, or given per vertex with ``None``
    entries for vertices whose decomposition should be computed by
    :func:`matrixcore.real_jordan`.
    """
    matrices = list(matrices)
    if decompositions is None:
        decompositions = [None] * len(matrices)
    decs = []
    for a, dec in zip(matrices, decompositions):
        decs.append(mc.real_jordan(a) if dec is None else dec)
    return SwitchedSystem(graph, tuple(matrices), tuple(decs))


def transition_matrix(system, r, s):
    """The change-of-basis factor ``P_s^-1 P_r`` picked up on edge (r, s)."""
    return system.decomposition(s).P_inv @ system.decomposition(r).P


def edge_norm(system, edge, t):
    """Spectral norm of ``P_s^-1 P_r exp(J_r t)`` for a dwell of length t."""
    r, s = edge
    if not system.graph.has_edge(r, s):
        raise NotAnEdge(f"({r}, {s}) is not an edge of the switching graph")
    t = float(t)
    if not t > 0:
        raise ValueError("dwell time must be positive")
    dec = system.decomposition(r)
    return mc.spectral_norm(transition_matrix(system, r, s) @ mc.exp_jordan(dec.blocks, t))


def partition_edges(system):
    """Classify each edge as E1 (transition norm >= 1) or E2 (< 1).

    E2 edges admit arbitrarily small dwell times, since the edge norm tends
    to the transition norm itself as the dwell shrinks to zero.
    """
    out = {}
    for r, s in system.graph.edges:
        norm = mc.spectral_norm(transition_matrix(system, r, s))
        out[(r, s)] = E1 if norm >= 1.0 - _PARTITION_TOL else E2
    return out


def _sup_scan(fn, lo, hi, samples):
    """Max of a continuous scalar function over [lo, hi]: grid + polish."""
    if hi <= lo:
        return float(fn(hi))
    ts = np.linspace(lo, hi, samples)
    vals = np.array([fn(t) for t in ts])
    i = int(np.argmax(vals))
    best = float(vals[i])
    a, b = ts[max(i - 1, 0)], ts[min(i + 1, samples - 1)]
    for _ in range(80):
        if b - a < 1e-12:
            break
        m1 = a + (b - a) / 3.0
        m2 = b - (b - a) / 3.0
        f1, f2 = fn(m1), fn(m2)
        best = max(best, float(f1), float(f2))
        if f1 < f2:
            a = m1
        else:
            b = m2
    return best


def _bisect_crossing(fn_feasible, t_out, t_in, tol):
    """Locate the boundary between an infeasible and a feasible point."""
    for _ in range(200):
        if abs(t_in - t_out) <= tol:
            break
        mid = 0.5 * (t_out + t_in)
        if fn_feasible(mid):
            t_in = mid
        else:
            t_out = mid
    return 0.5 * (t_out + t_in)


def feasible_interval(system, edge, t_max=50.0, grid_points=2048, refine_tol=1e-9):
    """Maximal open sub-intervals of (0, t_max] where the edge norm is < 1.

    Scans a uniform grid and refines every feasibility crossing by
    bisection. The left endpoint is reported as 0 when the norm is already
    below 1 in the small-dwell limit (E2 edges). An empty list means no
    feasible dwell was found up to ``t_max`` at this grid resolution.
    """
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    grid_points = int(grid_points)
    if grid_points < 64:
        raise ValueError("grid_points must be at least 64")
    r, s = edge
    if not system.graph.has_edge(r, s):
        raise NotAnEdge(f"({r}, {s}) is not an edge of the switching graph")

    def feasible(t):
        return edge_norm(system, edge, t) < 1.0

    limit_feasible = mc.spectral_norm(transition_matrix(system, r, s)) < 1.0
    ts = np.linspace(t_max / grid_points, t_max, grid_points)
    mask = np.array([feasible(t) for t in ts])
    intervals = []
    idx = 0
    while idx < grid_points:
        if not mask[idx]:
            idx += 1
            continue
        start = idx
        while idx + 1 < grid_points and mask[idx + 1]:
            idx += 1
        end = idx
        if start == 0:
            lo = 0.0 if limit_feasible else _bisect_crossing(feasible, 0.0, ts[0], refine_tol)
        else:
            lo = _bisect_crossing(feasible, ts[start - 1], ts[start], refine_tol)
        if end == grid_points - 1:
            hi = t_max
        else:
            hi = _bisect_crossing(feasible, ts[end + 1], ts[end], refine_tol)
        intervals.append((lo, hi))
        idx += 1
    if limit_feasible and not mask[0]:
        # The grid can miss a thin feasible window hugging t = 0 on edges
        # whose norm is already < 1 in the zero-dwell limit.
        probe = ts[0] * 1e-6
        if feasible(probe):
            hi = _bisect_crossing(feasible, ts[0], probe, refine_tol)
            intervals.insert(0, (0.0, hi))
    return intervals


def analytic_e2_right_endpoint(system, edge):
    """Closed-form lower bound on an E2 edge's feasible right endpoint.

    Valid when the source vertex has only size-1 real blocks and a positive
    spectral abscissa: the edge norm stays below 1 at least up to
    ``-ln(norm of transition matrix) / abscissa``. Returns None when the
    formula does not apply.
    """
    r, s = edge
    dec = system.decomposition(r)
    if any(b.kind != mc.REAL for b in dec.blocks):
        return None
    lam = dec.spectral_abscissa
    norm = mc.spectral_norm(transition_matrix(system, r, s))
    if norm >= 1.0 or lam <= 0.0:
        return None
    return -math.log(norm) / lam


@dataclass(frozen=True)
class EdgeCondition:
    """Certified dwell data for one edge.

    ``interval`` is the stored open dwell window around the witness
    ``eta``; the certificate's contraction factor is the supremum of the
    edge norm over it.
    """

    edge: tuple
    eta: float
    norm_value: float
    interval: tuple
    partition: str


@dataclass(frozen=True)
class Certificate:
    """Per-edge dwell conditions plus the decay constants they imply.

    At the n-th switching time the state norm is bounded by
    ``amplification_c * contraction_k**(n-1)`` times the initial norm, for
    every signal whose dwells stay inside the stored intervals.
    """

    conditions: tuple
    contraction_k: float
    amplification_c: float

    def condition_for(self, edge):
        for cond in self.conditions:
            if cond.edge == tuple(edge):
                return cond
        raise NotAnEdge(f"no condition stored for edge {tuple(edge)}")

    def intervals(self):
        return {cond.edge: cond.interval for cond in self.conditions}


def _component_around(system, edge, eta, t_max, grid_points, refine_tol):
    """Maximal feasible interval containing a known-feasible dwell."""

    def feasible(t):
        return edge_norm(system, edge, t) < 1.0

    step = t_max / grid_points
    r, s = edge
    limit_feasible = mc.spectral_norm(transition_matrix(system, r, s)) < 1.0
    t = eta
    while t - step > 0 and feasible(t - step):
        t -= step
    if t - step <= 0:
        lo = 0.0 if limit_feasible else _bisect_crossing(feasible, 0.0, t, refine_tol)
    else:
        lo = _bisect_crossing(feasible, t - step, t, refine_tol)
    t = eta
    while t + step <= t_max and feasible(t + step):
        t += step
    if t + step > t_max:
        hi = t_max if feasible(t_max) else _bisect_crossing(feasible, t_max, t, refine_tol)
    else:
        hi = _bisect_crossing(feasible, t + step, t, refine_tol)
    return lo, hi


def certify(system, etas, t_max=50.0, grid_points=2048, refine_tol=1e-9, shrink=0.005):
    """Check the per-edge norm conditions and assemble a certificate.

    ``etas`` supplies one dwell witness per edge. On success the stored
    interval for each edge is its maximal feasible component, pulled back
    from norm-crossing endpoints by the fraction ``shrink`` of its length
    (never past the witness) so that the supremum of the edge norm over the
    stored interval — the contraction factor K — stays strictly below 1.

    The amplification constant C is the largest value of
    ``norm(P_s exp(J_s t)) * norm(P_r^-1)`` over vertex pairs (r, s) with s
    reachable from r (or equal to it) and dwells t in the stored intervals
    of s's outgoing edges, clamped to at least 1.
    """
    edges = system.graph.edges
    missing = [e for e in edges if e not in etas]
    if missing:
        raise MissingInterval(f"no dwell witness for edges {missing}")
    part = partition_edges(system)
    failures = []
    norms = {}
    for e in edges:
        norms[e] = edge_norm(system, e, etas[e])
        if not norms[e] < 1.0:
            failures.append((e, norms[e]))
    if failures:
        raise ConditionViolated(failures)

    samples = max(128, grid_points // 4)
    conditions = []
    k_value = 0.0
    for e in edges:
        eta = float(etas[e])
        lo, hi = _component_around(system, e, eta, t_max, grid_points, refine_tol)
        delta = shrink * (hi - lo)
        if lo > 0.0:
            lo = min(lo + delta, 0.5 * (lo + eta))
        if hi < t_max:
            hi = max(hi - delta, 0.5 * (hi + eta))
        sup = _sup_scan(
            lambda t, e=e: edge_norm(system, e, t), max(lo, 1e-12), hi, samples
        )
        if not sup < 1.0:
            raise ConditionViolated([(e, sup)])
        k_value = max(k_value, sup)
        conditions.append(EdgeCondition(e, eta, norms[e], (lo, hi), part[e]))

    g = nx.DiGraph()
    g.add_nodes_from(system.graph.vertices())
    g.add_edges_from(edges)
    interval_of = {c.edge: c.interval for c in conditions}
    dwell_sup = {}
    for s_vertex in system.graph.vertices():
        dec = system.decomposition(s_vertex)
        best = None
        for e in system.graph.out_edges(s_vertex):
            lo, hi = interval_of[e]
            val = _sup_scan(
                lambda t: mc.spectral_norm(dec.P @ mc.exp_jordan(dec.blocks, t)),
                max(lo, 1e-12),
                hi,
                samples,
            )
            best = val if best is None else max(best, val)
        if best is not None:
            dwell_sup[s_vertex] = best
    c_value = 1.0
    for r_vertex in system.graph.vertices():
        p_inv_norm = mc.spectral_norm(system.decomposition(r_vertex).P_inv)
        reachable = {r_vertex} | nx.descendants(g, r_vertex)
        for s_vertex in reachable:
            if s_vertex in dwell_sup:
                c_value = max(c_value, dwell_sup[s_vertex] * p_inv_norm)
    return Certificate(tuple(conditions), k_value, c_value)


def decay_envelope(certificate, signal):
    """Guaranteed norm-ratio bound at each switching time of a signal.

    Returns ``[(n, C * K**(n-1))]`` for n = 1..switch count, after checking
    that the signal's transitions and dwells stay inside the certificate's
    edges and stored intervals.
    """
    intervals = certificate.intervals()
    t_prev = 0.0
    for n, e in enumerate(path_edges(signal.path)):
        if e not in intervals:
            raise SignalOutsideClass(f"step {n + 1}: edge {e} is not certified")
        t = signal.times[n]
        if not t > t_prev:
            raise SignalOutsideClass(f"switch time {n + 1} does not increase")
        lo, hi = intervals[e]
        if not lo < t - t_prev < hi:
            raise SignalOutsideClass(
                f"dwell {t - t_prev:.6g} at step {n + 1} outside {e} interval "
                f"({lo:.6g}, {hi:.6g})"
            )
        t_prev = t
    c, k = certificate.amplification_c, certificate.contraction_k
    return [(n, c * k ** (n - 1)) for n in range(1, signal.switch_count + 1)]


@dataclass(frozen=True)
class NecessaryReport:
    """Obstructions found by the cheap pre-checks (empty = none found).

    ``singular_flags`` lists E1 edges whose source exponential never
    contracts (smallest singular value of exp(J_r) at unit time >= 1);
    ``trace_flags`` lists simple loops, in planar systems only, all of
    whose subsystems have non-negative trace. Either flag makes the
    per-edge conditions unsatisfiable; an empty report is NOT a
    feasibility guarantee.
    """

    singular_flags: tuple
    trace_flags: tuple
    trace_applicable: bool

    @property
    def ok(self):
        return not self.singular_flags and not self.trace_flags


def necessary_checks(system, max_loops=10000):
    part = partition_edges(system)
    singular = []
    for e, tag in part.items():
        if tag != E1:
            continue
        dec = system.decomposition(e[0])
        smin = mc.smallest_singular_value(mc.exp_jordan(dec.blocks, 1.0))
        if smin >= 1.0 - _PARTITION_TOL:
            singular.append((e, float(smin)))
    trace_flags = []
    trace_applicable = system.n == 2
    if trace_applicable:
        for loop in enumerate_simple_loops(system.graph, max_loops):
            traces = tuple(float(np.trace(system.subsystem(v))) for v in loop[:-1])
            if all(tr >= 0.0 for tr in traces):
                trace_flags.append((loop, traces))
    return NecessaryReport(tuple(singular), tuple(trace_flags), trace_applicable)


@dataclass(frozen=True)
class LoopBudget:
    """Dwell-time budgets for the expanding (E2) edges of one simple loop.

    ``m_sum`` collects the log transition norms of the loop's E2 edges and
    ``n_sum`` the log interval-suprema of its E1 edges (both <= 0 under a
    certificate). With ``lambda_max``/``gamma_sum`` the max/sum of spectral
    abscissas over E2-edge sources, the total E2 dwell per lap is bounded
    by -(M+N)/lambda and each individual E2 dwell by -(M+N)/gamma; a
    non-positive denominator means no finite budget is implied. Loops with
    no E2 edge carry no budget at all (``applicable`` False).
    """

    loop: tuple
    m_sum: float
    n_sum: float
    lambda_max: object
    gamma_sum: object
    total_budget: object
    per_edge_budget: object
    applicable: bool


def loop_budgets(system, intervals, max_loops=10000):
    """Compute :class:`LoopBudget` for every simple loop of the graph.

    ``intervals`` maps each E1 edge that appears on some loop to the dwell
    interval over which its norm supremum is taken (typically a
    certificate's stored intervals).
    """
    part = partition_edges(system)
    samples = 512
    budgets = []
    for loop in enumerate_simple_loops(system.graph, max_loops):
        m_sum = 0.0
        n_sum = 0.0
        lam = None
        gamma = None
        for e in path_edges(loop):
            if part[e] == E2:
                m_sum += math.log(mc.spectral_norm(transition_matrix(system, *e)))
                absc = system.decomposition(e[0]).spectral_abscissa
                lam = absc if lam is None else max(lam, absc)
                gamma = absc if gamma is None else gamma + absc
            else:
                if e not in intervals:
                    raise MissingInterval(f"no dwell interval for E1 edge {e}")
                lo, hi = intervals[e]
                sup = _sup_scan(
                    lambda t, e=e: edge_norm(system, e, t),
                    max(lo, 1e-12),
                    hi,
                    samples,
                )
                n_sum += math.log(sup)
        if lam is None:
            budgets.append(
                LoopBudget(loop, m_sum, n_sum, None, None, None, None, False)
            )
            continue
        total = -(m_sum + n_sum) / lam if lam > 0 else math.inf
        per_edge = -(m_sum + n_sum) / gamma if gamma > 0 else math.inf
        budgets.append(
            LoopBudget(loop, m_sum, n_sum, lam, gamma, total, per_edge, True)
        )
    return budgets


def stable_edge_lower_bound(system, edge, lambda_star):
    """Dwell threshold above which a Hurwitz-source edge condition holds.

    For an edge whose source subsystem is Hurwitz, any decay-rate proxy
    ``lambda_star`` strictly between the spectral abscissa and 0 yields the
    explicit bound ``-ln(beta * transition norm) / lambda_star`` with
    ``beta = sup_t norm(exp(J_r t)) * exp(-lambda_star t)``: every dwell
    above it satisfies the edge norm condition. A non-positive return
    value means no minimum dwell is needed.
    """
    r, s = edge
    if not system.graph.has_edge(r, s):
        raise NotAnEdge(f"({r}, {s}) is not an edge of the switching graph")
    dec = system.decomposition(r)
    abscissa = dec.spectral_abscissa
    if abscissa >= 0:
        raise NotHurwitz(
            f"subsystem {r} has spectral abscissa {abscissa:.6g} >= 0"
        )
    lambda_star = float(lambda_star)
    if not abscissa < lambda_star < 0:
        raise BadLambdaStar(
            f"lambda_star must lie in ({abscissa:.6g}, 0), got {lambda_star!r}"
        )
    gap = lambda_star - abscissa
    horizon = (mc.MAX_DIM + 8.0) / gap
    beta = _sup_scan(
        lambda t: mc.spectral_norm(mc.exp_jordan(dec.blocks, t))
        * math.exp(-lambda_star * t),
        0.0,
        horizon,
        4096,
    )
    norm = mc.spectral_norm(transition_matrix(system, r, s))
    return -math.log(beta * norm) / lambda_star
