"""Reachable part of the knowledge-subset construction for one agent.

A subset-state ``(s, S)`` pairs the current state s with the set S of states
the agent considers possible after observing the run so far (s is in S).
"""
from .errors import BudgetExceeded


def initial_subset_states(m, a):
    out = []
    for q0 in sorted(m.inits):
        obs = m.observation(a, q0)
        info = frozenset(r for r in m.inits if m.observation(a, r) == obs)
        out.append((q0, info))
    return out


def subset_step(m, a, info, r):
    """Information set after moving to r from any state in ``info``."""
    obs = m.observation(a, r)
    return frozenset(r2 for s2 in info for r2 in m.succ[s2] if m.observation(a, r2) == obs)


def explore(m, a, cap=None):
    """Breadth-first exploration of the reachable subset-states.

    Returns ``(order, edges, initial)``: subset-states in discovery order,
    the list of edges between them (as pairs of subset-states, sorted by
    successor state) and the initial subset-states.
    """
    initial = initial_subset_states(m, a)
    index = {}
    order = []
    for d in initial:
        if d not in index:
            index[d] = len(order)
            order.append(d)
    edges = []
    head = 0
    while head < len(order):
        s, info = order[head]
        head += 1
        for r in m.succ[s]:
            nxt = (r, subset_step(m, a, info, r))
            edges.append(((s, info), nxt))
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
                if cap is not None and len(order) > cap:
                    raise BudgetExceeded(
                        f"subset construction for agent {a} exceeded {cap} states")
    return order, edges, initial
