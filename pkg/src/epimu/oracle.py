"""Brute-force semantics on a depth-bounded unfolding, used as ground truth.

Every formula is evaluated twice on the truncated tree: once with AX/EX
false at the deepest level (a lower bound of the true node set) and once
with them true there (an upper bound). Both bounds are sound because
formulas are positive. A node is *decided* when both bounds agree; only
decided nodes take part in diagram comparisons.
"""
from dataclasses import dataclass

from .distinction import verify_in_splitting
from .errors import BudgetExceeded, InputError
from .finitary import compute_gamma, eval_finitary, ka_f, pa_f
from .formula import (AX, EX, And, Atom, Bot, K, Mu, NegAtom, Nu, Or, P, Top,
                      Var, has_fixpoint, is_closed, is_plain, modal_depth)
from .mas import check_run, format_run


class BoundedTree:
    """All runs of ``m`` of length at most ``depth``, indexed breadth-first."""

    def __init__(self, m, depth, cap=1_000_000):
        if depth < 1:
            raise InputError("depth must be at least 1")
        self.m = m
        self.depth = depth
        runs = [(q,) for q in sorted(m.inits)]
        parent = [None] * len(runs)
        kids = []
        start = 0
        for _ in range(depth - 1):
            end = len(runs)
            for i in range(start, end):
                for r in m.succ[runs[i][-1]]:
                    runs.append(runs[i] + (r,))
                    parent.append(i)
                if len(runs) > cap:
                    raise BudgetExceeded(f"unfolding exceeds {cap} nodes at depth {depth}")
            start = end
        self.runs = runs
        self.parent = parent
        self.index = {run: i for i, run in enumerate(runs)}
        kids = [[] for _ in runs]
        for i, p in enumerate(parent):
            if p is not None:
                kids[p].append(i)
        self.children = [tuple(k) for k in kids]
        self.length = [len(r) for r in runs]
        self.last = [r[-1] for r in runs]
        self.all = frozenset(range(len(runs)))
        self._classes = {}

    def __len__(self):
        return len(self.runs)

    def node_of(self, run):
        return self.index[tuple(run)]

    def classes(self, a):
        """Class id per node for agent a; equal ids mean indistinguishable runs."""
        if a not in self._classes:
            intern = {}
            ids = []
            for i, p in enumerate(self.parent):
                key = (None if p is None else ids[p], self.m.observation(a, self.last[i]))
                ids.append(intern.setdefault(key, len(intern)))
            groups = {}
            for i, c in enumerate(ids):
                groups.setdefault(c, []).append(i)
            self._classes[a] = (ids, groups)
        return self._classes[a]

    def class_members(self, a, node):
        ids, groups = self.classes(a)
        return groups[ids[node]]

    def nodes_ending_in(self, states):
        return frozenset(i for i, q in enumerate(self.last) if q in states)

    def to_runs(self, nodes):
        return sorted((self.runs[i] for i in nodes), key=lambda r: (len(r), r))


@dataclass(frozen=True)
class TreeEval:
    lower: frozenset
    upper: frozenset
    exact_depth: int
    approximants: int

    @property
    def nodes(self):
        return self.lower

    def decided(self, tree):
        return frozenset(i for i in tree.all if (i in self.lower) == (i in self.upper))


def guard_depth(f, depth, approximants):
    """Depth guard: each temporal step and each fixpoint unrolling costs a level."""
    md = modal_depth(f)
    if has_fixpoint(f):
        md = md * max(approximants, 1) + approximants
    return depth - md


def tree_eval_bounded(f, bt, env=None, fuel=16):
    """Lower and upper node sets of f on the bounded tree ``bt``.

    ``env`` maps free variables to node sets (node indices or runs).
    """
    env = {k: _as_nodes(bt, v) for k, v in (env or {}).items()}
    steps = [0]
    lo = _eval(f, bt, env, False, fuel, steps)
    hi = _eval(f, bt, env, True, fuel, steps)
    return TreeEval(lo, hi, guard_depth(f, bt.depth, steps[0]), steps[0])


def _as_nodes(bt, value):
    out = set()
    for v in value:
        out.add(v if isinstance(v, int) else bt.node_of(v))
    return frozenset(out)


def _eval(f, bt, env, frontier, fuel, steps):
    m = bt.m

    def ev(g, env):
        if isinstance(g, Top):
            return bt.all
        if isinstance(g, Bot):
            return frozenset()
        if isinstance(g, Atom):
            return frozenset(i for i in bt.all if g.name in m.label(bt.last[i]))
        if isinstance(g, NegAtom):
            return frozenset(i for i in bt.all if g.name not in m.label(bt.last[i]))
        if isinstance(g, Var):
            if g.name not in env:
                raise InputError(f"unbound variable {g.name}")
            return env[g.name]
        if isinstance(g, And):
            return ev(g.left, env) & ev(g.right, env)
        if isinstance(g, Or):
            return ev(g.left, env) | ev(g.right, env)
        if isinstance(g, (AX, EX)):
            s = ev(g.arg, env)
            test = all if isinstance(g, AX) else any
            out = set()
            for i in bt.all:
                if bt.length[i] == bt.depth:
                    if frontier:
                        out.add(i)
                elif test(c in s for c in bt.children[i]):
                    out.add(i)
            return frozenset(out)
        if isinstance(g, (K, P)):
            s = ev(g.arg, env)
            ids, groups = bt.classes(g.agent)
            out = set()
            for members in groups.values():
                if isinstance(g, K):
                    hit = all(j in s for j in members)
                else:
                    hit = any(j in s for j in members)
                if hit:
                    out.update(members)
            return frozenset(out)
        if isinstance(g, (Mu, Nu)):
            cur = frozenset() if isinstance(g, Mu) else bt.all
            for k in range(fuel + 1):
                nxt = ev(g.body, {**env, g.var: cur})
                if nxt == cur:
                    steps[0] = max(steps[0], k)
                    return cur
                cur = nxt
            raise BudgetExceeded(f"fixpoint {g.var} did not stabilize within {fuel} approximants")
        raise TypeError(f"not a formula: {g!r}")

    return ev(f, env)


# ------------------------------------------------------------------ reports

@dataclass
class DiagramReport:
    mismatches: list
    checked: int
    total: int
    exact_depth: int

    @property
    def ok(self):
        return not self.mismatches

    def to_json(self):
        return {"ok": self.ok, "checked": self.checked, "total": self.total,
                "exact_depth": self.exact_depth,
                "mismatches": [format_run(r) for r in self.mismatches]}


def check_plain_diagram(f, m, depth, fuel=16, cap=1_000_000):
    """Compare tree membership with the state-based value at each node's end state."""
    if not is_plain(f) or not is_closed(f):
        raise InputError("the plain diagram check needs a closed formula without K/P")
    bt = BoundedTree(m, depth, cap)
    fin = eval_finitary(f, m)
    te = tree_eval_bounded(f, bt, fuel=fuel)
    decided = te.decided(bt)
    bad = [i for i in decided if (i in te.lower) != (bt.last[i] in fin)]
    return DiagramReport(bt.to_runs(bad), len(decided), len(bt), te.exact_depth)


@dataclass
class EpistemicReport:
    k_mismatches: list
    p_mismatches: list
    total: int

    @property
    def ok(self):
        return not self.k_mismatches and not self.p_mismatches

    def to_json(self):
        return {"ok": self.ok, "total": self.total,
                "k_mismatches": [format_run(r) for r in self.k_mismatches],
                "p_mismatches": [format_run(r) for r in self.p_mismatches]}


def check_epistemic_diagram(m, a, states, depth, cap=1_000_000):
    """Compare the tree operators K_a/P_a on the preimage of ``states`` with
    the preimage of their state-based counterparts."""
    states = frozenset(states)
    bt = BoundedTree(m, depth, cap)
    gamma = compute_gamma(m, a)
    base = bt.nodes_ending_in(states)
    out = {}
    for op, fn in (("K", ka_f), ("P", pa_f)):
        fin = fn(gamma, states)
        tree = tree_eval_bounded((K if op == "K" else P)(a, Var("S")), bt, {"S": base}).lower
        out[op] = bt.to_runs(i for i in bt.all if (i in tree) != (bt.last[i] in fin))
    return EpistemicReport(out["K"], out["P"], len(bt))


def hat_chi(chi, run):
    """Image of a run under an in-splitting, state by state."""
    return tuple(chi.st_map[q] for q in run)


def check_iso_invariance(m1, m2, iso, f, depth, fuel=16, cap=1_000_000):
    if iso.src != m1 or iso.dst != m2:
        raise InputError("isomorphism does not connect the given systems")
    if verify_in_splitting(iso) or len(set(iso.st_map.values())) != m1.n or m1.n != m2.n:
        raise InputError("not a bijective in-splitting")
    bt1, bt2 = BoundedTree(m1, depth, cap), BoundedTree(m2, depth, cap)
    e1, e2 = tree_eval_bounded(f, bt1, fuel=fuel), tree_eval_bounded(f, bt2, fuel=fuel)
    bad = []
    for i, run in enumerate(bt1.runs):
        j = bt2.node_of(hat_chi(iso, run))
        if (i in e1.lower) != (j in e2.lower) or (i in e1.upper) != (j in e2.upper):
            bad.append(run)
    return DiagramReport(sorted(bad, key=lambda r: (len(r), r)), len(bt1), len(bt1),
                         min(e1.exact_depth, e2.exact_depth))


# ------------------------------------------------------- single-node truth

def equivalent_runs(m, a, run, cap=1_000_000):
    """All runs of the same length that agent a cannot tell apart from ``run``."""
    check_run(m, run)
    obs = [m.observation(a, q) for q in run]
    level = [(q,) for q in sorted(m.inits) if m.observation(a, q) == obs[0]]
    for ob in obs[1:]:
        level = [r + (q,) for r in level for q in m.succ[r[-1]] if m.observation(a, q) == ob]
        if len(level) > cap:
            raise BudgetExceeded(f"more than {cap} equivalent runs")
    return level


def holds_at(f, m, run, fallback=None, _cache=None):
    """Truth of a closed formula at one unfolding node.

    Boolean structure and K/P are evaluated directly on runs; closed plain
    subformulas use the state-based semantics at the last state (exact for
    plain formulas). Anything else goes to ``fallback(g, run)`` if given.
    """
    cache = {} if _cache is None else _cache
    run = tuple(run)
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, Atom):
        return f.name in m.label(run[-1])
    if isinstance(f, NegAtom):
        return f.name not in m.label(run[-1])
    if isinstance(f, And):
        return holds_at(f.left, m, run, fallback, cache) and holds_at(f.right, m, run, fallback, cache)
    if isinstance(f, Or):
        return holds_at(f.left, m, run, fallback, cache) or holds_at(f.right, m, run, fallback, cache)
    if isinstance(f, (K, P)):
        test = all if isinstance(f, K) else any
        return test(holds_at(f.arg, m, r, fallback, cache)
                    for r in equivalent_runs(m, f.agent, run))
    if not is_closed(f):
        raise InputError("holds_at needs a closed formula")
    if is_plain(f):
        if f not in cache:
            cache[f] = eval_finitary(f, m)
        return run[-1] in cache[f]
    if fallback is None:
        raise InputError("no exact node evaluation for temporal operators over K/P")
    return fallback(f, run)
