"""In-splittings between systems and the per-agent distinction construction."""
from dataclasses import dataclass

from . import subset
from .errors import InputError
from .finitary import compute_gamma
from .mas import Mas


@dataclass(frozen=True)
class InSplitting:
    """A pair of maps from ``src`` onto ``dst`` (states and transitions)."""

    src: Mas
    dst: Mas
    st_map: dict
    tr_map: dict

    @classmethod
    def from_state_map(cls, src, dst, st_map):
        st_map = {q: st_map[q] for q in sorted(st_map)}
        tr_map = {(q, r): (st_map.get(q), st_map.get(r)) for q, r in sorted(src.trans)}
        return cls(src, dst, st_map, tr_map)

    def __call__(self, q):
        return self.st_map[q]

    def to_json(self):
        return {"src_size": self.src.n, "dst_size": self.dst.n,
                "st_map": {str(q): r for q, r in self.st_map.items()}}


def verify_in_splitting(x):
    """List of violated conditions (empty when x is an in-splitting)."""
    src, dst = x.src, x.dst
    bad = []
    if src.atoms != dst.atoms:
        bad.append("systems use different atomic propositions")
    if set(src.agents) != set(dst.agents) or any(src.obs[a] != dst.obs.get(a) for a in src.agents):
        bad.append("systems differ in agents or observations")
    for q in src.states:
        if q not in x.st_map:
            bad.append(f"state map undefined on {q}")
        elif x.st_map[q] not in dst.all_states:
            bad.append(f"state {q} maps outside the target")
    if bad:
        return bad
    if set(x.st_map.values()) != set(dst.states):
        bad.append("state map is not surjective")
    for t in sorted(src.trans):
        q, r = t
        img = x.tr_map.get(t)
        if img is None:
            bad.append(f"transition map undefined on {q}->{r}")
            continue
        if img != (x.st_map[q], x.st_map[r]):
            bad.append(f"transition {q}->{r} is not mapped along its endpoints")
        if img not in dst.trans:
            bad.append(f"transition {q}->{r} maps to a non-transition {img}")
    if set(x.tr_map.get(t) for t in src.trans) != set(dst.trans):
        bad.append("transition map is not surjective")
    for q in src.states:
        p = x.st_map[q]
        if src.label(q) != dst.label(p):
            bad.append(f"label of {q} differs from label of its image {p}")
        if len(src.succ[q]) != len(dst.succ[p]):
            bad.append(f"out-degree of {q} differs from that of its image {p}")
    init_img = [x.st_map[q] for q in sorted(src.inits)]
    if set(init_img) != set(dst.inits) or len(init_img) != len(set(init_img)):
        bad.append("initial states are not mapped one-to-one onto initial states")
    return bad


def identity(m):
    return InSplitting.from_state_map(m, m, {q: q for q in m.states})


def compose(outer, inner):
    """First ``outer`` (from the finer system) then ``inner``.

    ``outer.dst`` must be the same system as ``inner.src``; the result maps
    ``outer.src`` onto ``inner.dst``.
    """
    if outer.dst != inner.src:
        raise InputError("cannot compose: intermediate systems differ")
    st = {q: inner.st_map[outer.st_map[q]] for q in outer.src.states}
    tr = {t: inner.tr_map[outer.tr_map[t]] for t in sorted(outer.src.trans)}
    return InSplitting(outer.src, inner.dst, st, tr)


def preimage(x, states):
    states = frozenset(states)
    return frozenset(q for q in x.src.states if x.st_map[q] in states)


@dataclass(frozen=True)
class Distinction:
    agent: str
    mas: Mas
    splitting: InSplitting
    states: tuple  # subset-state of each new state, index 0 is state 1

    def map_lines(self):
        out = []
        # line k describes state k of the new system
        for s, info in self.states:
            body = ",".join(str(q) for q in sorted(info))
            out.append(f"({s},{{{body}}}) -> {s}")
        return out


def a_distinction(m, a, cap=None):
    """The reachable subset construction for agent a as a system.

    States are numbered in breadth-first discovery order and inherit the
    label of their underlying state; the projection to the underlying state
    is an in-splitting onto m.
    """
    if a not in m.obs:
        raise InputError(f"unknown agent {a}")
    order, edges, initial = subset.explore(m, a, cap)
    index = {d: i for i, d in enumerate(order, 1)}
    trans = frozenset((index[d], index[e]) for d, e in edges)
    labels = {index[d]: m.label(d[0]) for d in order}
    dm = Mas(n=len(order), agents=m.agents, atoms=m.atoms, obs=dict(m.obs),
             trans=trans, inits=frozenset(index[d] for d in initial), labels=labels)
    chi = InSplitting.from_state_map(dm, m, {index[d]: d[0] for d in order})
    return Distinction(a, dm, chi, tuple(order))


def is_a_distinguished(m, a, gamma=None):
    """Gamma is an equivalence that is a congruence for same-observation moves."""
    return not distinguished_violations(m, a, gamma)


def distinguished_violations(m, a, gamma=None, limit=5):
    g = gamma or compute_gamma(m, a)
    bad = []
    for q in m.states:
        if q not in g.image[q]:
            bad.append(f"not reflexive at {q}")
    for q, r in sorted(g.pairs()):
        if q not in g.image[r]:
            bad.append(f"not symmetric on ({q},{r})")
        if not g.image[r] <= g.image[q]:
            bad.append(f"not transitive through ({q},{r})")
        for q2 in m.succ[q]:
            for r2 in m.succ[r]:
                if m.observation(a, q2) == m.observation(a, r2) and r2 not in g.image[q2]:
                    bad.append(f"congruence fails for ({q},{r}) with moves to ({q2},{r2})")
        if len(bad) >= limit:
            break
    return bad
