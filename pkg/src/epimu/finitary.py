"""State-based semantics: predicate transformers, fixpoint iteration and
the epistemic accessibility relation Gamma."""
from dataclasses import dataclass

from . import subset
from .errors import InputError
from .formula import (AX, EX, And, Atom, Bot, K, Mu, NegAtom, Nu, Or, P, Top,
                      Var)


@dataclass(frozen=True)
class GammaRel:
    """Accessibility of agent ``agent``: ``image[q]`` holds every r with (q, r)."""

    agent: str
    n: int
    image: dict

    def post(self, states):
        out = set()
        for q in states:
            out |= self.image[q]
        return frozenset(out)

    def pairs(self):
        return {(q, r) for q, rs in self.image.items() for r in rs}

    def __contains__(self, pair):
        q, r = pair
        return r in self.image.get(q, ())


def compute_gamma(m, a, cap=None):
    """(q, r) is related iff every reachable subset-state over q contains r.

    Every run ending in q reaches some subset-state (q, S), where S is
    exactly the set of end states of runs the agent cannot tell apart from
    it, so the intersection over those S is the set of r that are possible
    after every run into q.
    """
    order, _, _ = subset.explore(m, a, cap)
    image = {}
    for q, info in order:
        image[q] = info if q not in image else image[q] & info
    return GammaRel(a, m.n, {q: image[q] for q in sorted(image)})


def ax_f(m, states):
    return frozenset(q for q in m.states if all(r in states for r in m.succ[q]))


def ex_f(m, states):
    return frozenset(q for q in m.states if any(r in states for r in m.succ[q]))


def pa_f(gamma, states):
    return gamma.post(states)


def ka_f(gamma, states):
    full = frozenset(range(1, gamma.n + 1))
    return full - gamma.post(full - frozenset(states))


def iterate(step, start, limit):
    """Kleene iteration from ``start``; returns the list of approximants."""
    chain = [start]
    while True:
        nxt = step(chain[-1])
        if nxt == chain[-1]:
            return chain
        chain.append(nxt)
        if len(chain) > limit + 2:
            raise AssertionError("fixpoint iteration failed to stabilize; "
                                 "is the formula positive?")


def eval_finitary(f, m, env=None, gammas=None, known=None):
    """The state set of f on m.

    ``env`` binds free variables, ``gammas`` maps agents to their Gamma
    relation, and ``known`` may pin the value of selected (closed)
    subformulas.
    """
    env = dict(env or {})
    gammas = gammas or {}
    known = known or {}
    full = m.all_states

    def ev(g, env):
        if g in known:
            return known[g]
        if isinstance(g, Top):
            return full
        if isinstance(g, Bot):
            return frozenset()
        if isinstance(g, Atom):
            return frozenset(q for q in m.states if g.name in m.label(q))
        if isinstance(g, NegAtom):
            return frozenset(q for q in m.states if g.name not in m.label(q))
        if isinstance(g, Var):
            if g.name not in env:
                raise InputError(f"unbound variable {g.name}")
            return env[g.name]
        if isinstance(g, And):
            return ev(g.left, env) & ev(g.right, env)
        if isinstance(g, Or):
            return ev(g.left, env) | ev(g.right, env)
        if isinstance(g, AX):
            return ax_f(m, ev(g.arg, env))
        if isinstance(g, EX):
            return ex_f(m, ev(g.arg, env))
        if isinstance(g, (K, P)):
            if g.agent not in gammas:
                raise InputError(f"no accessibility relation supplied for agent {g.agent}")
            fn = ka_f if isinstance(g, K) else pa_f
            return fn(gammas[g.agent], ev(g.arg, env))
        if isinstance(g, (Mu, Nu)):
            start = frozenset() if isinstance(g, Mu) else full
            chain = iterate(lambda s: ev(g.body, {**env, g.var: s}), start, m.n)
            return chain[-1]
        raise TypeError(f"not a formula: {g!r}")

    return ev(f, env)


def approximants(f, m, env=None, gammas=None):
    """The iteration chain of a top-level fixpoint formula."""
    if not isinstance(f, (Mu, Nu)):
        raise InputError("approximants are defined for fixpoint formulas only")
    env = dict(env or {})
    start = frozenset() if isinstance(f, Mu) else m.all_states
    return iterate(lambda s: eval_finitary(f.body, m, {**env, f.var: s}, gammas), start, m.n)


def gammas_for(m, agents, cap=None):
    return {a: compute_gamma(m, a, cap) for a in sorted(agents)}
