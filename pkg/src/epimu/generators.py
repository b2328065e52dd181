"""Seeded random systems, formulas and in-splittings for experiments."""
import random

from .distinction import InSplitting, verify_in_splitting
from .formula import (AX, EX, And, Atom, Bot, K, Mu, NegAtom, Nu, Or, P, Top,
                      Var, alpha_rename)
from .mas import Mas, reachable, validate_mas

ATOM_NAMES = ("p", "q", "r")
AGENT_NAMES = ("a", "b")


def random_mas(rng, max_states=6, max_atoms=3, agents=(1, 2), single_init=None,
               nested_obs=False):
    """A valid system with every state reachable and a total transition relation."""
    while True:
        n = rng.randint(1, max_states)
        atoms = ATOM_NAMES[:rng.randint(1, max_atoms)]
        k = rng.randint(*agents) if isinstance(agents, tuple) else agents
        names = AGENT_NAMES[:k]
        n_inits = 1 if single_init or (single_init is None and rng.random() < 0.7) else rng.randint(1, n)
        inits = rng.sample(range(1, n + 1), n_inits)
        trans = set()
        # a random spanning structure from the initial states keeps everything reachable
        order = list(range(1, n + 1))
        rng.shuffle(order)
        seen = list(inits)
        for q in order:
            if q not in seen:
                trans.add((rng.choice(seen), q))
                seen.append(q)
        for q in range(1, n + 1):
            for r in range(1, n + 1):
                if rng.random() < 0.25:
                    trans.add((q, r))
            if not any(t[0] == q for t in trans):
                trans.add((q, rng.randint(1, n)))
        labels = {q: frozenset(a for a in atoms if rng.random() < 0.5) for q in range(1, n + 1)}
        obs = {}
        if nested_obs and len(names) == 2:
            big = frozenset(a for a in atoms if rng.random() < 0.7)
            small = frozenset(a for a in big if rng.random() < 0.5)
            obs = {names[0]: small, names[1]: big}
        else:
            for a in names:
                obs[a] = frozenset(x for x in atoms if rng.random() < 0.5)
        m = Mas(n=n, agents=names, atoms=frozenset(atoms), obs=obs,
                trans=frozenset(trans), inits=frozenset(inits), labels=labels)
        if not validate_mas(m) and reachable(m) == set(m.states):
            return m


def random_plain_formula(rng, depth, atoms=ATOM_NAMES[:2], variables=(), allow_fix=True):
    """A random closed-or-open plain formula of nesting depth at most ``depth``."""
    return _random_formula(rng, depth, atoms, list(variables), (), allow_fix, closed_k=False)


def random_epistemic_formula(rng, depth, atoms=ATOM_NAMES[:2], agents=AGENT_NAMES[:1]):
    """A closed formula whose K/P operators only apply to closed arguments."""
    return alpha_rename(_random_formula(rng, depth, atoms, [], tuple(agents), True, closed_k=True))




def _random_formula(rng, depth, atoms, variables, agents, allow_fix, closed_k):
    if depth == 0 or rng.random() < 0.2:
        choices = ["atom", "neg", "top", "bot"] + (["var"] * 2 if variables else [])
        kind = rng.choice(choices)
        if kind == "var":
            return Var(rng.choice(variables))
        if kind == "top":
            return Top()
        if kind == "bot":
            return Bot()
        name = rng.choice(atoms)
        return Atom(name) if kind == "atom" else NegAtom(name)
    ops = ["and", "or", "ax", "ex"] + (["mu", "nu"] if allow_fix else []) + (["k", "p"] if agents else [])
    op = rng.choice(ops)
    sub = lambda vs=variables: _random_formula(rng, depth - 1, atoms, vs, agents, allow_fix, closed_k)
    if op == "and":
        return And(sub(), sub())
    if op == "or":
        return Or(sub(), sub())
    if op == "ax":
        return AX(sub())
    if op == "ex":
        return EX(sub())
    if op in ("k", "p"):
        arg = sub([]) if closed_k else sub()
        return (K if op == "k" else P)(rng.choice(agents), arg)
    name = f"Z{len(variables)}"
    body = sub(variables + [name])
    return (Mu if op == "mu" else Nu)(name, body)


def random_state_split(rng, m):
    """Split one state of m into two copies, dividing its incoming edges.

    Returns an in-splitting from the new system onto m, or None if the
    chosen state cannot be split (too few incoming edges).
    """
    cands = [q for q in m.states if len(m.pred[q]) + (q in m.inits) >= 2]
    if not cands:
        return None
    q = rng.choice(cands)
    new = m.n + 1
    incoming = [(s, q) for s in m.pred[q]]
    rng.shuffle(incoming)
    # copy 1 keeps the initial flag if q is initial; both copies need an entry
    cut = rng.randint(0 if q in m.inits else 1, len(incoming) - 1)
    to_new = set(incoming[cut:]) if cut < len(incoming) else set()
    if not to_new:
        return None

    def copies(s):
        return (s, new) if s == q else (s,)

    trans = set()
    for s, r in m.trans:
        tgt = new if (s, r) in to_new else r
        for s2 in copies(s):
            trans.add((s2, tgt))
    labels = dict(m.labels)
    labels[new] = m.label(q)
    dst = m
    src = Mas(n=new, agents=m.agents, atoms=m.atoms, obs=dict(m.obs),
              trans=frozenset(trans), inits=m.inits, labels=labels)
    if validate_mas(src):
        return None
    st = {s: s for s in m.states}
    st[new] = q
    chi = InSplitting.from_state_map(src, dst, st)
    if verify_in_splitting(chi):
        return None
    return chi


def random_renaming(rng, m):
    """A bijective in-splitting from a state-permuted copy of m onto m."""
    perm = list(m.states)
    rng.shuffle(perm)
    fwd = {q: perm[q - 1] for q in m.states}      # old -> new
    back = {v: k for k, v in fwd.items()}
    src = Mas(n=m.n, agents=m.agents, atoms=m.atoms, obs=dict(m.obs),
              trans=frozenset((fwd[q], fwd[r]) for q, r in m.trans),
              inits=frozenset(fwd[q] for q in m.inits),
              labels={fwd[q]: m.label(q) for q in m.states})
    return InSplitting.from_state_map(src, m, back)
