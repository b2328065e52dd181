"""Multi-agent systems: data model, validation, runs and the text format."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property

from .errors import BudgetExceeded, InputError, ParseError

StateSet = frozenset


@dataclass(frozen=True)
class Mas:
    """A finite multi-agent system with states 1..n.

    ``obs`` maps each agent to the atoms it observes and ``labels`` maps each
    state to the atoms true there. Construction does not validate; call
    ``validate_mas`` (or go through ``parse_mas``) to check well-formedness.
    """

    n: int
    agents: tuple
    atoms: frozenset
    obs: dict = field(hash=False)
    trans: frozenset = frozenset()
    inits: frozenset = frozenset()
    labels: dict = field(default_factory=dict, hash=False)

    @classmethod
    def build(cls, n, trans, inits, labels=None, agents=(), atoms=None, obs=None):
        labels = {q: frozenset((labels or {}).get(q, ())) for q in range(1, n + 1)}
        if atoms is None:
            atoms = frozenset().union(*labels.values()) if labels else frozenset()
        obs = {a: frozenset(s) for a, s in (obs or {}).items()}
        return cls(n=n, agents=tuple(agents), atoms=frozenset(atoms), obs=obs,
                   trans=frozenset((int(q), int(r)) for q, r in trans),
                   inits=frozenset(inits), labels=labels)

    @property
    def states(self):
        return range(1, self.n + 1)

    @cached_property
    def all_states(self):
        return frozenset(self.states)

    @cached_property
    def succ(self):
        out = {q: [] for q in self.states}
        for q, r in sorted(self.trans):
            out.setdefault(q, []).append(r)
        return {q: tuple(rs) for q, rs in out.items()}

    @cached_property
    def pred(self):
        out = {q: [] for q in self.states}
        for q, r in sorted(self.trans):
            out.setdefault(r, []).append(q)
        return {q: tuple(rs) for q, rs in out.items()}

    def label(self, q):
        return self.labels.get(q, frozenset())

    def observation(self, a, q):
        """The part of q's label visible to agent a."""
        return self.label(q) & self.obs[a]

    def with_obs(self, obs):
        return Mas(n=self.n, agents=tuple(obs), atoms=self.atoms,
                   obs={a: frozenset(s) for a, s in obs.items()},
                   trans=self.trans, inits=self.inits, labels=self.labels)


def reachable(m: Mas):
    seen = set(m.inits)
    stack = sorted(m.inits)
    while stack:
        q = stack.pop()
        for r in m.succ.get(q, ()):
            if r not in seen:
                seen.add(r)
                stack.append(r)
    return seen


def validate_mas(m: Mas):
    """Return a list of human-readable problems; empty means valid."""
    problems = []
    if m.n < 1:
        problems.append("a system needs at least one state")
    states = set(m.states)
    for q, r in sorted(m.trans):
        if q not in states or r not in states:
            problems.append(f"transition {q}->{r} mentions an undeclared state")
    if not m.inits:
        problems.append("no initial state")
    for q in sorted(m.inits):
        if q not in states:
            problems.append(f"initial state {q} is not declared")
    for q in sorted(m.labels):
        if q not in states:
            problems.append(f"label given for undeclared state {q}")
        extra = m.labels[q] - m.atoms
        if extra:
            problems.append(f"state {q} is labeled with undeclared atoms {sorted(extra)}")
    if len(set(m.agents)) != len(m.agents):
        problems.append("duplicate agent names")
    for a in m.agents:
        if a not in m.obs:
            problems.append(f"agent {a} has no observation set")
        elif not m.obs[a] <= m.atoms:
            problems.append(f"agent {a} observes undeclared atoms {sorted(m.obs[a] - m.atoms)}")
    for a in m.obs:
        if a not in m.agents:
            problems.append(f"observation set for undeclared agent {a}")
    if problems:
        return problems
    for q in m.states:
        if not m.succ.get(q):
            problems.append(f"state {q} has no successor (transition relation must be total)")
    unreachable = states - reachable(m)
    if unreachable:
        problems.append(f"states {sorted(unreachable)} are unreachable from the initial states")
    return problems


def check_mas(m: Mas):
    problems = validate_mas(m)
    if problems:
        raise InputError("invalid system: " + "; ".join(problems))
    return m


def is_run(m: Mas, run):
    if not run or run[0] not in m.inits:
        return False
    return all((run[i], run[i + 1]) in m.trans for i in range(len(run) - 1))


def check_run(m: Mas, run):
    if not is_run(m, run):
        raise InputError(f"not a run of the system: {format_run(run)}")


def obs_trace(m: Mas, a, run):
    return tuple(m.observation(a, q) for q in run)


def obs_equiv(m: Mas, a, r1, r2):
    """Synchronous perfect-recall indistinguishability of two runs for agent a."""
    check_run(m, r1)
    check_run(m, r2)
    if len(r1) != len(r2):
        return False
    return obs_trace(m, a, r1) == obs_trace(m, a, r2)


def runs_up_to(m: Mas, depth, cap=1_000_000):
    """All runs of length at most ``depth`` in breadth-first order."""
    if depth < 1:
        raise InputError("depth must be at least 1")
    level = [(q,) for q in sorted(m.inits)]
    out = list(level)
    for _ in range(depth - 1):
        nxt = []
        for run in level:
            for r in m.succ.get(run[-1], ()):
                nxt.append(run + (r,))
        out.extend(nxt)
        if len(out) > cap:
            raise BudgetExceeded(f"more than {cap} unfolding nodes up to depth {depth}")
        level = nxt
    return out


def format_run(run):
    return "·".join(str(q) for q in run)


# ---------------------------------------------------------------- text format

_TRANS_RE = re.compile(r"^(\d+)\s*->\s*(\d+)$")


def parse_mas(text, validate=True):
    agents, atoms, obs, labels, trans, inits = None, None, {}, {}, [], None
    n = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ParseError("expected 'key: value'", lineno)
        key, _, value = line.partition(":")
        key = " ".join(key.split())
        words = value.split()
        if key == "agents":
            agents = words
        elif key == "atoms":
            atoms = words
        elif key.startswith("obs "):
            obs[key[4:].strip()] = words
        elif key == "states":
            if len(words) != 1 or not words[0].isdigit():
                raise ParseError("'states:' takes a single positive integer", lineno)
            n = int(words[0])
        elif key == "init":
            try:
                inits = [int(w) for w in words]
            except ValueError:
                raise ParseError("initial states must be integers", lineno) from None
        elif key.startswith("label "):
            try:
                q = int(key[6:])
            except ValueError:
                raise ParseError("label key must be 'label <state>'", lineno) from None
            if q in labels:
                raise ParseError(f"state {q} labeled twice", lineno)
            labels[q] = words
        elif key == "trans":
            # allow "1->2", "1 -> 2" and "1-> 2" spellings
            joined = re.sub(r"\s*->\s*", "->", value.strip())
            for tok in joined.split():
                mt = _TRANS_RE.match(tok)
                if not mt:
                    raise ParseError(f"bad transition '{tok}'", lineno)
                trans.append((int(mt.group(1)), int(mt.group(2))))
        else:
            raise ParseError(f"unknown key '{key}'", lineno)
    if n is None:
        raise ParseError("missing 'states:' line")
    if inits is None:
        raise ParseError("missing 'init:' line")
    agents = agents or sorted(obs)
    if atoms is None:
        atoms = sorted(set().union(*labels.values()) if labels else set())
    for a in agents:
        obs.setdefault(a, [])
    m = Mas(n=n, agents=tuple(agents), atoms=frozenset(atoms),
            obs={a: frozenset(obs[a]) for a in obs},
            trans=frozenset(trans), inits=frozenset(inits),
            labels={q: frozenset(labels.get(q, ())) for q in range(1, n + 1)}
            | {q: frozenset(v) for q, v in labels.items() if not 1 <= q <= n})
    if validate:
        check_mas(m)
    return m


def load_mas(path, validate=True):
    with open(path, encoding="utf-8") as fh:
        return parse_mas(fh.read(), validate=validate)


def format_mas(m: Mas):
    lines = [
        "agents: " + " ".join(m.agents),
        "atoms: " + " ".join(sorted(m.atoms)),
    ]
    lines += [f"obs {a}: " + " ".join(sorted(m.obs[a])) for a in m.agents]
    lines.append(f"states: {m.n}")
    lines.append("init: " + " ".join(str(q) for q in sorted(m.inits)))
    for q in m.states:
        if m.label(q):
            lines.append(f"label {q}: " + " ".join(sorted(m.label(q))))
    lines.append("trans: " + " ".join(f"{q}->{r}" for q, r in sorted(m.trans)))
    return "\n".join(line.rstrip() for line in lines) + "\n"
