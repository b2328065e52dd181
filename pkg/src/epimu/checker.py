"""Model checking for the non-mixing fragment.

The checker keeps a tower of systems ``M = T[0] <- T[1] <- ...`` where each
step is an agent distinction and hence an in-splitting. Closed subformulas
are processed bottom-up. A closed node whose subtree of non-closed nodes
mentions agents c1..cm (ordered by inclusion of their observations) is
evaluated on ``D_c1(...D_cm(top)...)``, which is distinguished for all of
them at once. Values of the closed nodes below it are lifted to that system
by preimage, and the node is then evaluated with the state-based semantics.
"""
from dataclasses import dataclass, field

from .config import Config
from .distinction import (InSplitting, a_distinction, compose, identity,
                          is_a_distinguished, preimage)
from .errors import EpimuError, InputError, NonMixingError
from .finitary import compute_gamma, eval_finitary
from .formula import (EPISTEMIC, FIXPOINT, check_nonmixing, free_vars,
                      node_str, syntactic_tree)
from .mas import check_mas


class InternalCheckError(EpimuError):
    """A structural self-check of the checker failed (a bug, not bad input)."""


@dataclass
class InsTree:
    tree: object
    tower: list
    links: list          # links[i] maps tower[i] onto tower[i-1]; links[0] is None
    link_agent: list
    level: dict          # node -> index of the system its region lives on
    chain: dict          # closed node -> agents distinguished for it, smallest first
    _comp: dict = field(default_factory=dict, repr=False)

    @property
    def root_level(self):
        return self.level[()]

    @property
    def root_model(self):
        return self.tower[self.root_level]

    def between(self, hi, lo):
        """The composed in-splitting from tower[hi] onto tower[lo]."""
        if hi < lo:
            raise ValueError("levels out of order")
        key = (hi, lo)
        if key not in self._comp:
            if hi == lo:
                self._comp[key] = identity(self.tower[hi])
            else:
                self._comp[key] = compose(self.links[hi], self.between(hi - 1, lo))
        return self._comp[key]

    def ins(self, addr):
        """The in-splitting attached to a syntactic node."""
        addr = tuple(addr)
        node = self.tree[addr]
        if addr == () or not node.closed:
            return self.between(self.level[addr], self.level[addr])
        anc = self.tree.closed_ancestor(addr)
        return self.between(self.level[anc], self.level[addr])

    def to_root(self, addr):
        return self.between(self.root_level, self.level[tuple(addr)])

    def trace(self):
        out = []
        for node in self.tree.preorder():
            x = self.ins(node.addr)
            steps = []
            if node.closed and node.addr != ():
                hi = self.level[self.tree.closed_ancestor(node.addr)]
                steps = [self.link_agent[i] for i in range(hi, self.level[node.addr], -1)]
            out.append({"node": node.node_str, "op": node.label, "closed": node.closed,
                        "dom_size": x.src.n, "codom_size": x.dst.n, "distinctions": steps})
        return out

    def verify(self):
        """Structural self-checks; returns a list of problems."""
        bad = []
        tree = self.tree
        for node in tree.preorder():
            x = self.ins(node.addr)
            if node.addr == () or not node.closed:
                if x.src is not x.dst or any(q != r for q, r in x.st_map.items()):
                    bad.append(f"node {node.node_str} should carry an identity")
            for k in node.children:
                if x.dst is not self.ins(k).src:
                    bad.append(f"chaining broken between {node.node_str} and {node_str(k)}")
            if x.src.n < x.dst.n:
                bad.append(f"model shrinks at node {node.node_str}")
        composites = set()
        for node in tree.preorder():
            if node.children:
                continue
            path = [node.addr[:i] for i in range(len(node.addr) + 1)]
            acc = self.ins(path[0])
            for p in path[1:]:
                acc = compose(acc, self.ins(p))
            composites.add((id(acc.src), id(acc.dst), tuple(sorted(acc.st_map.items()))))
        if len(composites) > 1:
            bad.append("root-to-leaf compositions differ")
        for addr, agents in self.chain.items():
            top = self.level[addr]
            for j, c in enumerate(agents):
                lvl = top - j
                if lvl <= 0 or self.link_agent[lvl] != c:
                    bad.append(f"node {node_str(addr)}: distinction for {c} missing at level {lvl}")
            m = self.tower[top]
            for c1, c2 in zip(agents, agents[1:]):
                if not m.obs[c1] <= m.obs[c2]:
                    bad.append(f"node {node_str(addr)}: agents {c1},{c2} out of order")
        return bad


def _region_agents(tree, node, m):
    f = node.form
    agents = set()
    if isinstance(f, EPISTEMIC):
        agents.add(f.agent)
    if isinstance(f, FIXPOINT):
        body = tree[node.children[0]]
        agents |= body.agncl
    return sorted(agents, key=lambda a: (len(m.obs[a]), a))


def build_ins_tree(f, m, config=None):
    config = config or Config()
    tree = syntactic_tree(f)
    tower, links, link_agent = [m], [None], [None]
    level, chain = {}, {}

    def process(addr):
        for y in tree.nearest_closed_successors(addr):
            process(y)
        node = tree[addr]
        agents = _region_agents(tree, node, m)
        if agents:
            for c in reversed(agents):
                d = a_distinction(tower[-1], c, config.state_cap)
                tower.append(d.mas)
                links.append(d.splitting)
                link_agent.append(c)
            level[addr] = len(tower) - 1
            chain[addr] = agents
        else:
            below = [level[y] for y in tree.nearest_closed_successors(addr)]
            level[addr] = max(below, default=0)

    process(())
    for node in tree.preorder():
        if not node.closed:
            level[node.addr] = level[tree.closed_ancestor(node.addr)]
    return InsTree(tree, tower, links, link_agent, level, chain)


@dataclass
class CheckResult:
    formula: object
    per_init: dict        # initial state of the input system -> verdict
    root_set: frozenset   # satisfying states of the root system
    root_model: object
    ins: InsTree
    values: dict          # closed node -> satisfying states on its own system

    @property
    def holds(self):
        return all(self.per_init.values())

    @property
    def holds_any(self):
        return any(self.per_init.values())

    def witness_sets(self):
        out = {}
        for addr, val in sorted(self.values.items()):
            out[node_str(addr)] = sorted(pullback_result(self.ins, addr, val))
        return out

    def to_json(self, witness_sets=False, trace=False):
        out = {
            "verdict": self.holds,
            "any": self.holds_any,
            "per_init": {str(q): v for q, v in sorted(self.per_init.items())},
            "root_model_size": self.root_model.n,
            "root_set": sorted(self.root_set),
            "model_sizes": [t.n for t in self.ins.tower],
        }
        if trace:
            out["ins_trace"] = self.ins.trace()
        if witness_sets:
            out["witness_sets"] = self.witness_sets()
        return out


def model_check(f, m, config=None, verify=True):
    config = config or Config()
    check_mas(m)
    if free_vars(f):
        raise InputError(f"formula has free variables: {', '.join(sorted(free_vars(f)))}")
    verdict = check_nonmixing(f, m)
    if not verdict.ok:
        raise NonMixingError(verdict.violation)
    ins = build_ins_tree(f, m, config)
    if verify:
        problems = ins.verify()
        if problems:
            raise InternalCheckError("; ".join(problems))
    tree = ins.tree
    gammas = {}
    values = {}

    def gamma(lvl, a):
        if (lvl, a) not in gammas:
            g = compute_gamma(ins.tower[lvl], a, config.state_cap)
            if verify and not is_a_distinguished(ins.tower[lvl], a, g):
                raise InternalCheckError(f"system at level {lvl} is not {a}-distinguished")
            gammas[(lvl, a)] = g
        return gammas[(lvl, a)]

    def evaluate(addr):
        ncs = tree.nearest_closed_successors(addr)
        for y in ncs:
            evaluate(y)
        lvl = ins.level[addr]
        known = {}
        for y in ncs:
            known[tree[y].form] = preimage(ins.between(lvl, ins.level[y]), values[y])
        agents = ins.chain.get(addr, [])
        gs = {a: gamma(lvl, a) for a in agents}
        values[addr] = eval_finitary(tree[addr].form, ins.tower[lvl], {}, gs, known)

    evaluate(())
    root = ins.root_model
    down = ins.between(ins.root_level, 0)
    per_init = {down.st_map[q]: q in values[()] for q in sorted(root.inits)}
    return CheckResult(f, per_init, values[()], root, ins, values)


def pullback_result(ins, addr, states):
    """Lift a state set over the system of ``addr`` to the root system."""
    addr = tuple(addr)
    target = ins.tower[ins.level[addr]]
    if not set(states) <= set(target.states):
        raise InputError(f"state set is not over the system of node {node_str(addr)}")
    return preimage(ins.to_root(addr), states)


def lift_run(x: InSplitting, run):
    """The unique run of ``x.src`` mapped onto ``run`` of ``x.dst``."""
    cands = [q for q in sorted(x.src.inits) if x.st_map[q] == run[0]]
    if len(cands) != 1:
        raise InputError("initial states are not in one-to-one correspondence")
    out = [cands[0]]
    for r in run[1:]:
        nxt = [q for q in x.src.succ[out[-1]] if x.st_map[q] == r]
        if len(nxt) != 1:
            raise InputError(f"run {run} does not lift uniquely")
        out.append(nxt[0])
    return tuple(out)


def checker_node_oracle(m, config=None):
    """A fallback for ``oracle.holds_at``: decide a closed formula at a run of
    m by model checking it and following the run into the root system."""
    results = {}

    def holds(g, run):
        if g not in results:
            results[g] = model_check(g, m, config)
        res = results[g]
        lifted = lift_run(res.ins.between(res.ins.root_level, 0), run)
        return lifted[-1] in res.root_set

    return holds
