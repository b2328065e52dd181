import json
import random

import pytest
from hypothesis import given, strategies as st

from epimu.checker import (build_ins_tree, checker_node_oracle, lift_run,
                           model_check, pullback_result)
from epimu.distinction import a_distinction, preimage
from epimu.errors import InputError, NonMixingError
from epimu.finitary import compute_gamma, eval_finitary
from epimu.generators import (_random_formula, random_epistemic_formula,
                              random_plain_formula)
from epimu.mas import parse_mas
from epimu.formula import alpha_rename, free_vars, parse_formula
from epimu.oracle import BoundedTree, holds_at, tree_eval_bounded

from conftest import mas_from_seed

HIDDEN_Q = """
agents: a
atoms: p1 q
obs a: p1
states: 3
init: 1
label 1: p1 q
label 2: p1
label 3: p1 q
trans: 1->2 2->1 1->3 3->3
"""

NESTED = """
agents: a b
atoms: p q
obs a: p
obs b: p q
states: 3
init: 1
label 1: p
label 2: q
label 3: p q
trans: 1->2 1->3 2->2 3->1 3->2
"""


def test_fig1_examples(fig1):
    assert model_check(parse_formula("K[a] p1"), fig1).holds
    assert model_check(parse_formula("EFG(p1)"), fig1).holds


def test_plain_formula_uses_identities(fig1):
    f = parse_formula("mu Z. p1 & AX Z | EX EX Z")
    res = model_check(f, fig1)
    ins = res.ins
    assert len(ins.tower) == 1
    for node in ins.tree.preorder():
        x = ins.ins(node.addr)
        assert x.src is fig1 and x.dst is fig1
        assert all(q == r for q, r in x.st_map.items())
    assert res.root_set == eval_finitary(f, fig1)


def test_knowledge_of_closed_argument_shape(fig1):
    ins = build_ins_tree(parse_formula("K[a] EF(p1)"), fig1)
    d = a_distinction(fig1, "a")
    assert ins.tower[1] == d.mas and ins.link_agent == [None, "a"]
    below = ins.ins((1,))
    assert below.src == d.mas and below.dst is fig1
    assert below.st_map == d.splitting.st_map
    assert ins.ins(()).src == d.mas
    for node in ins.tree.preorder():
        if node.addr not in ((), (1,)):
            x = ins.ins(node.addr)
            assert x.src is fig1 and x.dst is fig1
    assert ins.verify() == []


def test_nested_agents_in_inclusion_order():
    m = parse_mas(NESTED)
    f = parse_formula("mu Z. p | K[a] EX K[b] EX Z")
    ins = build_ins_tree(f, m)
    assert ins.chain[()] == ["a", "b"]
    assert ins.link_agent == [None, "b", "a"]
    assert ins.tower[1] == a_distinction(m, "b").mas
    assert ins.tower[2] == a_distinction(ins.tower[1], "a").mas
    assert ins.verify() == []
    steps = {row["node"]: row["distinctions"] for row in ins.trace()}
    ncs = {"1.1", "1.2.1.1.1.1.1"}
    assert all(steps[k] == ["a", "b"] for k in ncs)
    assert all(not v for k, v in steps.items() if k not in ncs)
    below = ins.ins((1, 1))
    assert below.src is ins.tower[2] and below.dst is m


def test_hidden_state_needs_distinction():
    m = parse_mas(HIDDEN_Q)
    f = parse_formula("AX AX K[a] q")
    gamma = {"a": compute_gamma(m, "a")}
    assert 1 not in eval_finitary(f, m, gammas=gamma)
    assert model_check(f, m).holds
    assert holds_at(f.arg.arg, m, (1, 2, 1)) and holds_at(f.arg.arg, m, (1, 3, 3))


def test_pullback_of_closed_argument(fig1):
    f = parse_formula("K[a] EX EX EX p1 & EF(p1)")
    res = model_check(f, fig1)
    d = a_distinction(fig1, "a")
    inner = res.values[(1, 1, 1)]
    assert pullback_result(res.ins, (1, 1, 1), inner) == preimage(d.splitting, inner)
    assert pullback_result(res.ins, (), res.root_set) == res.root_set
    with pytest.raises(InputError):
        pullback_result(res.ins, (1, 1, 1), {99})


def test_input_errors(fig1):
    with pytest.raises(InputError):
        model_check(parse_formula("p1 & Z"), fig1)
    m = parse_mas("agents: a b\natoms: p q\nobs a: p\nobs b: q\nstates: 1\ninit: 1\ntrans: 1->1\n")
    with pytest.raises(NonMixingError, match="non-mixing violation at node 1"):
        model_check(parse_formula("nu Z. p & K[a] Z & K[b] Z"), m)


@given(st.integers(0, 10**6))
def test_plain_formulas_match_state_semantics(seed):
    rng = random.Random(seed)
    m = mas_from_seed(seed)
    f = random_plain_formula(rng, 4, sorted(m.atoms))
    res = model_check(f, m)
    assert res.root_set == eval_finitary(f, m)
    assert res.per_init == {q: q in res.root_set for q in m.inits}


def _agrees_with_tree(f, m, depth=5):
    res = model_check(f, m)
    bt = BoundedTree(m, depth)
    te = tree_eval_bounded(f, bt)
    checked = 0
    for q, verdict in res.per_init.items():
        i = bt.node_of((q,))
        if (i in te.lower) == (i in te.upper):
            checked += 1
            assert verdict == (i in te.lower), (str(f), q)
    return res, checked


@given(st.integers(0, 10**6))
def test_closed_knowledge_against_tree(seed):
    rng = random.Random(seed)
    m = mas_from_seed(seed, max_states=5, agents=2)
    f = random_epistemic_formula(rng, 4, sorted(m.atoms), m.agents)
    _agrees_with_tree(f, m)


@given(st.integers(0, 10**6))
def test_open_knowledge_under_fixpoints_against_tree(seed):
    rng = random.Random(seed)
    m = mas_from_seed(seed, max_states=4, agents=2, nested_obs=True)
    f = alpha_rename(_random_formula(rng, 4, sorted(m.atoms), [], m.agents, True, closed_k=False))
    if free_vars(f):
        return
    _agrees_with_tree(f, m)


@given(st.integers(0, 10**6))
def test_every_run_against_tree(seed):
    # not only the roots: every decided node of the unfolding, via lifted runs
    rng = random.Random(seed)
    m = mas_from_seed(seed, max_states=4, agents=2, nested_obs=True)
    f = random_epistemic_formula(rng, 3, sorted(m.atoms), m.agents)
    holds = checker_node_oracle(m)
    bt = BoundedTree(m, 4)
    te = tree_eval_bounded(f, bt)
    for i in te.decided(bt):
        assert holds(f, bt.runs[i]) == (i in te.lower)


@given(st.integers(0, 10**6))
def test_ins_tree_invariants(seed):
    rng = random.Random(seed)
    m = mas_from_seed(seed, max_states=4, agents=2, nested_obs=True)
    f = alpha_rename(_random_formula(rng, 4, sorted(m.atoms), [], m.agents, True, closed_k=False))
    if free_vars(f):
        return
    ins = build_ins_tree(f, m)
    assert ins.verify() == []
    root_down = ins.between(ins.root_level, 0)
    for q in ins.root_model.inits:
        assert lift_run(root_down, (root_down.st_map[q],)) == (q,)


@given(st.integers(0, 10**6))
def test_deterministic_output(seed):
    rng = random.Random(seed)
    m = mas_from_seed(seed, agents=2)
    f = random_epistemic_formula(rng, 3, sorted(m.atoms), m.agents)
    dumps = {json.dumps(model_check(f, m).to_json(witness_sets=True, trace=True), sort_keys=True)
             for _ in range(2)}
    assert len(dumps) == 1
