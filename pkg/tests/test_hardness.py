import glob
import itertools
import os
import random

import pytest
from hypothesis import given, settings, strategies as st

from epimu.checker import checker_node_oracle, model_check
from epimu.errors import InputError, ParseError
from epimu.formula import check_nonmixing
from epimu.hardness import (Cat, Compl, Empty, Eps, Hole, Sym, Union,
                            brute_force_nonempty, build_reduction,
                            complement_depth, load_sfx, parse_sfx,
                            regex_to_moore, sf_membership, verify_reduction)

from conftest import MODELS

SIGMA = ("a", "b")
SFX_FILES = sorted(glob.glob(os.path.join(MODELS, "sfx", "*.sfx")))


def language(e, n, alphabet=SIGMA):
    """All words of length <= n in L(e), computed set-wise."""
    universe = {w for k in range(n + 1) for w in itertools.product(alphabet, repeat=k)}
    if isinstance(e, Empty):
        return set()
    if isinstance(e, Eps):
        return {()}
    if isinstance(e, Sym):
        return {(e.name,)}
    if isinstance(e, Hole):
        return {(("hole", e.key),)}
    if isinstance(e, Union):
        return language(e.left, n, alphabet) | language(e.right, n, alphabet)
    if isinstance(e, Cat):
        left, right = language(e.left, n, alphabet), language(e.right, n, alphabet)
        return {u + v for u in left for v in right if len(u) + len(v) <= n}
    if isinstance(e, Compl):
        return universe - language(e.arg, n, alphabet)
    raise TypeError(e)


def random_expr(rng, depth, holes=False, compl=0):
    if depth == 0 or rng.random() < 0.25:
        kind = rng.choice(["sym", "sym", "sym", "eps", "empty"] + (["compl"] if compl else []))
        if kind == "sym":
            return Sym(rng.choice(SIGMA))
        if kind == "eps":
            return Eps()
        if kind == "empty":
            return Empty()
        return Compl(random_expr(rng, 2, compl=compl - 1))
    op = rng.choice(["cat", "cat", "union"] + (["compl"] if compl else []))
    if op == "compl":
        return Compl(random_expr(rng, depth - 1, compl=compl - 1))
    sub = lambda: random_expr(rng, depth - 1, compl=compl)
    return Cat(sub(), sub()) if op == "cat" else Union(sub(), sub())


@given(st.integers(0, 10**6))
def test_membership_matches_set_semantics(seed):
    rng = random.Random(seed)
    e = random_expr(rng, 4, compl=2)
    lang = language(e, 4)
    for n in range(5):
        for w in itertools.product(SIGMA, repeat=n):
            assert sf_membership(e, w, SIGMA) == (w in lang)


def test_membership_examples():
    e = parse_sfx("alphabet: a b\nR = a . ~(a) . b")[0]
    assert sf_membership(e, "ab")            # middle part is the empty word
    assert not sf_membership(e, "aab")
    assert sf_membership(e, "abbb")
    with pytest.raises(InputError):
        sf_membership(e, "ac", SIGMA)


def _with_holes(rng, depth, keys):
    if depth == 0 or rng.random() < 0.25:
        if keys and rng.random() < 0.4:
            return Hole(keys.pop())
        return rng.choice([Sym("a"), Sym("b"), Eps(), Empty()])
    sub = lambda: _with_holes(rng, depth - 1, keys)
    return Cat(sub(), sub()) if rng.random() < 0.6 else Union(sub(), sub())


@given(st.integers(0, 10**6))
def test_moore_automaton_matches_membership(seed):
    rng = random.Random(seed)
    e = _with_holes(rng, 4, [1, 2])
    aut = regex_to_moore(e)
    letters = list(SIGMA) + [("hole", 1), ("hole", 2)]
    for n in range(5):
        for w in itertools.product(letters, repeat=n):
            assert aut.accepts(w) == sf_membership(e, w)


def test_moore_rejects_repeated_hole():
    with pytest.raises(InputError):
        regex_to_moore(Cat(Hole(1), Hole(1)))


def test_sfx_parsing():
    e, alphabet = parse_sfx("# comment\nalphabet: a b\nC(x) = a . x\nR = C(~b) | eps\n")
    assert alphabet == SIGMA
    assert e == Union(Cat(Sym("a"), Compl(Sym("b"))), Eps())
    with pytest.raises(ParseError):
        parse_sfx("alphabet: a b\nR = a . c\n")
    with pytest.raises(ParseError):
        parse_sfx("alphabet: a b\nR = (a . b\n")
    with pytest.raises(ParseError) as exc:
        parse_sfx("alphabet: a b\nR = a\nthis is wrong\n")
    assert exc.value.line == 3


def test_epsilon_in_complemented_part_rejected():
    with pytest.raises(InputError):
        build_reduction(Cat(Sym("a"), Compl(Union(Eps(), Sym("a")))), SIGMA)


@pytest.mark.parametrize("path", SFX_FILES, ids=os.path.basename)
def test_shipped_expressions(path):
    e, alphabet = load_sfx(path)
    assert len(alphabet) == 2 and complement_depth(e) <= 1
    red = build_reduction(e, alphabet)
    assert check_nonmixing(red.query, red.mas).ok
    rep = verify_reduction(e, alphabet, 4)
    assert rep.ok and not rep.fallback_used
    res = model_check(red.query, red.mas)
    assert res.per_init[red.main_init] == brute_force_nonempty(e, alphabet, 8)


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_random_one_level_reductions(seed):
    rng = random.Random(seed)
    e = random_expr(rng, 3, compl=1)
    try:
        red = build_reduction(e, SIGMA)
    except InputError:
        return                                     # complemented part contains eps
    rep = verify_reduction(e, SIGMA, 3)
    assert rep.ok, rep.to_json()
    assert model_check(red.query, red.mas).per_init[red.main_init] == brute_force_nonempty(e, SIGMA, 8)


def test_two_levels_of_complement():
    e = Cat(Sym("a"), Compl(Cat(Sym("b"), Compl(Sym("a")))))
    red = build_reduction(e, SIGMA)
    rep = verify_reduction(e, SIGMA, 3, fallback=checker_node_oracle(red.mas))
    assert rep.ok and rep.fallback_used
    assert model_check(red.query, red.mas).holds_any


def test_models_grow_with_nesting():
    sizes = []
    e = Sym("a")
    for _ in range(3):
        e = Cat(Sym("a"), Compl(e))
        sizes.append(build_reduction(e, SIGMA).mas.n)
    assert sizes == sorted(sizes) and sizes[0] < sizes[-1]
