"""Hard instances from context star-free expressions.

An expression ``C(~F1, ..., ~Fn)`` (complement only directly under a
complement-free context, each hole used once) is turned into a system M_R,
an atom ``end_R`` and a formula phi_R such that a word w is in L(R) iff some
path of M_R spells w, reaches the ``end_R`` loop and satisfies phi_R there.
Hence L(R) is non-empty iff M_R satisfies ``EDiamondBox(end_R & phi_R)``.
"""
import itertools
import re
from dataclasses import dataclass
from functools import lru_cache

from .errors import InputError, ParseError
from .formula import (And, Atom, K, NegAtom, Or, Top, conj, dual,
                      expand_macro)
from .mas import Mas, check_mas


# ------------------------------------------------------------ expressions

class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Empty(Expr):
    pass


@dataclass(frozen=True)
class Eps(Expr):
    pass


@dataclass(frozen=True)
class Sym(Expr):
    name: str


@dataclass(frozen=True)
class Hole(Expr):
    key: int


@dataclass(frozen=True)
class Cat(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Union(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Compl(Expr):
    arg: Expr


@dataclass(frozen=True)
class _Param(Expr):
    name: str


def expr_text(e):
    if isinstance(e, Empty):
        return "empty"
    if isinstance(e, Eps):
        return "eps"
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Hole):
        return f"x{e.key}"
    if isinstance(e, Cat):
        return f"({expr_text(e.left)} . {expr_text(e.right)})"
    if isinstance(e, Union):
        return f"({expr_text(e.left)} + {expr_text(e.right)})"
    if isinstance(e, Compl):
        return "~" + expr_text(e.arg)
    raise TypeError(e)


def complement_depth(e):
    if isinstance(e, Compl):
        return 1 + complement_depth(e.arg)
    if isinstance(e, (Cat, Union)):
        return max(complement_depth(e.left), complement_depth(e.right))
    return 0


def symbols_of(e):
    if isinstance(e, Sym):
        return {e.name}
    if isinstance(e, (Cat, Union)):
        return symbols_of(e.left) | symbols_of(e.right)
    if isinstance(e, Compl):
        return symbols_of(e.arg)
    return set()


# ------------------------------------------------------------- membership

def sf_membership(r, w, alphabet=None):
    """Is the word w (a string of one-letter symbols or a sequence of
    symbols) in L(r)? Complement is taken relative to all words over the
    alphabet; hole tokens ``("hole", k)`` match ``Hole(k)``."""
    w = tuple(w)
    if alphabet is not None:
        for s in w:
            if not isinstance(s, tuple) and s not in alphabet:
                raise InputError(f"symbol {s!r} is not in the alphabet")
    return _member(r, w)


@lru_cache(maxsize=200_000)
def _member(r, w):
    if isinstance(r, Empty):
        return False
    if isinstance(r, Eps):
        return not w
    if isinstance(r, Sym):
        return w == (r.name,)
    if isinstance(r, Hole):
        return w == (("hole", r.key),)
    if isinstance(r, Union):
        return _member(r.left, w) or _member(r.right, w)
    if isinstance(r, Cat):
        return any(_member(r.left, w[:i]) and _member(r.right, w[i:]) for i in range(len(w) + 1))
    if isinstance(r, Compl):
        return not _member(r.arg, w)
    raise TypeError(f"not an expression: {r!r}")


def words(alphabet, maxlen):
    for n in range(maxlen + 1):
        yield from itertools.product(alphabet, repeat=n)


# -------------------------------------------------------- Moore automata

@dataclass(frozen=True)
class MooreAutomaton:
    """State 0 is the unlabeled start; other states carry one symbol or hole."""

    n: int
    labels: dict          # state -> symbol name or ("hole", k)
    trans: frozenset
    init: int
    finals: frozenset
    hole_states: dict     # hole key -> its unique state

    def succ(self, q):
        return sorted(r for p, r in self.trans if p == q)

    def finals_avoiding(self, k):
        """Final states reachable from the start without visiting hole k's state."""
        avoid = self.hole_states[k]
        seen, stack = {self.init}, [self.init]
        while stack:
            q = stack.pop()
            for r in self.succ(q):
                if r != avoid and r not in seen:
                    seen.add(r)
                    stack.append(r)
        return frozenset(self.finals & seen)

    def finals_through(self, k):
        return self.finals - self.finals_avoiding(k)

    def accepts(self, word):
        cur = {self.init}
        for s in word:
            cur = {r for q in cur for r in self.succ(q) if self.labels[r] == s}
        return bool(cur & self.finals)


def _glushkov(e, positions):
    """(nullable, first, last, follow) with leaves numbered into ``positions``."""
    if isinstance(e, Empty):
        return False, set(), set(), {}
    if isinstance(e, Eps):
        return True, set(), set(), {}
    if isinstance(e, (Sym, Hole)):
        positions.append(e.name if isinstance(e, Sym) else ("hole", e.key))
        p = len(positions)
        return False, {p}, {p}, {}
    if isinstance(e, Union):
        n1, f1, l1, fo1 = _glushkov(e.left, positions)
        n2, f2, l2, fo2 = _glushkov(e.right, positions)
        return n1 or n2, f1 | f2, l1 | l2, {**fo1, **fo2}
    if isinstance(e, Cat):
        n1, f1, l1, fo1 = _glushkov(e.left, positions)
        n2, f2, l2, fo2 = _glushkov(e.right, positions)
        follow = {**fo1}
        for p, s in fo2.items():
            follow[p] = follow.get(p, set()) | s
        for p in l1:
            follow[p] = follow.get(p, set()) | f2
        first = f1 | (f2 if n1 else set())
        last = l2 | (l1 if n2 else set())
        return n1 and n2, first, last, follow
    if isinstance(e, Compl):
        raise InputError("complement inside a context expression")
    raise TypeError(e)


def regex_to_moore(r):
    """Position automaton of a complement-free expression (holes allowed)."""
    positions = []
    nullable, first, last, follow = _glushkov(r, positions)
    labels = {i + 1: s for i, s in enumerate(positions)}
    trans = {(0, p) for p in first}
    for p, qs in follow.items():
        trans |= {(p, q) for q in qs}
    finals = set(last) | ({0} if nullable else set())
    holes = {}
    for p, s in labels.items():
        if isinstance(s, tuple):
            if s[1] in holes:
                raise InputError(f"hole {s[1]} occurs more than once")
            holes[s[1]] = p
    return MooreAutomaton(len(positions) + 1, labels, frozenset(trans), 0,
                          frozenset(finals), holes)


# ------------------------------------------------------------ the reduction

def split_context(e, counter):
    """Replace each outermost complement by a fresh hole."""
    holes = []

    def go(x):
        if isinstance(x, Compl):
            counter[0] += 1
            holes.append((counter[0], x.arg))
            return Hole(counter[0])
        if isinstance(x, Cat):
            return Cat(go(x.left), go(x.right))
        if isinstance(x, Union):
            return Union(go(x.left), go(x.right))
        return x

    return go(e), holes


@dataclass
class _Level:
    n: int
    labels: dict
    trans: set
    inits: list
    obs: dict
    main_init: int
    end_atom: str
    phi: object


@dataclass(frozen=True)
class Reduction:
    expr: Expr
    alphabet: tuple
    mas: Mas
    phi: object
    end_atom: str
    main_init: int

    @property
    def query(self):
        target = conj(Atom(self.end_atom), self.phi)
        return expand_macro("EDiamondBox", [target])


def _check_alphabet(alphabet):
    for a in alphabet:
        if not re.fullmatch(r"[a-z][a-z0-9_]*", a) or a.startswith("end") or a in ("true", "false", "mu", "nu"):
            raise InputError(f"alphabet symbol {a!r} clashes with reserved names or is not a plain identifier")


def build_reduction(r, alphabet):
    alphabet = tuple(alphabet)
    _check_alphabet(alphabet)
    extra = symbols_of(r) - set(alphabet)
    if extra:
        raise InputError(f"symbols outside the alphabet: {sorted(extra)}")
    counters = {"hole": [0], "level": [0]}
    lvl = _build(r, alphabet, counters)
    labels = {q: frozenset(lvl.labels.get(q, ())) for q in range(1, lvl.n + 1)}
    atoms = frozenset(alphabet).union(*labels.values(), *lvl.obs.values())
    agents = tuple(sorted(lvl.obs, key=lambda a: int(a[1:])))
    m = Mas(n=lvl.n, agents=agents, atoms=atoms, obs={a: frozenset(lvl.obs[a]) for a in agents},
            trans=frozenset(lvl.trans), inits=frozenset(lvl.inits), labels=labels)
    check_mas(m)
    return Reduction(r, alphabet, m, lvl.phi, lvl.end_atom, lvl.main_init)


def _build(r, alphabet, counters):
    level_id = counters["level"][0]
    counters["level"][0] += 1
    end_atom = f"end_{level_id}"
    ctx, holes = split_context(r, counters["hole"])
    subs = {}
    for k, f in holes:
        if _member(f, ()):
            raise InputError(f"the complemented expression {expr_text(f)} accepts the empty word")
        subs[k] = _build(f, alphabet, counters)
    aut = regex_to_moore(ctx)
    hole_of = {p: s[1] for p, s in aut.labels.items() if isinstance(s, tuple)}

    # product of the position automaton with the set of holes filled so far
    def moves(p, filled):
        """Targets from position p (0 = start), skipping holes filled with eps."""
        out = []
        if p in aut.finals:
            out.append(("end", filled))
        for p2 in aut.succ(p):
            if p2 in hole_of:
                k = hole_of[p2]
                out += [("diag", k, a, filled | {k}) for a in alphabet]
                out += moves(p2, filled)          # empty fill
            else:
                out.append(("pos", p2, filled))
        return out

    def succ(node):
        kind = node[0]
        if kind == "start":
            return moves(0, frozenset())
        if kind == "pos":
            return moves(node[1], node[2])
        if kind == "diag":
            _, k, _, filled = node
            return [("diag", k, b, filled) for b in alphabet] + moves(aut.hole_states[k], filled)
        return [node]                              # end states loop

    start = ("start",)
    order, index, edges = [start], {start: 0}, []
    head = 0
    while head < len(order):
        node = order[head]
        head += 1
        for nxt in dict.fromkeys(succ(node)):
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            edges.append((index[node], index[nxt]))

    # keep only states from which an end state can be reached
    back = {}
    for s, t in edges:
        back.setdefault(t, []).append(s)
    alive = {i for i, nd in enumerate(order) if nd[0] == "end"}
    stack = list(alive)
    while stack:
        t = stack.pop()
        for s in back.get(t, ()):
            if s not in alive:
                alive.add(s)
                stack.append(s)
    keep = [i for i in range(len(order)) if i in alive or i == 0]
    renum = {old: new for new, old in enumerate(keep, 1)}
    labels, trans = {}, set()
    for old in keep:
        nd = order[old]
        if nd[0] == "pos":
            labels[renum[old]] = {aut.labels[nd[1]]}
        elif nd[0] == "diag":
            labels[renum[old]] = {nd[2], f"{nd[2]}'{nd[1]}"}
        elif nd[0] == "end":
            labels[renum[old]] = {end_atom} | {f"endx_{k}" for k in nd[1]}
        else:
            labels[renum[old]] = set()
    for s, t in edges:
        if s in renum and t in renum:
            trans.add((renum[s], renum[t]))
    n = len(keep)
    if not any(s == 1 for s, _ in trans):
        n += 1                                     # dead start: add an unlabeled sink
        labels[n] = set()
        trans |= {(1, n), (n, n)}
    inits = [1]
    obs = {}
    phis = []
    for k, sub in ((k, subs[k]) for k, _ in holes):
        idle = n + 1
        off = idle
        labels[idle] = set()
        trans.add((idle, idle))
        inits.append(idle)
        for q in range(1, sub.n + 1):
            labels[q + off] = {f"{s}'{k}" if s in alphabet else s for s in sub.labels.get(q, ())}
        trans |= {(s + off, t + off) for s, t in sub.trans}
        for q0 in sub.inits:
            trans.add((idle, q0 + off))
            inits.append(q0 + off)
        n = off + sub.n
        obs.update(sub.obs)
        obs[f"A{k}"] = {f"{a}'{k}" for a in alphabet}
        inner = expand_macro("AGAF", [Or(NegAtom(sub.end_atom), dual(sub.phi))
                                      if not isinstance(sub.phi, Top) else NegAtom(sub.end_atom)])
        phis.append(Or(NegAtom(f"endx_{k}"), K(f"A{k}", inner)))
    return _Level(n, labels, trans, inits, obs, 1, end_atom, conj(*phis))


# ----------------------------------------------------------- file format

_SFX_TOKEN = re.compile(r"\s*(?:(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>[().+|~,=]))")


class _ExprParser:
    def __init__(self, text, lineno, defs, params, alphabet):
        self.toks = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            mt = _SFX_TOKEN.match(text, pos)
            if not mt or mt.end() == pos:
                raise ParseError(f"unexpected character {text[pos:].strip()[:1]!r}", lineno, pos + 1)
            self.toks.append(mt.group("id") or mt.group("sym"))
            pos = mt.end()
        self.toks.append(None)
        self.i = 0
        self.lineno = lineno
        self.defs, self.params, self.alphabet = defs, params, alphabet

    def error(self, msg):
        return ParseError(msg, self.lineno)

    def parse(self):
        e = self.union()
        if self.toks[self.i] is not None:
            raise self.error(f"unexpected {self.toks[self.i]!r}")
        return e

    def union(self):
        e = self.cat()
        while self.toks[self.i] in ("+", "|"):
            self.i += 1
            e = Union(e, self.cat())
        return e

    def cat(self):
        e = self.unary()
        while self.toks[self.i] == ".":
            self.i += 1
            e = Cat(e, self.unary())
        return e

    def unary(self):
        if self.toks[self.i] == "~":
            self.i += 1
            return Compl(self.unary())
        return self.primary()

    def primary(self):
        tok = self.toks[self.i]
        if tok == "(":
            self.i += 1
            e = self.union()
            if self.toks[self.i] != ")":
                raise self.error("expected ')'")
            self.i += 1
            return e
        if tok is None or not re.match(r"[A-Za-z_]", tok):
            raise self.error(f"expected an expression, found {tok!r}")
        self.i += 1
        if tok == "eps":
            return Eps()
        if tok == "empty":
            return Empty()
        if tok in self.params:
            return _Param(tok)
        if tok in self.defs:
            params, body = self.defs[tok]
            args = []
            if self.toks[self.i] == "(":
                self.i += 1
                args.append(self.union())
                while self.toks[self.i] == ",":
                    self.i += 1
                    args.append(self.union())
                if self.toks[self.i] != ")":
                    raise self.error("expected ')'")
                self.i += 1
            if len(args) != len(params):
                raise self.error(f"{tok} takes {len(params)} argument(s)")
            return _subst(body, dict(zip(params, args)))
        if self.alphabet is not None and tok not in self.alphabet:
            raise self.error(f"unknown name {tok!r}")
        return Sym(tok)


def _subst(e, env):
    if isinstance(e, _Param):
        return env[e.name]
    if isinstance(e, Cat):
        return Cat(_subst(e.left, env), _subst(e.right, env))
    if isinstance(e, Union):
        return Union(_subst(e.left, env), _subst(e.right, env))
    if isinstance(e, Compl):
        return Compl(_subst(e.arg, env))
    return e


def parse_sfx(text):
    """Parse an expression file; returns ``(expression, alphabet)``.

    Lines are ``alphabet: a b``, ``NAME = expr`` or ``NAME(x, ...) = expr``;
    ``#`` starts a comment. The main expression is ``R`` if defined,
    otherwise the last definition.
    """
    alphabet = None
    defs = {}
    last = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("alphabet:"):
            alphabet = tuple(line[len("alphabet:"):].split())
            continue
        mt = re.match(r"^([A-Za-z_][A-Za-z0-9_]*)\s*(?:\(([^)]*)\))?\s*=(.*)$", line)
        if not mt:
            raise ParseError("expected 'NAME = expression'", lineno)
        name, params, body = mt.group(1), mt.group(2), mt.group(3)
        params = tuple(p.strip() for p in params.split(",")) if params else ()
        if alphabet is not None and name in alphabet:
            raise ParseError(f"{name!r} is an alphabet symbol", lineno)
        expr = _ExprParser(body, lineno, defs, params, alphabet).parse()
        defs[name] = (params, expr)
        last = name
    if last is None:
        raise ParseError("no expression defined")
    main = "R" if "R" in defs else last
    params, expr = defs[main]
    if params:
        raise ParseError(f"main expression {main} must not take parameters")
    if alphabet is None:
        alphabet = tuple(sorted(symbols_of(expr)))
    return expr, alphabet


def load_sfx(path):
    with open(path, encoding="utf-8") as fh:
        return parse_sfx(fh.read())


# ------------------------------------------------------------- verification

@dataclass
class ReductionReport:
    words: int
    mismatches: list
    undecided: list
    witnesses: int
    fallback_used: bool

    @property
    def ok(self):
        return not self.mismatches and not self.undecided

    def to_json(self):
        return {"ok": self.ok, "words": self.words, "witnesses": self.witnesses,
                "fallback_used": self.fallback_used,
                "mismatches": [{"word": "".join(w), "expected": e, "found": f}
                               for w, e, f in self.mismatches],
                "undecided": ["".join(w) for w in self.undecided]}


def main_paths(red, word, max_len):
    """Paths from the main initial state that spell ``word`` and stop at the
    first state labeled with the end atom."""
    m, sigma = red.mas, set(red.alphabet)
    out = []

    def dfs(path, used):
        q = path[-1]
        if red.end_atom in m.label(q):
            if used == len(word):
                out.append(tuple(path))
            return
        if len(path) >= max_len:
            return
        for r in m.succ[q]:
            letters = m.label(r) & sigma
            if len(letters) > 1:
                continue
            if letters:
                if used >= len(word) or word[used] not in letters:
                    continue
                dfs(path + [r], used + 1)
            else:
                dfs(path + [r], used)

    dfs([red.main_init], 0)
    return out


def verify_reduction(r, alphabet, maxlen, depth=None, fallback=None):
    """Compare membership with the existence of a witness path on which the
    side condition holds, for every word up to ``maxlen``.

    The side condition is evaluated at two consecutive nodes on the end
    loop; nested epistemic conditions use ``fallback`` (see
    ``oracle.holds_at``) when they are not plain.
    """
    from .oracle import holds_at

    red = build_reduction(r, alphabet)
    m = red.mas
    depth = depth if depth is not None else maxlen + 6
    mismatches, undecided = [], []
    witnesses = 0
    used_fallback = [False]

    def fb(g, run):
        used_fallback[0] = True
        if fallback is None:
            raise InputError("nested side condition needs a fallback evaluator")
        return fallback(g, run)

    cache = {}
    for w in words(red.alphabet, maxlen):
        expected = _member(r, w)
        found, unsure = False, False
        for rho in main_paths(red, w, depth):
            if len(rho) + 2 > depth:
                unsure = True
                continue
            end = rho[-1]
            if all(holds_at(red.phi, m, rho + (end,) * j, fb, cache) for j in (1, 2)):
                found = True
                witnesses += 1
                break
        if found != expected:
            if unsure and not found:
                undecided.append(w)
            else:
                mismatches.append((w, expected, found))
    return ReductionReport(sum(1 for _ in words(red.alphabet, maxlen)), mismatches,
                           undecided, witnesses, used_fallback[0])


def brute_force_nonempty(r, alphabet, maxlen):
    return any(_member(r, w) for w in words(tuple(alphabet), maxlen))
