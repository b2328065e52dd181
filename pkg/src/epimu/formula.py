"""Formulas of the epistemic mu-calculus: AST, parser, printer, macros,
syntactic trees and the non-mixing fragment check."""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import InputError, ParseError


class Formula:
    __slots__ = ()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class NegAtom(Formula):
    name: str


@dataclass(frozen=True)
class Var(Formula):
    name: str


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class AX(Formula):
    arg: Formula


@dataclass(frozen=True)
class EX(Formula):
    arg: Formula


@dataclass(frozen=True)
class K(Formula):
    agent: str
    arg: Formula


@dataclass(frozen=True)
class P(Formula):
    agent: str
    arg: Formula


@dataclass(frozen=True)
class Mu(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Nu(Formula):
    var: str
    body: Formula


BINARY = (And, Or)
TEMPORAL = (AX, EX)
EPISTEMIC = (K, P)
FIXPOINT = (Mu, Nu)
LEAVES = (Top, Bot, Atom, NegAtom, Var)


def children(f):
    if isinstance(f, BINARY):
        return (f.left, f.right)
    if isinstance(f, (AX, EX, K, P)):
        return (f.arg,)
    if isinstance(f, FIXPOINT):
        return (f.body,)
    return ()


def rebuild(f, kids):
    """Copy of f with its children replaced."""
    if isinstance(f, BINARY):
        return type(f)(kids[0], kids[1])
    if isinstance(f, (AX, EX)):
        return type(f)(kids[0])
    if isinstance(f, EPISTEMIC):
        return type(f)(f.agent, kids[0])
    if isinstance(f, FIXPOINT):
        return type(f)(f.var, kids[0])
    return f


def free_vars(f):
    if isinstance(f, Var):
        return frozenset([f.name])
    if isinstance(f, FIXPOINT):
        return free_vars(f.body) - {f.var}
    out = frozenset()
    for c in children(f):
        out |= free_vars(c)
    return out


def is_closed(f):
    return not free_vars(f)


def is_plain(f):
    """No epistemic operator occurs in f."""
    if isinstance(f, EPISTEMIC):
        return False
    return all(is_plain(c) for c in children(f))


def has_fixpoint(f):
    if isinstance(f, FIXPOINT):
        return True
    return any(has_fixpoint(c) for c in children(f))


def modal_depth(f):
    """Nesting depth of AX/EX (epistemic operators do not move along runs)."""
    inner = max((modal_depth(c) for c in children(f)), default=0)
    return inner + 1 if isinstance(f, TEMPORAL) else inner


def agents_of(f):
    out = {f.agent} if isinstance(f, EPISTEMIC) else set()
    for c in children(f):
        out |= agents_of(c)
    return frozenset(out)


def atoms_of(f):
    out = {f.name} if isinstance(f, (Atom, NegAtom)) else set()
    for c in children(f):
        out |= atoms_of(c)
    return frozenset(out)


def bound_vars(f):
    out = [f.var] if isinstance(f, FIXPOINT) else []
    for c in children(f):
        out += bound_vars(c)
    return out


def subformulas(f):
    """Pre-order list of subformula occurrences."""
    out = [f]
    for c in children(f):
        out += subformulas(c)
    return out


def size(f):
    return 1 + sum(size(c) for c in children(f))


def dual(f):
    """The positive-form negation of f (bound variables keep their names)."""
    if isinstance(f, Atom):
        return NegAtom(f.name)
    if isinstance(f, NegAtom):
        return Atom(f.name)
    if isinstance(f, Top):
        return Bot()
    if isinstance(f, Bot):
        return Top()
    if isinstance(f, Var):
        return f
    swap = {And: Or, Or: And, AX: EX, EX: AX, K: P, P: K, Mu: Nu, Nu: Mu}
    g = rebuild(f, [dual(c) for c in children(f)])
    if isinstance(g, EPISTEMIC):
        return swap[type(g)](g.agent, g.arg)
    if isinstance(g, FIXPOINT):
        return swap[type(g)](g.var, g.body)
    return swap[type(g)](*children(g))


def substitute(f, name, g):
    """Replace free occurrences of variable ``name`` by g (no capture check)."""
    if isinstance(f, Var):
        return g if f.name == name else f
    if isinstance(f, FIXPOINT) and f.var == name:
        return f
    return rebuild(f, [substitute(c, name, g) for c in children(f)])


def conj(*fs):
    fs = [f for f in fs if not isinstance(f, Top)]
    if not fs:
        return Top()
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disj(*fs):
    fs = [f for f in fs if not isinstance(f, Bot)]
    if not fs:
        return Bot()
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


# ----------------------------------------------------------------- renaming

def _fresh(base, used):
    stem = re.sub(r"_\d+$", "", base)
    k = 1
    while f"{stem}_{k}" in used:
        k += 1
    return f"{stem}_{k}"


def alpha_rename(f):
    """Rename binders so that every bound variable is bound exactly once and
    never clashes with a free variable. Binders that are already unique keep
    their names."""
    used = set(free_vars(f))

    def go(g, env):
        if isinstance(g, Var):
            return Var(env.get(g.name, g.name))
        if isinstance(g, FIXPOINT):
            name = g.var
            if name in used:
                name = _fresh(name, used)
            used.add(name)
            return type(g)(name, go(g.body, {**env, g.var: name}))
        return rebuild(g, [go(c, env) for c in children(g)])

    return go(f, {})


# ------------------------------------------------------------------ printing

def to_text(f):
    """Fully parenthesized canonical text; parses back to the same AST."""
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bot):
        return "false"
    if isinstance(f, (Atom, Var)):
        return f.name
    if isinstance(f, NegAtom):
        return "!" + f.name
    if isinstance(f, And):
        return f"({to_text(f.left)} & {to_text(f.right)})"
    if isinstance(f, Or):
        return f"({to_text(f.left)} | {to_text(f.right)})"
    if isinstance(f, AX):
        return "AX " + to_text(f.arg)
    if isinstance(f, EX):
        return "EX " + to_text(f.arg)
    if isinstance(f, K):
        return f"K[{f.agent}] " + to_text(f.arg)
    if isinstance(f, P):
        return f"P[{f.agent}] " + to_text(f.arg)
    if isinstance(f, Mu):
        return f"(mu {f.var}. {to_text(f.body)})"
    if isinstance(f, Nu):
        return f"(nu {f.var}. {to_text(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


# -------------------------------------------------------------------- macros

def _avoid(args, *names):
    """Pick binder names not occurring anywhere in args."""
    taken = set()
    for a in args:
        taken |= free_vars(a) | set(bound_vars(a))
    out = []
    for n in names:
        cand = n
        while cand in taken:
            cand = _fresh(cand, taken)
        taken.add(cand)
        out.append(cand)
    return out


def _ef(p):
    (z,) = _avoid([p], "Z")
    return Mu(z, Or(p, EX(Var(z))))


def _af(p):
    (z,) = _avoid([p], "Z")
    return Mu(z, Or(p, AX(Var(z))))


def _eg(p):
    (z,) = _avoid([p], "Z")
    return Nu(z, And(p, EX(Var(z))))


def _ag(p):
    (z,) = _avoid([p], "Z")
    return Nu(z, And(p, AX(Var(z))))


def _eu(p, q):
    (z,) = _avoid([p, q], "Z")
    return Mu(z, Or(q, And(p, EX(Var(z)))))


def _au(p, q):
    (z,) = _avoid([p, q], "Z")
    return Mu(z, Or(q, And(p, AX(Var(z)))))


def _e_diamond_box(p):
    # some path along which p eventually holds forever
    z1, z2 = _avoid([p], "Z1", "Z2")
    return Mu(z1, Or(Nu(z2, And(p, EX(Var(z2)))), EX(Var(z1))))


def _a_box_diamond(p):
    # on every path p holds infinitely often
    z, y = _avoid([p], "Z", "Y")
    return Nu(z, And(Mu(y, Or(p, AX(Var(y)))), AX(Var(z))))


def _e_box_diamond(p):
    # some path along which p holds infinitely often
    z, y = _avoid([p], "Z", "Y")
    return Nu(z, Mu(y, Or(And(p, EX(Var(z))), EX(Var(y)))))


def _a_diamond_box(p):
    # on every path p eventually holds forever
    return dual(_e_box_diamond(dual(p)))


MACROS = {
    "EF": (1, _ef),
    "AF": (1, _af),
    "EG": (1, _eg),
    "AG": (1, _ag),
    "EU": (2, _eu),
    "AU": (2, _au),
    "EDiamondBox": (1, _e_diamond_box),
    "EFG": (1, _e_diamond_box),
    "AGAF": (1, _a_box_diamond),
    "ABoxDiamond": (1, _a_box_diamond),
    "EGEF": (1, _e_box_diamond),
    "EBoxDiamond": (1, _e_box_diamond),
    "ADiamondBox": (1, _a_diamond_box),
    "AFG": (1, _a_diamond_box),
}


def expand_macro(name, args, allow_open=False):
    if name not in MACROS:
        raise InputError(f"unknown macro {name}")
    arity, fn = MACROS[name]
    if len(args) != arity:
        raise InputError(f"macro {name} takes {arity} argument(s), got {len(args)}")
    if not allow_open:
        for a in args:
            if not is_closed(a):
                raise InputError(f"macro {name} applied to an open argument")
    return fn(*args)


# ------------------------------------------------------------------- parsing

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>[!&|().\[\],])
""", re.VERBOSE)

KEYWORDS = {"true", "false", "mu", "nu", "AX", "EX"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text):
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        mt = _TOKEN_RE.match(text, pos)
        if not mt:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = mt.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, mt.group(), line, pos - line_start + 1))
        chunk = mt.group()
        if "\n" in chunk:
            line += chunk.count("\n")
            line_start = pos + chunk.rindex("\n") + 1
        pos = mt.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def cur(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg, tok=None):
        tok = tok or self.cur
        return ParseError(msg, tok.line, tok.col)

    def eat(self, text):
        if self.cur.text != text:
            found = self.cur.text or "end of input"
            raise self.error(f"expected '{text}', found '{found}'")
        self.i += 1

    def parse(self):
        if self.cur.kind == "eof":
            raise self.error("empty formula")
        f = self.formula(frozenset())
        if self.cur.kind != "eof":
            raise self.error(f"unexpected '{self.cur.text}'")
        return f

    def formula(self, bound):
        left = self.conjunction(bound)
        while self.cur.text == "|":
            self.i += 1
            left = Or(left, self.conjunction(bound))
        return left

    def conjunction(self, bound):
        left = self.unary(bound)
        while self.cur.text == "&":
            self.i += 1
            left = And(left, self.unary(bound))
        return left

    def unary(self, bound):
        tok = self.cur
        if tok.text == "!":
            self.i += 1
            nxt = self.cur
            if nxt.kind == "ident" and nxt.text not in KEYWORDS and not self._is_var(nxt.text, bound) \
                    and not self._is_operator(nxt):
                self.i += 1
                return NegAtom(nxt.text)
            raise self.error("negation may only be applied to an atomic proposition", tok)
        if tok.text in ("mu", "nu"):
            self.i += 1
            var = self.cur
            if var.kind != "ident" or var.text in KEYWORDS:
                raise self.error("expected a variable after the fixpoint binder")
            self.i += 1
            self.eat(".")
            body = self.formula(bound | {var.text})
            return (Mu if tok.text == "mu" else Nu)(var.text, body)
        if tok.text in ("AX", "EX"):
            self.i += 1
            arg = self.unary(bound)
            return AX(arg) if tok.text == "AX" else EX(arg)
        if self._is_operator(tok):
            self.i += 2
            agent = self.cur
            if agent.kind != "ident":
                raise self.error("expected an agent name")
            self.i += 1
            self.eat("]")
            arg = self.unary(bound)
            return (K if tok.text == "K" else P)(agent.text, arg)
        return self.atomic(bound)

    def _is_operator(self, tok):
        # tok is always the current token here
        return tok.text in ("K", "P") and self.peek().text == "["

    @staticmethod
    def _is_var(name, bound):
        return name in bound or name[0].isupper()

    def atomic(self, bound):
        tok = self.cur
        if tok.text == "(":
            self.i += 1
            f = self.formula(bound)
            self.eat(")")
            return f
        if tok.kind != "ident":
            found = tok.text or "end of input"
            raise self.error(f"expected a formula, found '{found}'")
        self.i += 1
        if tok.text == "true":
            return Top()
        if tok.text == "false":
            return Bot()
        if tok.text in MACROS and self.cur.text == "(":
            self.i += 1
            args = [self.formula(bound)]
            while self.cur.text == ",":
                self.i += 1
                args.append(self.formula(bound))
            self.eat(")")
            try:
                return expand_macro(tok.text, args, allow_open=True)
            except InputError as exc:
                raise self.error(str(exc), tok) from None
        if tok.text in KEYWORDS:
            raise self.error(f"unexpected keyword '{tok.text}'", tok)
        if self._is_var(tok.text, bound):
            return Var(tok.text)
        return Atom(tok.text)


def parse_formula(text, require_closed=False):
    """Parse the concrete syntax.

    Identifiers bound by an enclosing ``mu``/``nu`` are variables, as is any
    identifier starting with an upper-case letter; everything else is an atom.
    The result is alpha-renamed so that every binder is unique.
    """
    f = alpha_rename(_Parser(text).parse())
    if require_closed and not is_closed(f):
        raise ParseError(f"unbound variable(s): {', '.join(sorted(free_vars(f)))}")
    return f


def load_formula(path, require_closed=False):
    with open(path, encoding="utf-8") as fh:
        return parse_formula(fh.read(), require_closed=require_closed)


# ----------------------------------------------------------- syntactic tree

def node_str(addr):
    return ".".join(str(i) for i in addr) if addr else "root"


@dataclass(frozen=True)
class SynNode:
    addr: tuple
    label: str
    form: Formula
    closed: bool
    agncl: frozenset
    children: tuple

    @property
    def node_str(self):
        return node_str(self.addr)


def _label(f):
    if isinstance(f, EPISTEMIC):
        return f"{type(f).__name__}[{f.agent}]"
    if isinstance(f, FIXPOINT):
        return f"{type(f).__name__.lower()} {f.var}"
    if isinstance(f, (Atom, Var)):
        return f.name
    if isinstance(f, NegAtom):
        return "!" + f.name
    return {Top: "true", Bot: "false", And: "&", Or: "|", AX: "AX", EX: "EX"}[type(f)]


class SynTree:
    """The syntactic tree of a formula, with its decorations.

    Nodes are addressed by tuples over {1, 2}; the root is ``()``. A node
    labeled with a variable gets a single child labeled ``true``.
    """

    def __init__(self, f):
        self.formula = f
        self.nodes = {}
        self._build((), f)

    def _build(self, addr, f):
        if isinstance(f, Var):
            kid_forms = (Top(),)
        else:
            kid_forms = children(f)
        kids = tuple(addr + (i + 1,) for i in range(len(kid_forms)))
        for k, g in zip(kids, kid_forms):
            self._build(k, g)
        closed = is_closed(f)
        agncl = frozenset()
        if not closed:
            own = {f.agent} if isinstance(f, EPISTEMIC) else set()
            agncl = frozenset(own).union(*(self.nodes[k].agncl for k in kids))
        self.nodes[addr] = SynNode(addr, _label(f), f, closed, agncl, kids)

    def __getitem__(self, addr):
        return self.nodes[tuple(addr)]

    def __iter__(self):
        return iter(self.preorder())

    def preorder(self, addr=()):
        out = [self.nodes[addr]]
        for k in self.nodes[addr].children:
            out += self.preorder(k)
        return out

    def postorder(self, addr=()):
        out = []
        for k in self.nodes[addr].children:
            out += self.postorder(k)
        out.append(self.nodes[addr])
        return out

    def parent(self, addr):
        return tuple(addr[:-1]) if addr else None

    def nearest_closed_successors(self, addr):
        """Closed strict descendants with only non-closed nodes in between."""
        out = []
        for k in self.nodes[addr].children:
            node = self.nodes[k]
            if node.closed:
                out.append(k)
            else:
                out += self.nearest_closed_successors(k)
        return out

    def is_nearest_closed_succ(self, x1, x2):
        x1, x2 = tuple(x1), tuple(x2)
        if x2 not in self.nodes or not self.nodes[x2].closed:
            return False
        if len(x2) <= len(x1) or x2[:len(x1)] != x1:
            return False
        return all(not self.nodes[x2[:i]].closed for i in range(len(x1) + 1, len(x2)))

    def closed_ancestor(self, addr):
        """Nearest closed strict ancestor (None for the root)."""
        a = self.parent(addr)
        while a is not None and not self.nodes[a].closed:
            a = self.parent(a)
        return a

    def region(self, addr):
        """The node itself plus the non-closed descendants reachable through
        non-closed nodes."""
        out = [addr]
        stack = list(self.nodes[addr].children)
        while stack:
            k = stack.pop()
            if not self.nodes[k].closed:
                out.append(k)
                stack.extend(self.nodes[k].children)
        return sorted(out)


def syntactic_tree(f):
    return SynTree(f)


# ---------------------------------------------------------------- non-mixing

@dataclass(frozen=True)
class Violation:
    a: str
    b: str
    node: tuple

    @property
    def node_str(self):
        return node_str(self.node)


@dataclass(frozen=True)
class NonMixingVerdict:
    ok: bool
    violation: Violation | None = None

    def to_json(self):
        if self.ok:
            return {"ok": True}
        v = self.violation
        return {"ok": False, "violation": {"agents": [v.a, v.b], "node": v.node_str}}


def comparable(obs_a, obs_b):
    return obs_a <= obs_b or obs_b <= obs_a


def check_nonmixing(f, m):
    """Every pair of agents whose operators are non-closed at a common node
    must have inclusion-comparable observation sets in m."""
    missing = sorted(agents_of(f) - set(m.agents))
    if missing:
        raise InputError(f"formula mentions undeclared agent(s): {', '.join(missing)}")
    tree = syntactic_tree(f)
    for node in tree.preorder():
        ags = sorted(node.agncl)
        for i, a in enumerate(ags):
            for b in ags[i + 1:]:
                if not comparable(m.obs[a], m.obs[b]):
                    return NonMixingVerdict(False, Violation(a, b, node.addr))
    return NonMixingVerdict(True)
