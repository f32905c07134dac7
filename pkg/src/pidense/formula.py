"""Formula AST with hash-consing, a small parser, and closure operators.

Core connectives are atoms, bottom, negation, conjunction and the indexed
box.  Everything else (top, disjunction, implication, diamond) is sugar and
is rewritten away at construction time.  Nodes are interned, so structural
equality coincides with identity and every node carries a stable integer
key usable for deterministic ordering.
"""

import re

_table = {}


class Formula:
    __slots__ = ("key", "depth", "size")

    def __repr__(self):
        return to_str(self)

    def __hash__(self):
        return self.key

    def __lt__(self, other):
        return self.key < other.key


class Atom(Formula):
    __slots__ = ("name",)

    def __new__(cls, name):
        tag = ("at", name)
        f = _table.get(tag)
        if f is None:
            f = object.__new__(cls)
            f.name = name
            f.depth = 0
            f.size = 1
            f.key = len(_table)
            _table[tag] = f
        return f


class Bottom(Formula):
    __slots__ = ()

    def __new__(cls):
        tag = ("bot",)
        f = _table.get(tag)
        if f is None:
            f = object.__new__(cls)
            f.depth = 0
            f.size = 1
            f.key = len(_table)
            _table[tag] = f
        return f


class Neg(Formula):
    __slots__ = ("sub",)

    def __new__(cls, sub):
        tag = ("n", sub.key)
        f = _table.get(tag)
        if f is None:
            f = object.__new__(cls)
            f.sub = sub
            f.depth = sub.depth
            f.size = sub.size + 1
            f.key = len(_table)
            _table[tag] = f
        return f


class And(Formula):
    __slots__ = ("left", "right")

    def __new__(cls, left, right):
        tag = ("a", left.key, right.key)
        f = _table.get(tag)
        if f is None:
            f = object.__new__(cls)
            f.left = left
            f.right = right
            f.depth = max(left.depth, right.depth)
            f.size = left.size + right.size + 1
            f.key = len(_table)
            _table[tag] = f
        return f


class Box(Formula):
    __slots__ = ("index", "sub")

    def __new__(cls, index, sub):
        tag = ("b", index, sub.key)
        f = _table.get(tag)
        if f is None:
            f = object.__new__(cls)
            f.index = index
            f.sub = sub
            f.depth = sub.depth + 1
            f.size = sub.size + 1
            f.key = len(_table)
            _table[tag] = f
        return f


def atom(name):
    return Atom(name)


def bot():
    return Bottom()


def neg(f):
    return Neg(f)


def conj(a, b):
    return And(a, b)


def box(i, f):
    return Box(i, f)


def top():
    return Neg(Bottom())


def disj(a, b):
    """a or b, desugared to ~(~a & ~b)."""
    return Neg(And(Neg(a), Neg(b)))


def implies(a, b):
    """a -> b, desugared to ~(a & ~b)."""
    return Neg(And(a, Neg(b)))


def diamond(i, f):
    """<i>f, desugared to ~[i]~f."""
    return Neg(Box(i, Neg(f)))


def depth(f):
    """Modal nesting depth."""
    return f.depth


def size(f):
    """Number of core symbol occurrences."""
    return f.size


def monus(n, m):
    """Truncated subtraction: max(0, n - m)."""
    return n - m if n > m else 0


def set_depth(s):
    """Max depth over a formula set, 0 for the empty set."""
    return max((f.depth for f in s), default=0)


def set_size(s):
    """Total size over a formula set."""
    return sum(f.size for f in s)


def sorted_set(s):
    """Members of a formula set in stable key order."""
    return sorted(s, key=lambda f: f.key)


class ParseError(ValueError):
    def __init__(self, message, position):
        super().__init__("%s (at position %d)" % (message, position))
        self.position = position


_TOKEN = re.compile(r"\s*(->|\[\d*\]|<\d*>|[()&|~]|[a-z][a-zA-Z0-9_]*)")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError("unexpected character %r" % stripped[0], pos)
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    tokens.append((None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text, pi, mono):
        self.tokens = _tokenize(text)
        self.i = 0
        self.pi = pi
        self.mono = mono

    def peek(self):
        return self.tokens[self.i][0]

    def pos(self):
        return self.tokens[self.i][1]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, tok):
        got, pos = self.take()
        if got != tok:
            raise ParseError("expected %r, got %r" % (tok, got), pos)

    def modal_index(self, body, pos):
        if self.mono:
            if body != "":
                raise ParseError("indexed modality in single-modality mode", pos)
            return 0
        if body == "":
            raise ParseError("missing modality index", pos)
        idx = int(body)
        if self.pi is not None and idx > self.pi:
            raise ParseError("modality index %d exceeds bound %d" % (idx, self.pi), pos)
        return idx

    def parse_implies(self):
        left = self.parse_or()
        if self.peek() == "->":
            self.take()
            right = self.parse_implies()
            return implies(left, right)
        return left

    def parse_or(self):
        f = self.parse_and()
        while self.peek() == "|":
            self.take()
            f = disj(f, self.parse_and())
        return f

    def parse_and(self):
        f = self.parse_unary()
        while self.peek() == "&":
            self.take()
            f = conj(f, self.parse_unary())
        return f

    def parse_unary(self):
        tok, pos = self.take()
        if tok == "~":
            return neg(self.parse_unary())
        if tok is not None and tok.startswith("["):
            idx = self.modal_index(tok[1:-1], pos)
            return box(idx, self.parse_unary())
        if tok is not None and tok.startswith("<"):
            idx = self.modal_index(tok[1:-1], pos)
            return diamond(idx, self.parse_unary())
        if tok == "(":
            f = self.parse_implies()
            self.expect(")")
            return f
        if tok == "bot":
            return bot()
        if tok == "top":
            return top()
        if tok is not None and tok[0].isalpha():
            return atom(tok)
        raise ParseError("unexpected token %r" % (tok,), pos)


def parse(text, pi=None, mono=False):
    """Parse a formula. pi bounds modality indices when given; mono mode
    uses unindexed [] and <>."""
    p = _Parser(text, pi, mono)
    f = p.parse_implies()
    tok, pos = p.take()
    if tok is not None:
        raise ParseError("trailing input %r" % tok, pos)
    return f


_LEVEL_AND = 1
_LEVEL_UNARY = 2


def _box_token(index, mono):
    return "[]" if mono else "[%d]" % index


def _diamond_token(index, mono):
    return "<>" if mono else "<%d>" % index


def _pp(f, context, mono):
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Bottom):
        return "bot"
    if isinstance(f, Neg):
        s = f.sub
        if isinstance(s, Bottom):
            return "top"
        if isinstance(s, Box) and isinstance(s.sub, Neg):
            body = _diamond_token(s.index, mono) + _pp(s.sub.sub, _LEVEL_UNARY, mono)
        else:
            body = "~" + _pp(s, _LEVEL_UNARY, mono)
        return "(%s)" % body if _LEVEL_UNARY < context else body
    if isinstance(f, Box):
        body = _box_token(f.index, mono) + _pp(f.sub, _LEVEL_UNARY, mono)
        return "(%s)" % body if _LEVEL_UNARY < context else body
    if isinstance(f, And):
        body = "%s & %s" % (
            _pp(f.left, _LEVEL_AND, mono),
            _pp(f.right, _LEVEL_UNARY, mono),
        )
        return "(%s)" % body if _LEVEL_AND < context else body
    raise TypeError("not a formula: %r" % (f,))


def to_str(f, mono=False):
    """Canonical text form; parse(to_str(f)) returns the same node."""
    return _pp(f, 0, mono)


def csf(s):
    """Classical subformula closure.  Decomposes conjunctions and
    negations but never crosses a box."""
    out = set()
    work = list(s)
    while work:
        f = work.pop()
        if f in out:
            continue
        out.add(f)
        if isinstance(f, And):
            work.append(f.left)
            work.append(f.right)
        elif isinstance(f, Neg):
            work.append(f.sub)
            if isinstance(f.sub, And):
                work.append(Neg(f.sub.left))
                work.append(Neg(f.sub.right))
    return frozenset(out)


def sf(s):
    """Full subformula closure: the classical rules plus unboxing
    ([i]f yields f, ~[i]f yields ~f)."""
    out = set()
    work = list(s)
    while work:
        f = work.pop()
        if f in out:
            continue
        out.add(f)
        if isinstance(f, And):
            work.append(f.left)
            work.append(f.right)
        elif isinstance(f, Box):
            work.append(f.sub)
        elif isinstance(f, Neg):
            work.append(f.sub)
            if isinstance(f.sub, And):
                work.append(Neg(f.sub.left))
                work.append(Neg(f.sub.right))
            elif isinstance(f.sub, Box):
                work.append(Neg(f.sub.sub))
    return frozenset(out)


def random_formula(rng, max_depth, pi=0, atoms=("p", "q", "r"), allow_sugar=True):
    """Sample a random formula with modal depth at most max_depth and
    indices at most pi.  Sizes stay desk-scale by construction."""
    def go(d):
        roll = rng.random()
        if d == 0:
            if roll < 0.45:
                return atom(rng.choice(atoms))
            if roll < 0.5:
                return bot()
            if roll < 0.75:
                return neg(go(0))
            return conj(go(0), go(0))
        if roll < 0.3:
            return atom(rng.choice(atoms))
        if roll < 0.45:
            return neg(go(d))
        if roll < 0.6:
            return conj(go(d - 1 if rng.random() < 0.3 else d),
                        go(d - 1 if rng.random() < 0.3 else d))
        idx = rng.randint(0, pi)
        if allow_sugar and roll < 0.8:
            return diamond(idx, go(d - 1))
        return box(idx, go(d - 1))
    return go(max_depth)
