"""Layered row structures ("windows") used by the satisfiability search.

A window for a pair (u, v0) at level k holds a spine of rows v0..vn, each a
consistent saturated set, where every row feeds the one below it through
the box projections, plus one sub-window per adjacent row pair, recursively
one level up.  Windows are immutable; slices are lightweight views.

Row universes are the full closure sf(seed) of the row's seed.  Row 0 is
special: it satisfies containment conditions only (plus bounds against a
caller-supplied seed when one is given), because it is shared with the
structure one level down.
"""

from dataclasses import dataclass
from typing import Optional

from .ccs import box_minus, is_consistent, is_saturated, is_saturation_in
from .formula import csf, set_depth, sf


class Window:
    __slots__ = ()


class EmptyWindow(Window):
    __slots__ = ()

    def __repr__(self):
        return "<window empty>"


EMPTY = EmptyWindow()


class WindowNode(Window):
    __slots__ = ("rows", "subs", "_key")

    def __init__(self, rows, subs):
        rows = tuple(frozenset(r) for r in rows)
        subs = tuple(subs)
        if not rows:
            raise ValueError("a window node needs at least one row")
        if len(subs) != len(rows) - 1:
            raise ValueError("need exactly one sub-window per adjacent row pair")
        self.rows = rows
        self.subs = subs
        self._key = None

    def __repr__(self):
        return "<window rows=%d depth=%d>" % (len(self.rows), _nesting(self))

    def __eq__(self, other):
        return isinstance(other, WindowNode) and canonical_key(self) == canonical_key(other)

    def __hash__(self):
        return hash(canonical_key(self))


def _nesting(w):
    if isinstance(w, EmptyWindow):
        return 0
    return 1 + max((_nesting(s) for s in w.subs), default=0)


def canonical_key(w):
    """Stable hashable key for seen-sets and serialization."""
    if isinstance(w, EmptyWindow):
        return ("e",)
    if w._key is None:
        w._key = (
            "w",
            tuple(tuple(sorted(f.key for f in row)) for row in w.rows),
            tuple(canonical_key(s) for s in w.subs),
        )
    return w._key


@dataclass
class WindowContext:
    """Validation context: the owning set u, level k, spine length n, the
    index bound pi (None in single-modality mode), and an optional seed
    that row 0 must respect."""

    u: frozenset
    k: int
    n: int
    pi: Optional[int] = None
    lambda_tag: str = "depth"
    v0_seed: Optional[frozenset] = None
    mono: bool = False


@dataclass
class WindowSlice:
    """Contiguous view of a window's rows and sub-windows.  lookahead is
    the underlying window's row just past the top of the slice, when the
    slice stops short of the spine's end."""

    rows: tuple
    subs: tuple
    lookahead: Optional[frozenset] = None


def members(w):
    """All row sets appearing anywhere in the structure."""
    if isinstance(w, EmptyWindow):
        return frozenset()
    out = set(w.rows)
    for s in w.subs:
        out |= members(s)
    return frozenset(out)


def partial(w, a, b):
    """Slice of rows a..b with their sub-windows.  Keeps a lookahead row
    when the slice stops before the last row."""
    if not isinstance(w, WindowNode):
        raise ValueError("only window nodes can be sliced")
    n = len(w.rows) - 1
    if not (0 <= a <= b <= n):
        raise ValueError("slice bounds out of range")
    look = w.rows[b + 1] if b + 1 <= n else None
    return WindowSlice(w.rows[a : b + 1], w.subs[a:b], look)


def as_slice(w):
    if isinstance(w, WindowSlice):
        return w
    if isinstance(w, WindowNode):
        return WindowSlice(w.rows, w.subs, None)
    raise ValueError("expected a window node or slice")


def _proj(i, s, mono):
    return box_minus(0 if mono else i, s)


def _row_universe(seed):
    return sf(seed)


def is_window(w, ctx):
    """Structural validity of w against ctx.

    Only depth-tagged contexts are decidable here; the other length tags
    describe bounds that are never materialized.
    """
    if ctx.lambda_tag != "depth":
        raise ValueError("only depth-tagged windows can be materialized")
    if isinstance(w, EmptyWindow):
        return (not ctx.mono) and ctx.pi is not None and ctx.k == ctx.pi
    if not isinstance(w, WindowNode):
        return False
    if not ctx.mono:
        if ctx.pi is None or ctx.k >= ctx.pi:
            return False
    n = len(w.rows) - 1
    if n != ctx.n:
        return False
    base = _proj(ctx.k, ctx.u, ctx.mono)

    if n >= 1:
        vn = w.rows[n]
        if not is_saturation_in(vn, base, _row_universe(base)):
            return False
        for i in range(n - 1, 0, -1):
            seed_i = base | _proj(ctx.k + 1, w.rows[i + 1], ctx.mono)
            if not is_saturation_in(w.rows[i], seed_i, _row_universe(seed_i)):
                return False
        seed0 = base | _proj(ctx.k + 1, w.rows[1], ctx.mono)
    else:
        seed0 = base

    v0 = w.rows[0]
    if not (seed0 <= v0 and is_consistent(v0) and is_saturated(v0)):
        return False
    if ctx.v0_seed is not None:
        if not (ctx.v0_seed <= v0 <= sf(ctx.v0_seed)):
            return False

    for i in range(n):
        sub = w.subs[i]
        if isinstance(sub, WindowNode) and sub.rows[0] != w.rows[i]:
            return False
        sub_ctx = WindowContext(
            u=w.rows[i + 1],
            k=ctx.k + 1,
            n=set_depth(w.rows[i + 1]),
            pi=ctx.pi,
            mono=ctx.mono,
        )
        if not is_window(sub, sub_ctx):
            return False
    return True


def pointwise_included(s1, s2, k, mono=False):
    """Row-wise inclusion of s1 in s2 at level k.

    Each s2 row must be a CCS over the matching s1 row joined with the box
    projection of s2's next row; the top position uses s2's lookahead row
    when it has one and is unconstrained otherwise.  Sub-windows are
    compared recursively one level up.  Shape mismatches raise.
    """
    if isinstance(s1, EmptyWindow) or isinstance(s2, EmptyWindow):
        if isinstance(s1, EmptyWindow) and isinstance(s2, EmptyWindow):
            return True
        raise ValueError("cannot compare an empty window with a node")
    a = as_slice(s1)
    b = as_slice(s2)
    if len(a.rows) != len(b.rows):
        raise ValueError("slice widths differ")
    width = len(a.rows)
    for j in range(width):
        if j + 1 < width:
            look = b.rows[j + 1]
        else:
            look = b.lookahead
        if look is None:
            continue
        seed = a.rows[j] | _proj(k + 1, look, mono)
        if not is_saturation_in(b.rows[j], seed, csf(seed)):
            return False
    for j in range(width - 1):
        if not pointwise_included(a.subs[j], b.subs[j], k + 1, mono):
            return False
    return True


def is_continuation(w2, w1, ctx):
    """True when w2 continues w1 one step: w1's rows 1..n include into
    w2's rows 0..n-1, with w2's fresh top row as lookahead."""
    if not isinstance(w1, WindowNode) or not isinstance(w2, WindowNode):
        raise ValueError("continuations relate window nodes")
    n1 = len(w1.rows) - 1
    n2 = len(w2.rows) - 1
    if n1 != n2:
        raise ValueError("window lengths differ")
    if n1 < 1:
        raise ValueError("length-0 windows have no continuations")
    return pointwise_included(
        partial(w1, 1, n1), partial(w2, 0, n2 - 1), ctx.k, ctx.mono
    )


def merge_continuation(w1, w2, ctx):
    """Splice a continuation onto the chain it extends.

    w1 is the accumulated window (length m), w2 a continuation of w1's
    last length-n slice with m >= n.  The result keeps w1's first m-n+1
    rows and all of w2's rows, giving a window one row longer than w1.
    """
    if not isinstance(w1, WindowNode) or not isinstance(w2, WindowNode):
        raise ValueError("merge needs window nodes")
    m = len(w1.rows) - 1
    n = len(w2.rows) - 1
    if m < n or n < 1:
        raise ValueError("cannot merge these lengths")
    tail = WindowNode(w1.rows[m - n :], w1.subs[m - n :])
    if not is_continuation(w2, tail, ctx):
        raise ValueError("second window does not continue the first")
    return WindowNode(
        w1.rows[: m - n + 1] + w2.rows, w1.subs[: m - n + 1] + w2.subs
    )


def window_count_bound(d, levels):
    """Distinct-window count bound: s(0)=1, s(L)=d+d*s(L-1)."""
    if levels == 0:
        return 1
    return d + d * window_count_bound(d, levels - 1)


def mono_count_bound(d):
    """Single-modality distinct-window bound 2*d^(d+1); d must be >= 1."""
    if d < 1:
        raise ValueError("bound defined for depth >= 1")
    return 2 * d ** (d + 1)


@dataclass(frozen=True)
class ChiDescriptor:
    """Symbolic size of the window space for a set: exponential in a
    polynomial of the set size, plus its depth.  Never materialized."""

    size: int
    depth: int
    degree: int

    def describe(self):
        return "2^(size^%d) + %d with size=%d" % (self.degree, self.depth, self.size)


def chi_descriptor(u, pi):
    from .formula import set_size

    return ChiDescriptor(size=set_size(u), depth=set_depth(u), degree=pi + 2)
