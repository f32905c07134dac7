"""Shared test utilities: reference oracles and instance generators.

The reference implementations here are deliberately naive.  They spell
out the defining conditions as literal filters over powersets, so the
tuned enumerators in the package have something independent to be
checked against.
"""

import itertools

import hypothesis.strategies as st

from pidense.ccs import box_minus, is_ccs, is_saturation_in
from pidense.formula import (
    atom,
    bot,
    box,
    conj,
    csf,
    neg,
    parse,
    random_formula,
    set_depth,
    sf,
    sorted_set,
)
from pidense.window import EMPTY, WindowContext, WindowNode, canonical_key, is_window


def formulas(pi=2, atoms=("p", "q", "r"), max_leaves=8):
    """Hypothesis strategy over core-form formulas."""
    leaves = st.sampled_from([atom(a) for a in atoms] + [bot()])
    return st.recursive(
        leaves,
        lambda kids: st.one_of(
            kids.map(neg),
            st.builds(conj, kids, kids),
            st.builds(box, st.integers(0, pi), kids),
        ),
        max_leaves=max_leaves,
    )


def formula_sets(pi=1, atoms=("p", "q"), max_size=3, csf_cap=12):
    """Strategy over small seed sets with a bounded classical closure."""
    return st.frozensets(
        formulas(pi=pi, atoms=atoms, max_leaves=5), min_size=1, max_size=max_size
    ).filter(lambda s: len(csf(s)) <= csf_cap)


def fs(*texts, pi=None, mono=False):
    """Parse several formula strings into a frozenset."""
    return frozenset(parse(t, pi=pi, mono=mono) for t in texts)


def f1(text, pi=None, mono=False):
    return parse(text, pi=pi, mono=mono)


def strs(s):
    from pidense.formula import to_str

    return [to_str(f) for f in sorted_set(s)]


def powerset_saturations(seed, universe):
    """Literal filter: every subset of universe that is a consistent
    saturated extension of seed."""
    seed = frozenset(seed)
    extra = [f for f in sorted_set(universe) if f not in seed]
    out = []
    for r in range(len(extra) + 1):
        for combo in itertools.combinations(extra, r):
            u = seed | frozenset(combo)
            if is_saturation_in(u, seed, universe):
                out.append(u)
    return out


def powerset_ccs(seed):
    """Reference for the ccs enumerator: filter the powerset of the
    classical closure."""
    seed = frozenset(seed)
    return powerset_saturations(seed, csf(seed))


def lift_index(f, i):
    """Rebuild f with every box carrying index i."""
    from pidense.formula import And, Atom, Bottom, Neg

    if isinstance(f, (Atom, Bottom)):
        return f
    if isinstance(f, Neg):
        return neg(lift_index(f.sub, i))
    if isinstance(f, And):
        return conj(lift_index(f.left, i), lift_index(f.right, i))
    return box(i, lift_index(f.sub, i))


def random_formula_set(rng, pi=1, nmax=3, depth=2, atoms=("p", "q"), csf_cap=12):
    """Small random seed set with a bounded classical closure."""
    while True:
        n = rng.randint(1, nmax)
        s = frozenset(
            random_formula(rng, max_depth=depth, pi=pi, atoms=atoms)
            for _ in range(n)
        )
        if len(csf(s)) <= csf_cap:
            return s


def canon(windows):
    return {canonical_key(w) for w in windows}


def _chain_tails(base, k, m):
    """Row tuples (row_1 .. row_m) assembled bottom-up from the row
    conditions, each position filtered through the literal powerset
    reference."""

    def rec(i):
        if i == m:
            for r in powerset_saturations(base, sf(base)):
                yield (r,)
            return
        for rest in rec(i + 1):
            seed = base | box_minus(k + 1, rest[0])
            for r in powerset_saturations(seed, sf(seed)):
                yield (r,) + rest

    yield from rec(1)


def _brute_subwindows(parent, row0, k1, pi):
    """Candidate sub-structures for (parent, row0) at level k1, filtered
    only by the validity predicate."""
    if k1 == pi:
        return [EMPTY]
    m = set_depth(parent)
    ctx = WindowContext(u=parent, k=k1, n=m, pi=pi)
    if m == 0:
        w = WindowNode((row0,), ())
        return [w] if is_window(w, ctx) else []
    out = []
    for tail in _chain_tails(box_minus(k1, parent), k1, m):
        rows = (row0,) + tail
        choices = [
            _brute_subwindows(rows[i + 1], rows[i], k1 + 1, pi) for i in range(m)
        ]
        for subs in itertools.product(*choices):
            w = WindowNode(rows, subs)
            if is_window(w, ctx):
                out.append(w)
    return out


def brute_windows(u, v0, k, pi):
    """Independent window enumeration: assemble every row and sub-window
    combination from powerset-filtered candidates and keep the ones the
    validity predicate accepts.  No generator shortcuts, no pruning."""
    n = set_depth(u)
    out = []
    if n == 0 or k >= pi:
        return out
    base = box_minus(k, u)
    ctx = WindowContext(u=u, k=k, n=n, pi=pi, v0_seed=v0 | base)
    uni0 = sf(v0 | base)
    for tail in _chain_tails(base, k, n):
        seed0 = v0 | base | box_minus(k + 1, tail[0])
        if not seed0 <= uni0:
            continue
        for r0 in powerset_saturations(seed0, uni0):
            rows = (r0,) + tail
            choices = [
                _brute_subwindows(rows[i + 1], rows[i], k + 1, pi)
                for i in range(n)
            ]
            for subs in itertools.product(*choices):
                w = WindowNode(rows, subs)
                if is_window(w, ctx):
                    out.append(w)
    return out
