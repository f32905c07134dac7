"""Relational models, density checking, and semantic oracles.

Worlds are strings, relations are indexed edge sets, valuations map atom
names to the worlds where they hold.  The density condition for index
bound pi: every index-i edge (i < pi) from s to t has a stopover z with
s ->_i z and z ->_{i+1} t.  The single-relation variant asks for a
stopover inside the same relation.
"""

import itertools
import random
from dataclasses import dataclass

from .ccs import box_minus
from .formula import And, Atom, Bottom, Box, Neg, set_depth, sf, sorted_set
from .window import EMPTY, EmptyWindow, WindowContext, WindowNode, canonical_key


class KripkeModel:
    def __init__(self, worlds, relations, valuation):
        self.worlds = tuple(worlds)
        seen = frozenset(self.worlds)
        self.world_set = seen
        if len(seen) != len(self.worlds):
            raise ValueError("duplicate world ids")
        self.relations = {}
        for i, edges in relations.items():
            edges = frozenset((a, b) for a, b in edges)
            for a, b in edges:
                if a not in seen or b not in seen:
                    raise ValueError("edge endpoint %r/%r not a world" % (a, b))
            self.relations[int(i)] = edges
        self.valuation = {}
        for name, hold in valuation.items():
            hold = frozenset(hold)
            if not hold <= seen:
                raise ValueError("valuation of %r mentions unknown worlds" % name)
            self.valuation[name] = hold
        self._succ = {}

    def rel(self, i):
        return self.relations.get(i, frozenset())

    def successors(self, i, w):
        key = (i, w)
        if key not in self._succ:
            self._succ[key] = tuple(
                sorted(b for a, b in self.rel(i) if a == w)
            )
        return self._succ[key]

    def to_dict(self):
        return {
            "worlds": sorted(self.worlds),
            "relations": {
                str(i): sorted([a, b] for a, b in self.relations[i])
                for i in sorted(self.relations)
            },
            "valuation": {
                name: sorted(self.valuation[name])
                for name in sorted(self.valuation)
            },
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["worlds"], d["relations"], d.get("valuation", {}))


@dataclass(frozen=True)
class DensityWitnessReport:
    """Edges lacking a stopover, as (index, source, target) triples.  An
    empty report means the model is dense."""

    violations: tuple

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok


def is_dense(model, pi):
    """Density report for index bound pi (indices 0..pi, checked below pi)."""
    bad = []
    for i in range(pi):
        ri = model.rel(i)
        rj = model.rel(i + 1)
        for s, t in sorted(ri):
            if not any((s, z) in ri and (z, t) in rj for z in model.worlds):
                bad.append((i, s, t))
    return DensityWitnessReport(tuple(bad))


def mono_density_report(model):
    """Single-relation density: every edge has a same-relation stopover."""
    r = model.rel(0)
    bad = []
    for s, t in sorted(r):
        if not any((s, z) in r and (z, t) in r for z in model.worlds):
            bad.append((0, s, t))
    return DensityWitnessReport(tuple(bad))


def model_check(model, x, f, _memo=None):
    """Truth of f at world x."""
    if _memo is None:
        if x not in model.world_set:
            raise ValueError("unknown world %r" % (x,))
        _memo = {}
    key = (x, f.key)
    hit = _memo.get(key)
    if hit is not None:
        return hit
    if isinstance(f, Atom):
        out = x in model.valuation.get(f.name, frozenset())
    elif isinstance(f, Bottom):
        out = False
    elif isinstance(f, Neg):
        out = not model_check(model, x, f.sub, _memo)
    elif isinstance(f, And):
        out = model_check(model, x, f.left, _memo) and model_check(
            model, x, f.right, _memo
        )
    elif isinstance(f, Box):
        out = all(
            model_check(model, y, f.sub, _memo)
            for y in model.successors(f.index, x)
        )
    else:
        raise TypeError("not a formula: %r" % (f,))
    _memo[key] = out
    return out


def _holds_all(model, x, fs, memo):
    return all(model_check(model, x, f, memo) for f in fs)


def sat_window(model, x, w, ctx, _memo=None):
    """Satisfaction of a window at a world: the owning set holds at x and
    a successor chain realizes the rows, each link also realizing its
    sub-window.  Empty windows are satisfied."""
    if isinstance(w, EmptyWindow):
        return True
    if _memo is None:
        _memo = {}
    mkey = (x, canonical_key(w), ctx.k, frozenset(ctx.u))
    hit = _memo.get(mkey)
    if hit is not None:
        return hit
    cmemo = {}
    k = 0 if ctx.mono else ctx.k
    k_up = 0 if ctx.mono else ctx.k + 1
    out = False
    if _holds_all(model, x, ctx.u, cmemo):
        n = len(w.rows) - 1
        rk = model.rel(k)
        rup = model.rel(k_up)

        def chain(i, y_prev):
            if i == n:
                return True
            for y in sorted(model.worlds):
                if (y, y_prev) not in rup or (x, y) not in rk:
                    continue
                if not _holds_all(model, y, w.rows[i + 1], cmemo):
                    continue
                sub_ctx = WindowContext(
                    u=w.rows[i + 1],
                    k=ctx.k + 1,
                    n=len(w.subs[i].rows) - 1
                    if isinstance(w.subs[i], WindowNode)
                    else 0,
                    pi=ctx.pi,
                    mono=ctx.mono,
                )
                if not sat_window(model, y, w.subs[i], sub_ctx, _memo):
                    continue
                if chain(i + 1, y):
                    return True
            return False

        for y0 in sorted(model.worlds):
            if (x, y0) in rk and _holds_all(model, y0, w.rows[0], cmemo):
                if chain(0, y0):
                    out = True
                    break
    _memo[mkey] = out
    return out


def build_window_from_model(model, x, y0, u, v0, k, n, pi=None, mono=False):
    """Construct a window for (u, v0) at level k out of a dense model.

    Requires (x, y0) in the level-k relation.  The stopover chain prefers
    already-used worlds so looping models yield looping rows.  Raises
    ValueError when a stopover is missing (the model is not dense enough).
    """
    if (not mono) and pi is not None and k == pi:
        return EMPTY
    k_lo = 0 if mono else k
    k_up = 0 if mono else k + 1
    if (x, y0) not in model.rel(k_lo):
        raise ValueError("y0 is not a level-%d successor of x" % k_lo)
    base = box_minus(k_lo, u)
    universe = sorted_set(sf(base))
    memo = {}

    ys = [y0]
    rows = [frozenset(v0)]
    for _ in range(n):
        prev = ys[-1]
        used = [z for z in ys if (x, z) in model.rel(k_lo) and (z, prev) in model.rel(k_up)]
        fresh = [
            z
            for z in sorted(model.worlds)
            if z not in ys
            and (x, z) in model.rel(k_lo)
            and (z, prev) in model.rel(k_up)
        ]
        if used:
            z = used[0]
        elif fresh:
            z = fresh[0]
        else:
            raise ValueError(
                "no stopover for (%s, %s) at level %d" % (x, prev, k_lo)
            )
        ys.append(z)
        rows.append(
            frozenset(g for g in universe if model_check(model, z, g, memo))
        )

    subs = []
    for i in range(n):
        subs.append(
            build_window_from_model(
                model,
                ys[i + 1],
                ys[i],
                rows[i + 1],
                rows[i],
                k + 1,
                set_depth(rows[i + 1]),
                pi=pi,
                mono=mono,
            )
        )
    return WindowNode(rows, subs)


def gen_dense_model(seed, pi, size, atoms=("p", "q", "r"), edge_prob=0.35, mono=False):
    """Random model that is dense by construction: relation 0 (and the
    only relation in mono mode) gets random edges; relations 1..pi are
    reflexive plus random edges, so the target itself is a stopover.  In
    mono mode the relation is reflexive, so the source is a stopover."""
    rng = random.Random(seed)
    worlds = ["w%d" % i for i in range(size)]
    relations = {}
    count = 1 if mono else pi + 1
    for i in range(count):
        edges = set()
        if i >= 1 or mono:
            edges |= {(w, w) for w in worlds}
        for a in worlds:
            for b in worlds:
                if rng.random() < edge_prob:
                    edges.add((a, b))
        relations[i] = edges
    valuation = {
        name: {w for w in worlds if rng.random() < 0.5} for name in atoms
    }
    model = KripkeModel(worlds, relations, valuation)
    report = mono_density_report(model) if mono else is_dense(model, pi)
    if not report.ok:
        raise AssertionError("generated model is not dense: %r" % (report,))
    return model


def _atom_names(f):
    out = set()
    work = [f]
    while work:
        g = work.pop()
        if isinstance(g, Atom):
            out.add(g.name)
        elif isinstance(g, Neg):
            work.append(g.sub)
        elif isinstance(g, And):
            work.extend((g.left, g.right))
        elif isinstance(g, Box):
            work.append(g.sub)
    return sorted(out)


def bounded_model_search(f, pi, max_size=3, mono=False):
    """Search for a dense model making f true at root w0, trying small
    sizes and sparse frames first.  Returns the model or None; None only
    means no model within the size bound."""
    atoms = _atom_names(f)
    indices = [0] if mono else list(range(pi + 1))
    for m in range(1, max_size + 1):
        worlds = ["w%d" % i for i in range(m)]
        pairs = [(a, b) for a in worlds for b in worlds]
        positions = [(i, a, b) for i in indices for (a, b) in pairs]
        perms = [
            dict(zip(worlds[1:], perm))
            for perm in itertools.permutations(worlds[1:])
        ]
        for count in range(len(positions) + 1):
            for chosen in itertools.combinations(range(len(positions)), count):
                if len(perms) > 1 and not _canonical_frame(chosen, positions, perms):
                    continue
                relations = {i: set() for i in indices}
                for idx in chosen:
                    i, a, b = positions[idx]
                    relations[i].add((a, b))
                probe = KripkeModel(worlds, relations, {})
                report = (
                    mono_density_report(probe) if mono else is_dense(probe, pi)
                )
                if not report.ok:
                    continue
                for assignment in _valuations(atoms, worlds):
                    model = KripkeModel(worlds, relations, assignment)
                    if model_check(model, "w0", f):
                        return model
    return None


def _world_subsets(worlds):
    for r in range(1, len(worlds) + 1):
        yield from itertools.combinations(worlds, r)


def _valuations(atoms, worlds):
    subsets = [()]
    subsets.extend(_world_subsets(worlds))
    for combo in itertools.product(subsets, repeat=len(atoms)):
        yield {name: frozenset(chosen) for name, chosen in zip(atoms, combo)}


def _canonical_frame(chosen, positions, perms):
    chosen_set = frozenset(positions[idx] for idx in chosen)
    index_of = {pos: i for i, pos in enumerate(positions)}
    mine = tuple(sorted(chosen))
    for perm in perms:
        mapped = tuple(
            sorted(
                index_of[(i, perm.get(a, a), perm.get(b, b))]
                for (i, a, b) in chosen_set
            )
        )
        if mapped < mine:
            return False
    return True


def disjoint_union(models):
    """Tagged union of one or more models; preserves density."""
    models = list(models)
    if not models:
        raise ValueError("need at least one model")
    worlds = []
    relations = {}
    valuation = {}
    for tag, model in enumerate(models):
        rename = {w: "%d:%s" % (tag, w) for w in model.worlds}
        worlds.extend(rename[w] for w in model.worlds)
        for i, edges in model.relations.items():
            relations.setdefault(i, set()).update(
                (rename[a], rename[b]) for a, b in edges
            )
        for name, hold in model.valuation.items():
            valuation.setdefault(name, set()).update(rename[w] for w in hold)
    return KripkeModel(worlds, relations, valuation)
