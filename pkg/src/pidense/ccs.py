"""Consistent classically-saturated sets (CCS) and their enumeration.

A CCS over a seed is a set u with seed <= u <= closure(seed) that contains
no direct contradiction, not bottom, and is saturated under the classical
rules: a conjunction in u has both conjuncts in u, a negated conjunction
has at least one negated conjunct in u, and a double negation has its body
in u.  The enumerators are generators so callers can stop at the first
useful candidate; unsatisfiable callers exhaust the stream.
"""

from .formula import And, Bottom, Box, Neg, csf, sorted_set


def box_minus(i, s):
    """Bodies of the index-i boxes in s."""
    return frozenset(f.sub for f in s if isinstance(f, Box) and f.index == i)


def is_consistent(u):
    """No bottom and no formula together with its negation."""
    for f in u:
        if isinstance(f, Bottom):
            return False
        if isinstance(f, Neg) and f.sub in u:
            return False
    return True


def is_saturated(u):
    """Closed under the three classical saturation rules."""
    for f in u:
        if isinstance(f, And):
            if f.left not in u or f.right not in u:
                return False
        elif isinstance(f, Neg):
            g = f.sub
            if isinstance(g, And):
                if Neg(g.left) not in u and Neg(g.right) not in u:
                    return False
            elif isinstance(g, Neg):
                if g.sub not in u:
                    return False
    return True


def is_saturation_in(u, seed, universe):
    """Consistent saturated set with seed <= u <= universe."""
    u = frozenset(u)
    return (
        frozenset(seed) <= u
        and u <= frozenset(universe)
        and is_consistent(u)
        and is_saturated(u)
    )


def is_ccs(u, seed):
    """CCS over seed: consistent, saturated, seed <= u <= csf(seed)."""
    return is_saturation_in(u, seed, csf(seed))


class _Search:
    """Backtracking enumerator for saturated consistent subsets.

    Membership constraints are propagated in both directions: putting a
    conjunction in forces its conjuncts in, dropping a conjunct forces
    every formula that needs it out, and a committed negated conjunction
    whose last open option disappears closes the branch.  Each leaf of the
    decision tree is a valid result, so the walk is bounded by the number
    of answers rather than by the subset lattice.
    """

    def __init__(self, seed, universe):
        self.order = sorted_set(universe)
        self.in_universe = frozenset(universe)
        self.requires = {}
        self.options = {}
        self.req_parents = {}
        self.opt_parents = {}
        for f in self.order:
            req = ()
            opts = None
            if isinstance(f, And):
                req = (f.left, f.right)
            elif isinstance(f, Neg):
                g = f.sub
                if isinstance(g, Neg):
                    req = (g.sub,)
                elif isinstance(g, And):
                    opts = tuple(
                        dict.fromkeys(
                            x
                            for x in (Neg(g.left), Neg(g.right))
                            if x in self.in_universe
                        )
                    )
            if req:
                self.requires[f] = req
                for g in req:
                    self.req_parents.setdefault(g, []).append(f)
            if opts is not None:
                self.options[f] = opts
                for g in opts:
                    self.opt_parents.setdefault(g, []).append(f)
        self.status = {}
        self.trail = []
        self.ok = True
        for f in self.order:
            if isinstance(f, Bottom):
                self.ok = self.ok and self.settle(f, False)
            if any(g not in self.in_universe for g in self.requires.get(f, ())):
                self.ok = self.ok and self.settle(f, False)
            if f in self.options and not self.options[f]:
                self.ok = self.ok and self.settle(f, False)
        for f in seed:
            self.ok = self.ok and self.settle(f, True)

    def settle(self, f0, val0):
        work = [(f0, val0)]
        status = self.status
        while work:
            f, val = work.pop()
            cur = status.get(f)
            if cur is not None:
                if cur != val:
                    return False
                continue
            if f not in self.in_universe:
                if val:
                    return False
                continue
            status[f] = val
            self.trail.append(f)
            if val:
                if isinstance(f, Bottom):
                    return False
                nf = Neg(f)
                if nf in self.in_universe:
                    work.append((nf, False))
                if isinstance(f, Neg) and f.sub in self.in_universe:
                    work.append((f.sub, False))
                for g in self.requires.get(f, ()):
                    work.append((g, True))
                opts = self.options.get(f)
                if opts is not None:
                    alive = [g for g in opts if status.get(g) is not False]
                    if not alive:
                        return False
                    if len(alive) == 1:
                        work.append((alive[0], True))
            else:
                for p in self.req_parents.get(f, ()):
                    work.append((p, False))
                for p in self.opt_parents.get(f, ()):
                    if status.get(p) is True:
                        alive = [
                            g
                            for g in self.options[p]
                            if g is not f and status.get(g) is not False
                        ]
                        if not alive:
                            return False
                        if len(alive) == 1:
                            work.append((alive[0], True))
        return True

    def undo(self, mark):
        while len(self.trail) > mark:
            del self.status[self.trail.pop()]

    def walk(self, i=0):
        order = self.order
        status = self.status
        while i < len(order) and order[i] in status:
            i += 1
        if i == len(order):
            yield frozenset(f for f in order if status[f])
            return
        f = order[i]
        mark = len(self.trail)
        if self.settle(f, False):
            yield from self.walk(i + 1)
        self.undo(mark)
        mark = len(self.trail)
        if self.settle(f, True):
            yield from self.walk(i + 1)
        self.undo(mark)


def enumerate_saturations(seed, universe, exhaustive=False):
    """Yield every consistent saturated u with seed <= u <= universe.

    The default mode walks a propagation-pruned decision tree over the
    universe, leanest choices first, deterministically.  Exhaustive mode
    is the reference powerset filter, ordered by cardinality then key
    tuples; both modes yield the same set of results.
    """
    seed = frozenset(seed)
    universe = frozenset(universe)
    if not seed <= universe:
        raise ValueError("seed must be contained in the universe")

    if exhaustive:
        import itertools

        optional = sorted_set(universe - seed)
        hits = []
        for r in range(len(optional) + 1):
            for extra in itertools.combinations(optional, r):
                u = seed | frozenset(extra)
                if is_consistent(u) and is_saturated(u):
                    hits.append(u)
        hits.sort(key=lambda u: (len(u), tuple(sorted(f.key for f in u))))
        yield from hits
        return

    search = _Search(seed, universe)
    if not search.ok:
        return
    yield from search.walk()


def enumerate_ccs(seed, exhaustive=False):
    """Stream of all CCS over seed (universe csf(seed))."""
    return enumerate_saturations(seed, csf(frozenset(seed)), exhaustive)


def ccs_satisfiable_reduction(s):
    """Candidates whose satisfiability decides satisfiability of s: s is
    satisfiable exactly when some yielded set is."""
    return enumerate_ccs(frozenset(s))
