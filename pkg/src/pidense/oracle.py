"""Independent cross-checks: a plain tableau for the base modal logic,
a replayable theorem generator, and a differential runner.

The tableau works on its own tuple representation and shares no search
code with the main solver, so agreement between the two is evidence
rather than an echo."""

import itertools
import random
from dataclasses import dataclass

from .formula import (
    And,
    Atom,
    Bottom,
    Box,
    Neg,
    box,
    conj,
    implies,
    neg,
    random_formula,
    size,
    to_str,
    top,
)


def translate(f):
    """Formula to nested tuples, erasing the (single) modal index."""
    indices = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Box):
            indices.add(g.index)
            stack.append(g.sub)
        elif isinstance(g, Neg):
            stack.append(g.sub)
        elif isinstance(g, And):
            stack.append(g.left)
            stack.append(g.right)
    if len(indices) > 1:
        raise ValueError("tableau oracle needs a single modal index")

    def go(g):
        if isinstance(g, Atom):
            return ("atom", g.name)
        if isinstance(g, Bottom):
            return ("bot",)
        if isinstance(g, Neg):
            return ("not", go(g.sub))
        if isinstance(g, And):
            return ("and", go(g.left), go(g.right))
        if isinstance(g, Box):
            return ("box", go(g.sub))
        raise TypeError(g)

    return go(f)


_KSAT_MEMO = {}


def _ksat_set(fs):
    """Tableau satisfiability of a set of tuple formulas in plain K."""
    key = frozenset(fs)
    hit = _KSAT_MEMO.get(key)
    if hit is not None:
        return hit
    out = _expand(set(), list(key))
    _KSAT_MEMO[key] = out
    return out


def _expand(done, todo):
    while todo:
        f = todo.pop()
        if f in done:
            continue
        if f == ("bot",):
            return False
        if ("not", f) in done:
            return False
        if f[0] == "not" and f[1] in done:
            return False
        done.add(f)
        kind = f[0]
        if kind == "and":
            todo.append(f[1])
            todo.append(f[2])
        elif kind == "not":
            g = f[1]
            if g[0] == "not":
                todo.append(g[1])
            elif g[0] == "and":
                left = _expand(set(done), todo + [("not", g[1])])
                if left:
                    return True
                return _expand(set(done), todo + [("not", g[2])])
            # negated atoms, boxes, bot stay as they are
    boxed = [g[1] for g in done if g[0] == "box"]
    for g in done:
        if g[0] == "not" and g[1][0] == "box":
            jump = frozenset([("not", g[1][1])] + boxed)
            if not _ksat_set(jump):
                return False
    return True


def k_sat(f):
    """Satisfiability of a single-index formula in the base modal logic."""
    return _ksat_set(frozenset([translate(f)]))


def k_valid(f):
    return not k_sat(neg(f))


@dataclass(frozen=True)
class Step:
    rule: str
    formula: object
    refs: tuple = ()
    idx: object = None


@dataclass(frozen=True)
class Theorem:
    formula: object
    steps: tuple

    def __post_init__(self):
        if not self.steps or self.steps[-1].formula is not self.formula:
            raise ValueError("derivation must end at the stated formula")


def _split_implies(f):
    # implies(a, b) is stored as ~(a & ~b)
    if (
        isinstance(f, Neg)
        and isinstance(f.sub, And)
        and isinstance(f.sub.right, Neg)
    ):
        return f.sub.left, f.sub.right.sub
    return None


def _is_tautology(f):
    """Truth-table check treating boxed subformulas as opaque units."""
    units = []

    def scan(g):
        if isinstance(g, (Atom, Box)):
            if g not in units:
                units.append(g)
        elif isinstance(g, Neg):
            scan(g.sub)
        elif isinstance(g, And):
            scan(g.left)
            scan(g.right)

    scan(f)
    if len(units) > 20:
        raise ValueError("too many units for a truth table")

    def ev(g, val):
        if isinstance(g, Bottom):
            return False
        if isinstance(g, (Atom, Box)):
            return val[g.key]
        if isinstance(g, Neg):
            return not ev(g.sub, val)
        return ev(g.left, val) and ev(g.right, val)

    for bits in itertools.product((False, True), repeat=len(units)):
        val = {u.key: b for u, b in zip(units, bits)}
        if not ev(f, val):
            return False
    return True


def replay_theorem(t, mono=False):
    """Re-derive every step; True only if the whole derivation checks out."""
    try:
        for pos, step in enumerate(t.steps):
            if any(r >= pos or r < 0 for r in step.refs):
                return False
            f = step.formula
            if step.rule == "taut":
                if not _is_tautology(f):
                    return False
            elif step.rule == "boxtop":
                if not (isinstance(f, Box) and f.index == step.idx and f.sub is top()):
                    return False
            elif step.rule == "boxconj":
                parts = _split_implies(f)
                if parts is None:
                    return False
                ante, cons = parts
                ok = (
                    isinstance(ante, And)
                    and isinstance(ante.left, Box)
                    and isinstance(ante.right, Box)
                    and isinstance(cons, Box)
                    and ante.left.index == ante.right.index == cons.index == step.idx
                    and cons.sub is conj(ante.left.sub, ante.right.sub)
                )
                if not ok:
                    return False
            elif step.rule == "density":
                parts = _split_implies(f)
                if parts is None:
                    return False
                ante, cons = parts
                i, j = step.idx
                if not (j == i + 1 or (mono and i == j)):
                    return False
                ok = (
                    isinstance(ante, Box)
                    and ante.index == i
                    and isinstance(ante.sub, Box)
                    and ante.sub.index == j
                    and isinstance(cons, Box)
                    and cons.index == i
                    and cons.sub is ante.sub.sub
                )
                if not ok:
                    return False
            elif step.rule == "mp":
                r_ant, r_imp = step.refs
                parts = _split_implies(t.steps[r_imp].formula)
                if parts is None:
                    return False
                ante, cons = parts
                if t.steps[r_ant].formula is not ante or f is not cons:
                    return False
            elif step.rule == "mono":
                (r,) = step.refs
                prem = _split_implies(t.steps[r].formula)
                here = _split_implies(f)
                if prem is None or here is None:
                    return False
                a, b = prem
                ba, bb = here
                ok = (
                    isinstance(ba, Box)
                    and isinstance(bb, Box)
                    and ba.index == bb.index == step.idx
                    and ba.sub is a
                    and bb.sub is b
                )
                if not ok:
                    return False
            elif step.rule == "nec":
                (r,) = step.refs
                if f is not box(step.idx, t.steps[r].formula):
                    return False
            else:
                return False
        return t.steps[-1].formula is t.formula
    except (AttributeError, IndexError, TypeError, ValueError):
        return False


def _shift(steps, off):
    return tuple(
        Step(s.rule, s.formula, tuple(r + off for r in s.refs), s.idx)
        for s in steps
    )


def _axiom(rule, f, idx=None):
    return Theorem(f, (Step(rule, f, (), idx),))


def _mp(t_imp, t_ant):
    parts = _split_implies(t_imp.formula)
    if parts is None or parts[0] is not t_ant.formula:
        raise ValueError("modus ponens shape mismatch")
    steps = t_ant.steps + _shift(t_imp.steps, len(t_ant.steps))
    cons = parts[1]
    final = Step("mp", cons, (len(t_ant.steps) - 1, len(steps) - 1))
    return Theorem(cons, steps + (final,))


def _apply_mono(t, i):
    parts = _split_implies(t.formula)
    if parts is None:
        raise ValueError("monotony needs an implication")
    f = implies(box(i, parts[0]), box(i, parts[1]))
    return Theorem(f, t.steps + (Step("mono", f, (len(t.steps) - 1,), i),))


def _apply_nec(t, i):
    f = box(i, t.formula)
    return Theorem(f, t.steps + (Step("nec", f, (len(t.steps) - 1,), i),))


_CPL_SCHEMAS = (
    lambda a, b, c: implies(a, implies(b, a)),
    lambda a, b, c: implies(
        implies(a, implies(b, c)), implies(implies(a, b), implies(a, c))
    ),
    lambda a, b, c: implies(implies(neg(a), neg(b)), implies(b, a)),
    lambda a, b, c: implies(conj(a, b), a),
    lambda a, b, c: implies(conj(a, b), b),
    lambda a, b, c: implies(a, implies(b, conj(a, b))),
    lambda a, b, c: implies(a, a),
)


def gen_theorems(seed, count, cfg):
    """Derive `count` theorems with a seeded rng, density instances
    favored.  Every theorem is replayed before it is returned."""
    rng = random.Random(seed)
    mono = cfg.mono
    pi = 0 if mono else cfg.pi

    def small():
        return random_formula(rng, max_depth=1, pi=pi, atoms=("p", "q", "r"))

    def rand_idx():
        return rng.randint(0, pi)

    pool = []
    out = []
    while len(out) < count:
        roll = rng.random()
        t = None
        try:
            if roll < 0.30 and (mono or pi >= 1):
                if mono:
                    i, j = 0, 0
                else:
                    i = rng.randint(0, pi - 1)
                    j = i + 1
                a = small()
                t = _axiom(
                    "density", implies(box(i, box(j, a)), box(i, a)), (i, j)
                )
            elif roll < 0.42:
                i = rand_idx()
                a, b = small(), small()
                t = _axiom(
                    "boxconj",
                    implies(conj(box(i, a), box(i, b)), box(i, conj(a, b))),
                    i,
                )
            elif roll < 0.52:
                i = rand_idx()
                t = _axiom("boxtop", box(i, top()), i)
            elif roll < 0.70:
                schema = rng.choice(_CPL_SCHEMAS)
                t = _axiom("taut", schema(small(), small(), small()))
            elif roll < 0.80 and pool:
                base = rng.choice(pool)
                filler = small()
                bridge = _axiom(
                    "taut", implies(base.formula, implies(filler, base.formula))
                )
                t = _mp(bridge, base)
            elif roll < 0.90 and pool:
                cands = [p for p in pool if _split_implies(p.formula)]
                if cands:
                    t = _apply_mono(rng.choice(cands), rand_idx())
            elif pool:
                t = _apply_nec(rng.choice(pool), rand_idx())
        except ValueError:
            t = None
        if t is None or size(t.formula) > 150:
            schema = rng.choice(_CPL_SCHEMAS)
            t = _axiom("taut", schema(small(), small(), small()))
        if not replay_theorem(t, mono):
            raise AssertionError(
                "generated derivation failed replay: %s" % to_str(t.formula, mono)
            )
        pool.append(t)
        if len(pool) > 40:
            pool.pop(0)
        out.append(t)
    return out


def differential_run(corpus, cfg, oracle_fn=None, seed=None):
    """Solver vs oracle over a corpus; one record per formula."""
    from .solver import solve_sat

    if oracle_fn is None:
        oracle_fn = lambda f: "sat" if k_sat(f) else "unsat"
    records = []
    for i, f in enumerate(corpus):
        sv = solve_sat(f, cfg).result
        ov = oracle_fn(f)
        records.append(
            {
                "index": i,
                "formula": to_str(f, cfg.mono),
                "solver_verdict": sv,
                "oracle_verdict": ov,
                "agree": sv == ov,
                "seed": seed,
            }
        )
    return records
