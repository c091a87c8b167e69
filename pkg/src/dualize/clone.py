"""The partial clone generated by an alter ego, computed relative to a point set.

Composition commutes with restriction: restricting h(g1,...,gn) to a set D
gives h applied to the restrictions of the g_i.  So the restrictions of all
k-ary clone members to D are obtained by closing the restricted projections
under H directly on D.  A member whose restriction to D is empty can never
help extend anything defined on D and is dropped.  Computing on D = M^k gives
the clone members themselves.
"""

import itertools
from functools import lru_cache

import numpy as np

from .algebra import PartialOperation, hom_vectors
from .errors import BoundExceeded, InputError
from .syntax import App, Var

MEMBER_CAP = 50_000
COMBO_CAP = 20_000_000
DEFAULT_ARITY_CAP = 6


def _prefix_tables(table, U):
    """pref[j][a1..aj] is True iff (a1..aj) starts some tuple of the domain."""
    k = table.ndim
    dom = np.argwhere(table != U)
    out = []
    for j in range(k + 1):
        p = np.zeros((U + 1,) * j, dtype=bool)
        for t in dom:
            p[tuple(t[:j])] = True
        out.append(p)
    return out


def _compositions(table, A, old, U, need=None):
    """Yield (values, argument rows) for applications of `table` to rows of A
    using at least one row with index >= old; all-undefined results are skipped,
    as are results undefined somewhere on the `need` mask.

    Argument tuples are grown one position at a time and kept only while they
    agree with a prefix of some domain tuple at one point or more."""
    k = table.ndim
    m, D = A.shape
    if k == 0 or m == old:
        return
    pref = _prefix_tables(table, U)
    combos = np.zeros((1, 0), dtype=np.int64)
    alive = np.ones((1, D), dtype=bool)
    code = np.zeros((1, D), dtype=np.int64)
    for j in range(k):
        c = len(combos)
        if c * m * D > COMBO_CAP:
            raise BoundExceeded(f"clone closure on {D} points needs more than {COMBO_CAP} compositions")
        args = [A[combos[:, i]][:, None, :] for i in range(j)]
        nxt = np.broadcast_to(A[None, :, :], (c, m, D))
        idx = tuple(np.broadcast_to(a, (c, m, D)) for a in args) + (nxt,)
        ok = pref[j + 1][idx] & alive[:, None, :]
        keep = ok.any(axis=2)
        if need is not None:
            keep &= ok[:, :, need].all(axis=2)
        ci, ri = np.nonzero(keep)
        combos = np.concatenate([combos[ci], ri[:, None]], axis=1)
        alive = ok[ci, ri]
        code = np.where(alive, code[ci] * (U + 1) + A[ri], -1)
        if not len(combos):
            return
        # prefixes that agree on every live point have the same continuations
        fresh = (combos >= old).any(axis=1)
        state = np.concatenate([code, fresh[:, None].astype(np.int64)], axis=1)
        _, first = np.unique(state, axis=0, return_index=True)
        first.sort()
        combos, alive, code = combos[first], alive[first], code[first]
    fresh = (combos >= old).any(axis=1)
    combos, alive = combos[fresh], alive[fresh]
    if not len(combos):
        return
    vals = table[tuple(A[combos[:, i]] for i in range(k))]
    vals = np.where(alive, vals, U)
    uniq, first = np.unique(vals, axis=0, return_index=True)
    for f in np.sort(first):
        yield vals[f], [int(x) for x in combos[f]]


def var_names(k):
    return [f"v{i + 1}" for i in range(k)]


class RelativeClone:
    """Value vectors over `points` of the k-ary clone members, with terms.

    rows[i, p] is the value at points[p], or `undefined` (= |M|).  When
    `required` (a number of leading points) is given, only members defined at
    all of those points are kept; this loses nothing for questions about such
    members, since a term defined at a point has all its subterms defined there."""

    def __init__(self, ego, points, arity, names=None, cap=MEMBER_CAP, required=None):
        M = ego.base
        self.ego = ego
        self.points = tuple(tuple(p) for p in points)
        self.arity = arity
        self.undefined = U = M.size
        names = names or var_names(arity)
        D = len(self.points)
        pts = np.array(self.points, dtype=np.int64).reshape(D, arity)
        rows, terms = [], []
        keys = {}
        need = None
        if required:
            need = np.zeros(D, dtype=bool)
            need[:required] = True

        def add(row, term):
            if (row == U).all() or (need is not None and (row[need] == U).any()):
                return
            key = row.tobytes()
            if key not in keys:
                keys[key] = len(rows)
                rows.append(row)
                terms.append(term)

        for i in range(arity):
            add(pts[:, i].copy(), Var(names[i]))
        ops = []
        for sym, h in sorted(ego.operations.items()):
            table = np.full((U + 1,) * h.arity, U, dtype=np.int64)
            for args, v in h.items:
                table[args] = v
            if h.arity == 0:
                add(np.full(D, table[()], dtype=np.int64), App(sym, ()))
            else:
                ops.append((sym, table))

        old = 0
        while old < len(rows):
            m = len(rows)
            A = np.array(rows, dtype=np.int64).reshape(m, D)
            for sym, table in ops:
                for res, combo in _compositions(table, A, old, U, need):
                    key = res.tobytes()
                    if key in keys:
                        continue
                    add(res.copy(), App(sym, tuple(terms[c] for c in combo)))
                    if len(rows) > cap:
                        raise BoundExceeded(f"more than {cap} clone members on {D} points")
            old = m
        self.rows = np.array(rows, dtype=np.int64).reshape(len(rows), D)
        self.terms = terms
        self._index = keys

    def __len__(self):
        return len(self.terms)

    def find(self, values):
        """Term of a member with exactly this value vector, or None."""
        row = np.asarray(values, dtype=np.int64)
        i = self._index.get(row.tobytes())
        return None if i is None else self.terms[i]

    def total_rows(self):
        return np.flatnonzero((self.rows != self.undefined).all(axis=1))


@lru_cache(maxsize=4096)
def relative_clone(ego, points, arity, total=False):
    return RelativeClone(ego, points, arity, required=len(points) if total else None)


class PartialClone:
    """The k-ary members of clo(E), each with a provenance term."""

    def __init__(self, ego, arity, arity_cap=DEFAULT_ARITY_CAP):
        if arity < 0:
            raise InputError("arity must be non-negative")
        if arity > arity_cap:
            raise BoundExceeded(f"clone arity {arity} exceeds the cap {arity_cap}")
        M = ego.base
        points = tuple(itertools.product(range(M.size), repeat=arity))
        rc = relative_clone(ego, points, arity)
        self.ego = ego
        self.arity = arity
        self.members = []
        self.terms = list(rc.terms)
        for row in rc.rows:
            self.members.append(PartialOperation(
                M.carrier, arity, tuple((p, int(v)) for p, v in zip(points, row) if v != rc.undefined)))

    def __iter__(self):
        return iter(zip(self.members, self.terms))

    def __len__(self):
        return len(self.members)

    def __contains__(self, h):
        return h in self.members


def clone_members(ego, arity, arity_cap=DEFAULT_ARITY_CAP):
    return PartialClone(ego, arity, arity_cap).members


def extension_term(ego, h):
    """A clone term whose restriction to dom h is h, or None."""
    if h.carrier != ego.base.carrier:
        raise InputError("partial operation is over a different carrier")
    if not len(h):
        raise InputError("empty partial operations are not considered")
    rc = relative_clone(ego, h.domain.tuples, h.arity, total=True)
    return rc.find(h.values)


def extends_in_clone(ego, h):
    return extension_term(ego, h) is not None


def non_extending_homs(ego, r):
    """Homomorphisms r -> M (as partial operations) with no extension in the clone."""
    if r.carrier != ego.base.carrier:
        raise InputError("relation is over a different carrier")
    if not len(r):
        raise InputError("operational richness is not considered at empty relations")
    homs = hom_vectors(ego.base, r)
    cols = {r.column(i) for i in range(r.arity)}
    todo = [v for v in homs if v not in cols]
    if not todo:
        return []
    rc = relative_clone(ego, r.tuples, r.arity, total=True)
    return [PartialOperation.on_domain(r, v) for v in todo if rc.find(v) is None]


def op_rich_at(ego, r):
    return not non_extending_homs(ego, r)


def structural_reduct_failure(E1, E2):
    """First reason E1 is not a structural reduct of E2, or None."""
    from .definability import cadef_define

    if E1.base is not E2.base and E1.base.carrier != E2.base.carrier:
        raise InputError("alter egos over different algebras")
    for sym, h in sorted(E1.operations.items()):
        if not extends_in_clone(E2, h):
            return ("operation", sym, h)
    needed = [(sym, r) for sym, r in sorted(E1.relations.items())]
    needed += [(f"dom {sym}", h.domain) for sym, h in sorted(E1.operations.items())]
    for label, r in needed:
        if len(r) and cadef_define(E2, r) is None:
            return ("relation", label, r)
    return None


def is_structural_reduct(E1, E2):
    return structural_reduct_failure(E1, E2) is None


def structurally_equivalent(E1, E2):
    return is_structural_reduct(E1, E2) and is_structural_reduct(E2, E1)
