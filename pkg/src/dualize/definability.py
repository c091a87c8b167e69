"""Alter egos, hom-minimality, hat relations and conjunct-atomic definability.

Definability test: a relation r is conjunct-atomic definable iff every tuple
outside r is cut off by some atomic formula that is true on all of r.  Whether
such an atom exists for a given outside tuple a is decided exactly by the
clone restricted to r + {a}: atoms only see the values of their terms on those
points.  The search walks the outside tuples in canonical order, picks for the
first survivor the separating atom that removes the most remaining outside
tuples, and repeats.  The resulting conjunction is then thinned greedily.
"""

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .algebra import (FiniteStructure, PartialOperation, Relation, all_subuniverses,
                      hom_vectors, is_subuniverse)
from .clone import RelativeClone
from .errors import BoundExceeded, InputError, PreconditionFailure
from .syntax import ArrayInterpretation, Eq, Rel, term_size

POINT_CAP = 3_000_000
CANDIDATE_ATOMS = 400


class AlterEgo:
    """Compatible partial operations H and relations R on the carrier of `base`."""

    def __init__(self, name, base, operations=None, relations=None, check=True):
        self.name = name
        self.base = base
        self.operations = dict(operations or {})
        self.relations = dict(relations or {})
        for sym, h in self.operations.items():
            if h.carrier != base.carrier:
                raise InputError(f"{sym} is not over the carrier of {base.name}")
            if check and not is_subuniverse(base, h.graph):
                raise InputError(f"{sym} is not compatible with {base.name}")
        for sym, r in self.relations.items():
            if r.carrier != base.carrier:
                raise InputError(f"{sym} is not over the carrier of {base.name}")
            if sym in self.operations:
                raise InputError(f"symbol {sym} used twice")
            if check and not is_subuniverse(base, r):
                raise InputError(f"{sym} is not compatible with {base.name}")
        self._structure = None

    @property
    def carrier(self):
        return self.base.carrier

    @property
    def signature(self):
        return self.as_structure().signature

    def as_structure(self):
        if self._structure is None:
            self._structure = FiniteStructure(self.base.carrier, self.relations, self.operations,
                                              name=self.name)
        return self._structure

    def extended(self, name, operations=None, relations=None):
        ops = dict(self.operations)
        ops.update(operations or {})
        rels = dict(self.relations)
        rels.update(relations or {})
        return AlterEgo(name, self.base, ops, rels)

    def interpretation(self, sym):
        if sym in self.operations:
            return self.operations[sym]
        return self.relations[sym]

    def __repr__(self):
        return (f"AlterEgo({self.name!r} over {self.base.name}, H={sorted(self.operations)}, "
                f"R={sorted(self.relations)})")


@dataclass(frozen=True)
class ConjunctAtomicFormula:
    """A conjunction of atoms over the listed free variables."""

    variables: tuple
    atoms: tuple = ()

    def __str__(self):
        return " & ".join(map(str, self.atoms)) if self.atoms else "true"

    def solutions(self, ego):
        return _solution_relation(ego, self.variables, self.atoms)


@dataclass(frozen=True)
class ExistsFormula:
    """A primitive-positive formula: some variables are existentially bound."""

    free: tuple
    bound: tuple
    atoms: tuple = ()

    def __str__(self):
        body = " & ".join(map(str, self.atoms)) if self.atoms else "true"
        if not self.bound:
            return body
        return f"exists {' '.join(self.bound)} : {body}"

    def solutions(self, ego):
        full = _solution_relation(ego, self.free + self.bound, self.atoms)
        return full.project(range(len(self.free)))


def _points(M, n):
    if M.size ** n > POINT_CAP:
        raise BoundExceeded(f"{M.size}^{n} points exceed the cap")
    return np.array(list(itertools.product(range(M.size), repeat=n)), dtype=np.int64).reshape(-1, n)


def _columns(names, pts):
    return {v: pts[:, i] for i, v in enumerate(names)}


def _solution_relation(ego, names, atoms):
    M = ego.base
    pts = _points(M, len(names))
    interp = _interp(ego)
    mask = np.ones(len(pts), dtype=bool)
    cols = _columns(names, pts)
    for a in atoms:
        mask &= interp.atom(a, cols)
    return Relation(M.carrier, len(names), map(tuple, pts[mask].tolist()))


def _interp(ego):
    cached = getattr(ego, "_interp", None)
    if cached is None:
        cached = ArrayInterpretation(ego.as_structure())
        ego._interp = cached
    return cached


@lru_cache(maxsize=None)
def endomorphisms(M):
    return hom_vectors(M, Relation.full(M.carrier, 1))


def _check_nonempty_compatible(M, r):
    if r.carrier != M.carrier:
        raise InputError("relation is over a different carrier")
    if not len(r):
        raise InputError("empty relations are not considered here")
    if not is_subuniverse(M, r):
        raise InputError("relation is not a subuniverse")


def is_hom_minimal(M, r, check=True):
    if check:
        _check_nonempty_compatible(M, r)
    cols = {r.column(i) for i in range(r.arity)}
    # endomorphisms after projections are homs; reject cheaply first
    for e in endomorphisms(M):
        for c in cols:
            if tuple(e[x] for x in c) not in cols:
                return False
    return all(v in cols for v in hom_vectors(M, r))


@lru_cache(maxsize=None)
def _hom_minimal_cached(M, max_arity):
    out = []
    for k in range(1, max_arity + 1):
        for r in all_subuniverses(M, k):
            if len(r) and is_hom_minimal(M, r, check=False):
                out.append(r)
    return tuple(out)


def hom_minimal_relations(M, max_arity):
    if max_arity < 1:
        raise InputError("arity bound must be at least 1")
    return list(_hom_minimal_cached(M, max_arity))


def hat_relation(M, r):
    _check_nonempty_compatible(M, r)
    homs = hom_vectors(M, r)
    rows = [t + tuple(h[i] for h in homs) for i, t in enumerate(r.tuples)]
    return Relation(M.carrier, r.arity + len(homs), rows)


def _separating_atoms(ego, r, a, names):
    """Atoms true on every tuple of r and false at a (a is outside r)."""
    rc = RelativeClone(ego, r.tuples + (tuple(a),), r.arity, names, required=len(r))
    U = rc.undefined
    rows = rc.rows
    on_r = rows[:, :-1]
    at_a = rows[:, -1]
    total = np.flatnonzero((on_r != U).all(axis=1))
    found = []
    groups = {}
    for i in total.tolist():
        groups.setdefault(on_r[i].tobytes(), []).append(i)
    for members in groups.values():
        by_value = {}
        for i in members:
            by_value.setdefault(int(at_a[i]), i)
        reps = sorted(by_value.items())
        for v, i in reps:
            if v == U:
                found.append(Eq(rc.terms[i], rc.terms[i]))
        for (v, i), (w, j) in itertools.combinations(reps, 2):
            found.append(Eq(rc.terms[i], rc.terms[j]))
    for sym, rel in sorted(ego.relations.items()):
        k = rel.arity
        if k == 0:
            continue
        prefixes = [set(t[:j] for t in rel.tuples) for j in range(k + 1)]
        cand = total.tolist()

        def extend(chosen):
            j = len(chosen)
            if j == k:
                at = tuple(int(at_a[i]) for i in chosen)
                if at not in rel.members:
                    found.append(Rel(sym, tuple(rc.terms[i] for i in chosen)))
                return
            for i in cand:
                nxt = chosen + [i]
                if all(tuple(int(on_r[c, p]) for c in nxt) in prefixes[j + 1]
                       for p in range(on_r.shape[1])):
                    extend(nxt)
                    if len(found) > 4 * CANDIDATE_ATOMS:
                        return

        extend([])
    found.sort(key=_atom_weight)
    return found[:CANDIDATE_ATOMS]


def _atom_weight(atom):
    if isinstance(atom, Eq):
        return term_size(atom.left) + term_size(atom.right)
    return 1 + sum(term_size(t) for t in atom.args)


@lru_cache(maxsize=20_000)
def cadef_define(ego, r):
    """A conjunct-atomic formula defining r in the ego, or None."""
    M = ego.base
    if r.carrier != M.carrier:
        raise InputError("relation is over a different carrier")
    if not len(r):
        raise InputError("empty relations are not considered here")
    n = r.arity
    names = tuple(f"v{i + 1}" for i in range(n))
    pts = _points(M, n)
    inside = np.zeros(len(pts), dtype=bool)
    base = M.size
    codes = np.zeros(len(pts), dtype=np.int64)
    for j in range(n):
        codes = codes * base + pts[:, j]
    r_codes = np.array([sum(x * base ** (n - 1 - j) for j, x in enumerate(t)) for t in r.tuples],
                       dtype=np.int64)
    inside[np.searchsorted(codes, r_codes)] = True
    interp = _interp(ego)
    outside = np.flatnonzero(~inside)
    atoms = []
    while len(outside):
        a = pts[outside[0]]
        cands = _separating_atoms(ego, r, a, names)
        if not cands:
            return None
        cols = _columns(names, pts[outside])
        best, best_kill = None, -1
        for atom in cands:
            kill = int((~interp.atom(atom, cols)).sum())
            if kill > best_kill:
                best, best_kill = atom, kill
        atoms.append(best)
        outside = outside[interp.atom(best, cols)]
    # greedy thinning; keep the solution set equal to r
    cols = _columns(names, pts)
    masks = [interp.atom(x, cols) for x in atoms]
    keep = list(range(len(atoms)))
    for i in range(len(atoms)):
        trial = [j for j in keep if j != i]
        mask = np.ones(len(pts), dtype=bool)
        for j in trial:
            mask &= masks[j]
        if np.array_equal(mask, inside):
            keep = trial
    formula = ConjunctAtomicFormula(names, tuple(atoms[j] for j in keep))
    assert formula.solutions(ego) == r
    return formula


def cadef_failure_point(ego, r):
    """A tuple outside r satisfying every atom that holds throughout r, or None.

    Such a tuple exists exactly when r is not conjunct-atomic definable."""
    M = ego.base
    names = tuple(f"v{i + 1}" for i in range(r.arity))
    inside = set(r.tuples)
    for a in _points(M, r.arity).tolist():
        if tuple(a) not in inside and not _separating_atoms(ego, r, tuple(a), names):
            return tuple(a)
    return None


def is_cadef(ego, r):
    return cadef_define(ego, r) is not None


@dataclass(frozen=True)
class BetaEntry:
    """Formulas defining r and its hat relation in an ego."""

    relation: Relation
    hat: Relation
    hat_formula: ConjunctAtomicFormula
    beta: ExistsFormula

    @property
    def arity(self):
        return self.relation.arity

    @property
    def extra(self):
        return self.hat.arity - self.relation.arity


@lru_cache(maxsize=None)
def beta_formulas(ego, r):
    hat = hat_relation(ego.base, r)
    core = cadef_define(ego, hat)
    if core is None:
        raise PreconditionFailure(f"hat relation of {r} is not conjunct-atomic definable in {ego.name}",
                                  witness=hat)
    n = r.arity
    beta = ExistsFormula(core.variables[:n], core.variables[n:], core.atoms)
    entry = BetaEntry(r, hat, core, beta)
    assert beta.solutions(ego) == r
    return entry


def bijective_projection(r, s):
    """Coordinates theta (0-based) with s -> r, a |-> (a[theta[0]], ...), bijective."""
    if r.carrier != s.carrier:
        raise InputError("relations over different carriers")
    if len(r) != len(s):
        return None
    k = r.arity
    targets = [set(t[:j] for t in r.tuples) for j in range(k + 1)]
    theta = []

    def search(j):
        if j == k:
            return {tuple(t[c] for c in theta) for t in s.tuples} == r.members
        for i in range(s.arity):
            theta.append(i)
            if {tuple(t[c] for c in theta) for t in s.tuples} == targets[j + 1] and search(j + 1):
                return True
            theta.pop()
        return False

    return tuple(theta) if search(0) else None


def injective_coordinate_sets(r):
    """Minimum-size coordinate sets on which the projection of r is one-to-one.

    Ordered by preference for later coordinates."""
    for size in range(r.arity + 1):
        found = []
        for coords in itertools.combinations(range(r.arity), size):
            if len({tuple(t[c] for c in coords) for t in r.tuples}) == len(r):
                found.append(coords)
        if found:
            return sorted(found, key=lambda c: tuple(reversed(c)), reverse=True)
    return []


def compatible_operations_on(M, r, include_projections=False):
    """All compatible partial operations with domain r."""
    cols = {r.column(i) for i in range(r.arity)}
    return [PartialOperation.on_domain(r, v) for v in hom_vectors(M, r)
            if include_projections or v not in cols]


def _intersection_closure(masks, npoints):
    """All intersections of the given bitmasks (including the full mask)."""
    full = (1 << npoints) - 1
    atoms = sorted(set(masks))
    seen = {full}
    queue = [full]
    while queue:
        cur = queue.pop()
        for a in atoms:
            m = cur & a
            if m not in seen:
                seen.add(m)
                queue.append(m)
    return seen


def _mask_bits(flags):
    return int("".join("1" if x else "0" for x in reversed(flags.tolist())) or "0", 2)


def _relations_from_masks(M, k, pts, masks):
    out = []
    for m in _intersection_closure(masks, len(pts)):
        if m:
            rows = [tuple(pts[i].tolist()) for i in range(len(pts)) if m >> i & 1]
            out.append(Relation(M.carrier, k, rows))
    return out


def relational_closure(M, relations, n):
    """All non-empty relations of arity <= n conjunct-atomic definable from `relations`.

    Only relation atoms with variable arguments and variable equations are
    available, so each arity is an intersection closure of finitely many sets."""
    out = []
    for k in range(1, n + 1):
        pts = _points(M, k)
        masks = [_mask_bits(pts[:, x] == pts[:, y]) for x, y in itertools.combinations(range(k), 2)]
        for s in relations:
            table = np.zeros((M.size,) * s.arity, dtype=bool)
            for t in s.tuples:
                table[t] = True
            for idx in itertools.product(range(k), repeat=s.arity):
                masks.append(_mask_bits(table[tuple(pts[:, i] for i in idx)]))
        out += _relations_from_masks(M, k, pts, masks)
    out.sort(key=lambda r: (r.arity, len(r), r.tuples))
    return out


def cadef_relations(ego, n):
    """All non-empty relations of arity <= n conjunct-atomic definable in the ego.

    Atoms over k variables only see the k-ary clone members, so the definable
    k-ary relations are the intersections of the sets those atoms cut out."""
    M = ego.base
    out = []
    for k in range(1, n + 1):
        pts = _points(M, k)
        rc = RelativeClone(ego, tuple(map(tuple, pts.tolist())), k)
        rows, U = rc.rows, rc.undefined
        defined = rows != U
        masks = [_mask_bits(d) for d in defined]
        for i, j in itertools.combinations(range(len(rows)), 2):
            masks.append(_mask_bits((rows[i] == rows[j]) & defined[i]))
        for sym, rel in sorted(ego.relations.items()):
            table = np.zeros((M.size + 1,) * rel.arity, dtype=bool)
            for t in rel.tuples:
                table[t] = True
            for combo in itertools.product(range(len(rows)), repeat=rel.arity):
                masks.append(_mask_bits(table[tuple(rows[c] for c in combo)]))
        out += _relations_from_masks(M, k, pts, masks)
    out.sort(key=lambda r: (r.arity, len(r), r.tuples))
    return out
