"""Finite algebras, relations, partial operations and finite structures.

Elements are stored as indices into a declared carrier; names are only used
for input and display.  Homomorphism enumeration works from a generating set:
every map is determined by its values on generators, so each assignment of
generator values is pushed along a fixed derivation plan and then verified
against all operation tables at once with numpy.
"""

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import BoundExceeded, InputError

# largest array we are willing to materialize for one operation table
TABLE_CAP = 30_000_000


def _fmt_elem(x):
    return str(x)


def format_tuple(carrier, t):
    names = [_fmt_elem(carrier[i]) for i in t]
    if all(len(s) == 1 for s in names):
        return "".join(names) if names else "()"
    return "(" + ",".join(names) + ")"


@dataclass(frozen=True)
class Relation:
    """A set of index tuples over a carrier, kept sorted lexicographically."""

    carrier: tuple
    arity: int
    tuples: tuple = ()

    def __post_init__(self):
        n = len(self.carrier)
        rows = set()
        for t in self.tuples:
            t = tuple(int(x) for x in t)
            if len(t) != self.arity:
                raise InputError(f"tuple {t} does not have arity {self.arity}")
            if any(x < 0 or x >= n for x in t):
                raise InputError(f"tuple {t} leaves the carrier")
            rows.add(t)
        object.__setattr__(self, "carrier", tuple(self.carrier))
        object.__setattr__(self, "tuples", tuple(sorted(rows)))

    @classmethod
    def from_names(cls, carrier, arity, rows):
        pos = {e: i for i, e in enumerate(carrier)}
        try:
            return cls(tuple(carrier), arity, [tuple(pos[x] for x in row) for row in rows])
        except KeyError as exc:
            raise InputError(f"unknown element {exc.args[0]!r}") from None

    @classmethod
    def full(cls, carrier, arity):
        return cls(tuple(carrier), arity, itertools.product(range(len(carrier)), repeat=arity))

    @cached_property
    def members(self):
        return frozenset(self.tuples)

    @cached_property
    def array(self):
        return np.array(self.tuples, dtype=np.int64).reshape(len(self.tuples), self.arity)

    def named(self):
        return [tuple(self.carrier[i] for i in t) for t in self.tuples]

    def column(self, i):
        return tuple(t[i] for t in self.tuples)

    def project(self, coords):
        return Relation(self.carrier, len(coords), {tuple(t[c] for c in coords) for t in self.tuples})

    def __contains__(self, t):
        return tuple(t) in self.members

    def __len__(self):
        return len(self.tuples)

    def __iter__(self):
        return iter(self.tuples)

    def __le__(self, other):
        return self.arity == other.arity and self.members <= other.members

    def __and__(self, other):
        return Relation(self.carrier, self.arity, self.members & other.members)

    def __str__(self):
        return "{" + ", ".join(format_tuple(self.carrier, t) for t in self.tuples) + "}"


@dataclass(frozen=True)
class PartialOperation:
    """A map from a set of index tuples (its domain) to carrier indices."""

    carrier: tuple
    arity: int
    items: tuple = ()

    def __post_init__(self):
        n = len(self.carrier)
        table = {}
        for args, v in self.items:
            args = tuple(int(x) for x in args)
            if len(args) != self.arity or any(x < 0 or x >= n for x in args):
                raise InputError(f"bad argument tuple {args} for arity {self.arity}")
            if not 0 <= int(v) < n:
                raise InputError(f"value {v} leaves the carrier")
            if args in table and table[args] != int(v):
                raise InputError(f"two values for {args}")
            table[args] = int(v)
        object.__setattr__(self, "carrier", tuple(self.carrier))
        object.__setattr__(self, "items", tuple(sorted(table.items())))

    @classmethod
    def from_mapping(cls, carrier, arity, mapping):
        return cls(tuple(carrier), arity, tuple(mapping.items()))

    @classmethod
    def from_names(cls, carrier, arity, mapping):
        pos = {e: i for i, e in enumerate(carrier)}
        try:
            return cls(tuple(carrier), arity,
                       tuple((tuple(pos[x] for x in k), pos[v]) for k, v in mapping.items()))
        except KeyError as exc:
            raise InputError(f"unknown element {exc.args[0]!r}") from None

    @classmethod
    def on_domain(cls, domain, values):
        """Partial operation with the given domain, values listed in domain order."""
        return cls(domain.carrier, domain.arity, tuple(zip(domain.tuples, values)))

    @cached_property
    def table(self):
        return dict(self.items)

    @cached_property
    def domain(self):
        return Relation(self.carrier, self.arity, self.table.keys())

    @cached_property
    def graph(self):
        return Relation(self.carrier, self.arity + 1, [k + (v,) for k, v in self.items])

    @cached_property
    def values(self):
        """Value vector in the canonical order of the domain."""
        return tuple(v for _, v in self.items)

    def is_total(self):
        return len(self.items) == len(self.carrier) ** self.arity

    def __call__(self, *args):
        return self.table.get(tuple(args))

    def __len__(self):
        return len(self.items)

    def __str__(self):
        c = self.carrier
        return "{" + ", ".join(f"{format_tuple(c, k)}->{_fmt_elem(c[v])}" for k, v in self.items) + "}"


class FiniteAlgebra:
    """A finite carrier with total operation tables stored as numpy arrays."""

    def __init__(self, name, carrier, tables):
        self.name = name
        self.carrier = tuple(carrier)
        if len(set(self.carrier)) != len(self.carrier):
            raise InputError("carrier elements must be distinct")
        if not self.carrier:
            raise InputError("algebras have non-empty carriers")
        n = len(self.carrier)
        self.tables = {}
        for op, table in tables.items():
            arr = np.asarray(table, dtype=np.int64)
            if arr.shape != (n,) * arr.ndim:
                raise InputError(f"table of {op} is not total over the carrier")
            if arr.size and (arr.min() < 0 or arr.max() >= n):
                raise InputError(f"table of {op} leaves the carrier")
            self.tables[op] = arr
        self.index = {e: i for i, e in enumerate(self.carrier)}

    @classmethod
    def from_functions(cls, name, carrier, ops):
        """ops maps a name to (arity, function on element names)."""
        carrier = tuple(carrier)
        pos = {e: i for i, e in enumerate(carrier)}
        tables = {}
        for op, (k, fn) in ops.items():
            arr = np.zeros((len(carrier),) * k, dtype=np.int64)
            for args in itertools.product(range(len(carrier)), repeat=k):
                arr[args] = pos[fn(*(carrier[i] for i in args))]
            tables[op] = arr
        return cls(name, carrier, tables)

    @property
    def size(self):
        return len(self.carrier)

    def arity(self, op):
        return self.tables[op].ndim

    @property
    def signature(self):
        return {op: t.ndim for op, t in self.tables.items()}

    def apply(self, op, *args):
        return int(self.tables[op][tuple(args)])

    def __repr__(self):
        return f"FiniteAlgebra({self.name!r}, {len(self.carrier)} elements, ops={sorted(self.tables)})"


class FiniteStructure:
    """Carrier plus named relations and partial operations (no topology)."""

    def __init__(self, carrier, relations=None, operations=None, name=""):
        self.name = name
        self.carrier = tuple(carrier)
        self.relations = dict(relations or {})
        self.operations = dict(operations or {})
        for sym, r in self.relations.items():
            if r.carrier != self.carrier:
                raise InputError(f"relation {sym} lives on another carrier")
        for sym, h in self.operations.items():
            if h.carrier != self.carrier:
                raise InputError(f"operation {sym} lives on another carrier")
            if sym in self.relations:
                raise InputError(f"symbol {sym} used twice")
        self.index = {e: i for i, e in enumerate(self.carrier)}

    @property
    def size(self):
        return len(self.carrier)

    @property
    def signature(self):
        sig = {s: ("rel", r.arity) for s, r in self.relations.items()}
        sig.update({s: ("op", h.arity) for s, h in self.operations.items()})
        return sig

    def same_signature(self, other):
        return self.signature == other.signature

    def reduct(self, symbols):
        return FiniteStructure(
            self.carrier,
            {s: r for s, r in self.relations.items() if s in symbols},
            {s: h for s, h in self.operations.items() if s in symbols},
            self.name,
        )

    def __eq__(self, other):
        return (isinstance(other, FiniteStructure) and self.carrier == other.carrier
                and self.relations == other.relations and self.operations == other.operations)

    def __hash__(self):
        return hash((self.carrier, tuple(sorted(self.relations)), tuple(sorted(self.operations))))

    def __repr__(self):
        return f"FiniteStructure({self.name!r}, {self.size} elements, {self.signature})"


def _check_carrier(M, r):
    if r.carrier != M.carrier:
        raise InputError("relation is over a different carrier")


def _encode(rows, base):
    """Integer code of each row; code order agrees with lexicographic order."""
    rows = np.asarray(rows, dtype=np.int64)
    codes = np.zeros(rows.shape[:-1], dtype=np.int64)
    for j in range(rows.shape[-1]):
        codes = codes * base + rows[..., j]
    return codes


def _apply_all(table, rows):
    """Apply a k-ary table coordinatewise to every k-tuple of rows.

    Returns an array of shape (m,)*k + (n,)."""
    k = table.ndim
    m, n = rows.shape
    if m ** k * max(n, 1) > TABLE_CAP:
        raise BoundExceeded(f"operation table over {m} rows of arity {k} is too large")
    if k == 0:
        return np.full((n,), table[()], dtype=np.int64)
    args = [rows.reshape((1,) * j + (m,) + (1,) * (k - 1 - j) + (n,)) for j in range(k)]
    return table[tuple(args)]


def _subpower_tables(M, rows):
    """Operation tables (as row indices) of the subalgebra with the given sorted rows.

    Returns None if the rows are not closed under M."""
    rows = np.asarray(rows, dtype=np.int64).reshape(len(rows), -1) if len(rows) else np.zeros((0, 0), np.int64)
    codes = _encode(rows, M.size)
    out = {}
    for op, table in M.tables.items():
        images = _apply_all(table, rows)
        img_codes = _encode(images, M.size)
        pos = np.searchsorted(codes, img_codes)
        pos = np.minimum(pos, max(len(codes) - 1, 0))
        if len(codes) == 0:
            if table.ndim == 0:
                return None
            out[op] = np.zeros((0,) * table.ndim, dtype=np.int64)
            continue
        if not np.all(codes[pos] == img_codes):
            return None
        out[op] = pos
    return out


def _relation_rows(r):
    if r.arity == 0:
        return np.zeros((len(r), 0), dtype=np.int64)
    return r.array


def is_subuniverse(M, r):
    _check_carrier(M, r)
    return _subpower_tables(M, _relation_rows(r)) is not None


def subuniverse_closure(M, n, generators):
    rows = {tuple(int(x) for x in g) for g in generators}
    for g in rows:
        if len(g) != n or any(x < 0 or x >= M.size for x in g):
            raise InputError(f"generator {g} is not an {n}-tuple over the carrier")
    if n == 0:
        has_const = any(t.ndim == 0 for t in M.tables.values())
        return Relation(M.carrier, 0, [()] if rows or has_const else [])
    while True:
        arr = np.array(sorted(rows), dtype=np.int64).reshape(len(rows), n)
        new = set()
        for table in M.tables.values():
            images = _apply_all(table, arr).reshape(-1, n)
            if images.size:
                new.update(map(tuple, np.unique(images, axis=0).tolist()))
        if new <= rows:
            return Relation(M.carrier, n, rows)
        rows |= new


def _closure_mask(tables, size, mask):
    """Close a boolean membership mask under index tables."""
    mask = mask.copy()
    while True:
        idx = np.flatnonzero(mask)
        before = int(mask.sum())
        for t in tables:
            k = t.ndim
            if k == 0:
                mask[int(t)] = True
            elif len(idx):
                mask[t[np.ix_(*([idx] * k))].ravel()] = True
        if int(mask.sum()) == before:
            return mask


def _closure_plan(tables, known):
    """Extend a closed-under-nothing set to its closure, recording derivations.

    Returns the plan: (element, op name, argument elements) in derivation order.
    The boolean array `known` is updated in place."""
    plan = []
    while True:
        idx = np.flatnonzero(known)
        progressed = False
        for op, t in tables.items():
            k = t.ndim
            if k == 0:
                e = int(t)
                if not known[e]:
                    known[e] = True
                    plan.append((e, op, ()))
                    progressed = True
                continue
            if not len(idx):
                continue
            res = t[np.ix_(*([idx] * k))].ravel()
            fresh = ~known[res]
            if not fresh.any():
                continue
            vals, first = np.unique(res[fresh], return_index=True)
            flat_pos = np.flatnonzero(fresh)[first]
            for e, p in zip(vals.tolist(), flat_pos.tolist()):
                args = tuple(int(idx[i]) for i in np.unravel_index(p, (len(idx),) * k))
                plan.append((e, op, args))
                known[e] = True
            progressed = True
            break
        if not progressed:
            return plan


def _stages(tables, size):
    """Generators chosen greedily in index order, with one derivation stage each.

    Stage 0 holds what the constants generate.  Each stage records the plan for
    its new elements and the operation tables restricted to everything known so
    far, so partial assignments can be checked as soon as they are made."""
    known = np.zeros(size, dtype=bool)
    stages = []

    def record(gen):
        plan = _closure_plan(tables, known)
        idx = np.flatnonzero(known)
        sub = {op: (t if t.ndim == 0 else t[np.ix_(*([idx] * t.ndim))]) for op, t in tables.items()}
        stages.append((gen, plan, idx, sub))

    record(None)
    for a in range(size):
        if not known[a]:
            known[a] = True
            record(a)
    return stages


def _consistent(u, idx, sub, M):
    for op, t in sub.items():
        mt = M.tables[op]
        k = t.ndim
        if k == 0:
            if u[int(t)] != mt[()]:
                return False
            continue
        m = len(idx)
        if m == 0:
            continue
        v = u[idx]
        lhs = u[t]
        rhs = mt[tuple(v.reshape((1,) * j + (m,) + (1,) * (k - 1 - j)) for j in range(k))]
        if not np.array_equal(lhs, rhs):
            return False
    return True


def homs_from_tables(tables, size, M, limit=None):
    """All homomorphisms from an algebra given by index tables into M.

    Each is returned as a tuple of carrier indices; the list is sorted."""
    if size == 0:
        return [()] if all(t.ndim > 0 for t in tables.values()) else []
    stages = _stages(tables, size)
    mt = M.tables
    found = []
    u = np.zeros(size, dtype=np.int64)

    def run(i):
        gen, plan, idx, sub = stages[i]
        choices = range(M.size) if gen is not None else (None,)
        for val in choices:
            if gen is not None:
                u[gen] = val
            for e, op, args in plan:
                u[e] = mt[op][tuple(u[a] for a in args)]
            if not _consistent(u, idx, sub, M):
                continue
            if i + 1 == len(stages):
                found.append(tuple(u.tolist()))
                if limit is not None and len(found) > limit:
                    raise BoundExceeded(f"more than {limit} homomorphisms")
            else:
                run(i + 1)

    run(0)
    found.sort()
    return found


def hom_vectors(M, r):
    """Value vectors (over r's canonical tuple order) of all homs r -> M."""
    _check_carrier(M, r)
    tables = _subpower_tables(M, _relation_rows(r))
    if tables is None:
        raise InputError("relation is not a subuniverse")
    return homs_from_tables(tables, len(r), M)


def hom_set(M, r):
    return [PartialOperation.on_domain(r, v) for v in hom_vectors(M, r)]


def algebra_homs(A, B):
    """Homomorphisms between algebras of the same signature, as index tuples."""
    if A.signature != B.signature:
        raise InputError("algebras have different signatures")
    return homs_from_tables(A.tables, A.size, B)


def subpower_algebra(M, r, name=None):
    """The subalgebra of M^n carried by a compatible relation r."""
    tables = _subpower_tables(M, _relation_rows(r))
    if tables is None:
        raise InputError("relation is not a subuniverse")
    carrier = [tuple(M.carrier[i] for i in t) for t in r.tuples]
    if r.arity == 1:
        carrier = [c[0] for c in carrier]
    if not carrier:
        raise InputError("empty subuniverse does not carry an algebra")
    return FiniteAlgebra(name or f"{M.name}^{r.arity}", carrier, tables)


def power_point_tables(M, n):
    """Operation tables of M^n with points indexed in lexicographic order."""
    return _power_point_tables(M, n)


@lru_cache(maxsize=None)
def _power_point_tables(M, n):
    points = np.array(list(itertools.product(range(M.size), repeat=n)), dtype=np.int64).reshape(-1, n)
    out = {}
    for op, table in M.tables.items():
        images = _apply_all(table, points)
        out[op] = _encode(images, M.size) if n else np.zeros(images.shape[:-1], dtype=np.int64)
    return points, out


@lru_cache(maxsize=None)
def _all_subuniverse_masks(M, n, cap):
    points, tables = power_point_tables(M, n)
    N = len(points)
    tabs = list(tables.values())
    bottom = _closure_mask(tabs, N, np.zeros(N, dtype=bool))
    seen = {bottom.tobytes(): bottom}
    queue = [bottom]
    while queue:
        S = queue.pop()
        for p in np.flatnonzero(~S):
            m = S.copy()
            m[p] = True
            c = _closure_mask(tabs, N, m)
            key = c.tobytes()
            if key not in seen:
                seen[key] = c
                queue.append(c)
                if len(seen) > cap:
                    raise BoundExceeded(f"more than {cap} subuniverses of the power {n}")
    return tuple(sorted(seen.values(), key=lambda m: (int(m.sum()), m.tobytes())))


def all_subuniverses(M, n, cap=200_000):
    """Every subuniverse of M^n (including the empty one if there are no constants)."""
    points, _ = power_point_tables(M, n)
    out = []
    for mask in _all_subuniverse_masks(M, n, cap):
        out.append(Relation(M.carrier, n, map(tuple, points[mask].tolist())))
    return out


def build_power(X, k):
    if k < 1:
        raise InputError("only non-zero powers are allowed")
    if k == 1:
        return X
    pts = list(itertools.product(range(X.size), repeat=k))
    pos = {p: i for i, p in enumerate(pts)}
    carrier = tuple(tuple(X.carrier[i] for i in p) for p in pts)

    def lift(rows, arity):
        # combine one row per coordinate into a tuple of power points
        out = []
        for combo in itertools.product(rows, repeat=k):
            out.append(tuple(pos[tuple(combo[c][j] for c in range(k))] for j in range(arity)))
        return out

    rels = {s: Relation(carrier, r.arity, lift(r.tuples, r.arity)) for s, r in X.relations.items()}
    ops = {}
    for s, h in X.operations.items():
        items = {}
        for combo in itertools.product(h.items, repeat=k):
            args = tuple(pos[tuple(combo[c][0][j] for c in range(k))] for j in range(h.arity))
            items[args] = pos[tuple(combo[c][1] for c in range(k))]
        ops[s] = PartialOperation(carrier, h.arity, tuple(items.items()))
    return FiniteStructure(carrier, rels, ops, name=f"{X.name}^{k}")


def is_closed_subset(X, subset):
    """Whether a set of element indices is closed under X's partial operations."""
    sub = set(subset)
    for h in X.operations.values():
        for args, v in h.items:
            if v not in sub and all(a in sub for a in args):
                return False
    return True


def substructure(X, subset):
    """Induced substructure on a subset of element indices (must be closed)."""
    keep = sorted(set(subset))
    if not is_closed_subset(X, keep):
        raise InputError("subset is not closed under the partial operations")
    new = {old: i for i, old in enumerate(keep)}
    carrier = tuple(X.carrier[i] for i in keep)
    rels = {s: Relation(carrier, r.arity, [tuple(new[x] for x in t) for t in r.tuples
                                            if all(x in new for x in t)])
            for s, r in X.relations.items()}
    ops = {s: PartialOperation(carrier, h.arity,
                               tuple((tuple(new[x] for x in a), new[v]) for a, v in h.items
                                     if all(x in new for x in a)))
           for s, h in X.operations.items()}
    return FiniteStructure(carrier, rels, ops, name=X.name)


def closed_subsets(X):
    """All subsets of X closed under its partial operations, as sorted index tuples."""
    out = []
    for bits in range(1 << X.size):
        sub = [i for i in range(X.size) if bits >> i & 1]
        if is_closed_subset(X, sub):
            out.append(tuple(sub))
    out.sort(key=lambda s: (len(s), s))
    return out


def structure_homs(X, Y, limit=None):
    """All structure morphisms X -> Y as index tuples, sorted lexicographically."""
    if X.signature != Y.signature:
        raise InputError("structures have different signatures")
    n = X.size
    # constraints keyed by the largest element they mention
    rel_checks = [[] for _ in range(n + 1)]
    op_checks = [[] for _ in range(n + 1)]
    for s, r in X.relations.items():
        target = Y.relations[s].members
        for t in r.tuples:
            rel_checks[max(t, default=-1) + 1].append((t, target))
    for s, h in X.operations.items():
        target = Y.operations[s].table
        for args, v in h.items:
            op_checks[max(args + (v,)) + 1].append((args, v, target))
    u = [0] * n
    out = []

    def ok(level):
        for t, target in rel_checks[level]:
            if tuple(u[x] for x in t) not in target:
                return False
        for args, v, target in op_checks[level]:
            if target.get(tuple(u[x] for x in args)) != u[v]:
                return False
        return True

    if not ok(0):
        return []

    def search(i):
        if i == n:
            out.append(tuple(u))
            if limit is not None and len(out) > limit:
                raise BoundExceeded(f"more than {limit} morphisms")
            return
        for y in range(Y.size):
            u[i] = y
            if ok(i + 1):
                search(i + 1)

    search(0)
    return out
