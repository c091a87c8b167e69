"""Brute-force reference implementations, written independently of the package
internals and used to freeze computed values."""

import itertools


def naive_homs(M, r):
    """All maps r -> M that commute with every basic operation, by full search."""
    tuples = list(r.tuples)
    where = {t: i for i, t in enumerate(tuples)}
    ops = [(t.ndim, t) for t in M.tables.values()]
    out = []
    for vec in itertools.product(range(M.size), repeat=len(tuples)):
        ok = True
        for k, table in ops:
            for args in itertools.product(range(len(tuples)), repeat=k):
                image = tuple(int(table[tuple(tuples[a][j] for a in args)]) for j in range(r.arity))
                if image not in where:
                    return None          # r is not a subuniverse
                if vec[where[image]] != int(table[tuple(vec[a] for a in args)]):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(vec)
    return sorted(out)


def naive_clone(E, n):
    """All n-ary members of the partial clone, as tuples over the points of M^n
    (None where undefined), by naive composition to a fixpoint."""
    M = E.base
    points = list(itertools.product(range(M.size), repeat=n))
    ops = [(h.arity, h.table) for h in E.operations.values()]
    members = {tuple(p[i] for p in points) for i in range(n)}
    while True:
        new = set()
        for k, table in ops:
            for args in itertools.product(sorted(members, key=str), repeat=k):
                row = []
                for j in range(len(points)):
                    vals = tuple(a[j] for a in args)
                    row.append(None if None in vals else table.get(vals))
                new.add(tuple(row))
        if new <= members:
            return points, members
        members |= new


def naive_atomic_relations(E, n):
    """Every relation on M^n defined by one atom in n free variables."""
    points, members = naive_clone(E, n)
    members = sorted(members, key=str)
    out = set()
    for s in members:
        out.add(frozenset(p for p, v in zip(points, s) if v is not None))
        for t in members:
            out.add(frozenset(p for p, a, b in zip(points, s, t) if a is not None and a == b))
    for r in E.relations.values():
        rows = set(r.tuples)
        for args in itertools.product(members, repeat=r.arity):
            out.add(frozenset(p for j, p in enumerate(points)
                              if None not in (vals := tuple(a[j] for a in args)) and vals in rows))
    return points, out


def naive_is_cadef(E, r, atomic=None):
    points, atomic = atomic or naive_atomic_relations(E, r.arity)
    target = frozenset(r.tuples)
    hull = frozenset(points)
    for a in atomic:
        if target <= a:
            hull &= a
    return hull == target
