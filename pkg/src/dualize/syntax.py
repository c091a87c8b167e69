"""Terms, atomic formulas and their evaluation over finite structures."""

from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App:
    symbol: str
    args: tuple = ()

    def __str__(self):
        return f"{self.symbol}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class Eq:
    left: object
    right: object

    def __str__(self):
        if self.left == self.right and isinstance(self.left, App):
            return f"def {self.left}"
        return f"{self.left}={self.right}"


@dataclass(frozen=True)
class Rel:
    symbol: str
    args: tuple = ()

    def __str__(self):
        return f"{self.symbol}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class Bottom:
    def __str__(self):
        return "false"


BOTTOM = Bottom()


def is_var(t):
    return isinstance(t, Var)


def term_vars(t, acc=None):
    acc = [] if acc is None else acc
    if isinstance(t, Var):
        if t.name not in acc:
            acc.append(t.name)
    else:
        for a in t.args:
            term_vars(a, acc)
    return acc


def atom_vars(atom, acc=None):
    acc = [] if acc is None else acc
    if isinstance(atom, Eq):
        term_vars(atom.left, acc)
        term_vars(atom.right, acc)
    elif isinstance(atom, Rel):
        for a in atom.args:
            term_vars(a, acc)
    return acc


def term_size(t):
    return 1 if isinstance(t, Var) else 1 + sum(term_size(a) for a in t.args)


def subst_term(t, mapping):
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    return App(t.symbol, tuple(subst_term(a, mapping) for a in t.args))


def subst_atom(atom, mapping):
    """Substitute terms for variable names (mapping: name -> term)."""
    if isinstance(atom, Eq):
        return Eq(subst_term(atom.left, mapping), subst_term(atom.right, mapping))
    if isinstance(atom, Rel):
        return Rel(atom.symbol, tuple(subst_term(a, mapping) for a in atom.args))
    return atom


def rename_atom(atom, names):
    return subst_atom(atom, {a: Var(b) for a, b in names.items()})


def atom_symbols(atom, acc=None):
    acc = set() if acc is None else acc

    def walk(t):
        if isinstance(t, App):
            acc.add(("op", t.symbol, len(t.args)))
            for a in t.args:
                walk(a)

    if isinstance(atom, Eq):
        walk(atom.left)
        walk(atom.right)
    elif isinstance(atom, Rel):
        acc.add(("rel", atom.symbol, len(atom.args)))
        for a in atom.args:
            walk(a)
    return acc


def check_signature(atoms, signature):
    """Raise InputError if an atom uses a symbol missing from the signature."""
    for atom in atoms:
        for kind, sym, k in atom_symbols(atom):
            if sym not in signature:
                raise InputError(f"unknown symbol {sym}")
            if signature[sym] != (kind, k):
                raise InputError(f"symbol {sym} used as {kind}/{k}, declared {signature[sym]}")


def eval_term(t, X, env):
    """Value index of a term under env (name -> index), or None if undefined."""
    if isinstance(t, Var):
        return env[t.name]
    vals = []
    for a in t.args:
        v = eval_term(a, X, env)
        if v is None:
            return None
        vals.append(v)
    return X.operations[t.symbol].table.get(tuple(vals))


def holds(atom, X, env):
    if isinstance(atom, Bottom):
        return False
    if isinstance(atom, Eq):
        a = eval_term(atom.left, X, env)
        return a is not None and a == eval_term(atom.right, X, env)
    vals = []
    for t in atom.args:
        v = eval_term(t, X, env)
        if v is None:
            return False
        vals.append(v)
    return tuple(vals) in X.relations[atom.symbol].members


class ArrayInterpretation:
    """Vectorized evaluation over many assignments at once.

    Undefined values are encoded by the extra index `size`; every operation
    table is padded so that undefined arguments give undefined results."""

    def __init__(self, X):
        self.size = n = X.size
        self.ops = {}
        for s, h in X.operations.items():
            arr = np.full((n + 1,) * h.arity, n, dtype=np.int64)
            for args, v in h.items:
                arr[args] = v
            self.ops[s] = arr
        self.rels = {}
        for s, r in X.relations.items():
            arr = np.zeros((n + 1,) * r.arity, dtype=bool)
            for t in r.tuples:
                arr[t] = True
            self.rels[s] = arr

    def term(self, t, cols):
        """cols maps variable names to integer arrays of equal length."""
        if isinstance(t, Var):
            return cols[t.name]
        table = self.ops[t.symbol]
        if not t.args:
            length = len(next(iter(cols.values()))) if cols else 1
            return np.full(length, table[()], dtype=np.int64)
        return table[tuple(self.term(a, cols) for a in t.args)]

    def atom(self, atom, cols):
        if isinstance(atom, Eq):
            a = self.term(atom.left, cols)
            b = self.term(atom.right, cols)
            return (a == b) & (a != self.size)
        if isinstance(atom, Rel):
            table = self.rels[atom.symbol]
            if not atom.args:
                length = len(next(iter(cols.values()))) if cols else 1
                return np.full(length, bool(table[()]))
            return table[tuple(self.term(a, cols) for a in atom.args)]
        length = len(next(iter(cols.values()))) if cols else 1
        return np.zeros(length, dtype=bool)
