"""Universal Horn sentences: parsing, purification, model checking, naturalization.

Sentence syntax (one per line):

    ! u v w : f(w)=u & g(w)=v -> sigma(u,v)=w
    ! u v : def sigma(u,v) & def sigma(v,u) -> u=v
    ! u : -> u=u          (empty premise; `true` is also accepted)
    ! u v : r(u,v) -> false

An optional label in brackets may precede the `!`.  `def t` abbreviates t=t.
"""

import itertools
import re
from dataclasses import dataclass, field

from .algebra import Relation, structure_homs
from .definability import ExistsFormula, beta_formulas
from .errors import BoundExceeded, InputError, PreconditionFailure
from .syntax import (BOTTOM, App, Bottom, Eq, Rel, Var, atom_symbols, atom_vars, check_signature,
                     eval_term, holds, is_var, subst_atom, term_vars)


@dataclass(frozen=True)
class UHSentence:
    variables: tuple
    premise: tuple
    conclusion: object

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "premise", tuple(self.premise))
        used = []
        for a in self.premise + (self.conclusion,):
            atom_vars(a, used)
        missing = [v for v in used if v not in self.variables]
        if missing:
            raise InputError(f"variables {missing} are not quantified")

    def __str__(self):
        return print_sentence(self)

    def symbols(self):
        acc = set()
        for a in self.premise + (self.conclusion,):
            atom_symbols(a, acc)
        return acc


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(->)|(&)|(!)|(:)|(\()|(\))|(,)|(=)|([A-Za-z_][A-Za-z0-9_']*))")


def _tokenize(text, line):
    tokens = []
    pos = 0
    text = text.split("#", 1)[0].rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            while text[pos].isspace():
                pos += 1
            raise InputError(f"line {line}, column {pos + 1}: unexpected character {text[pos]!r}")
        tok = m.group(m.lastindex)
        tokens.append((tok, line, m.start(m.lastindex) + 1))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens, signature, line):
        self.toks = tokens
        self.i = 0
        self.sig = signature
        self.line = line
        self.vars = ()

    def error(self, msg, at=None):
        at = self.i if at is None else at
        if at < len(self.toks):
            _, line, col = self.toks[at]
        else:
            line, col = self.line, (self.toks[-1][2] + len(self.toks[-1][0]) if self.toks else 1)
        raise InputError(f"line {line}, column {col}: {msg}")

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j][0] if j < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            self.error(f"expected {expected or 'more input'}, found {tok or 'end of line'}")
        self.i += 1
        return tok

    def ident(self):
        tok = self.peek()
        if tok is None or not re.match(r"[A-Za-z_]", tok):
            self.error(f"expected a name, found {tok or 'end of line'}")
        self.i += 1
        return tok

    def sentence(self):
        self.take("!")
        names = []
        while self.peek() not in (":", None):
            name = self.ident()
            if name in names:
                self.error(f"variable {name} quantified twice", at=self.i - 1)
            names.append(name)
        self.take(":")
        self.vars = tuple(names)
        premise = []
        if self.peek() == "->":
            self.take()
            conclusion = self.conclusion()
        else:
            first = self.atom()
            if self.peek() in ("&", "->"):
                atoms = [first]
                while self.peek() == "&":
                    self.take()
                    atoms.append(self.atom())
                self.take("->")
                premise = [a for a in atoms if a != "true"]
                conclusion = self.conclusion()
            else:
                if first == "true":
                    self.error("`true` cannot be a conclusion")
                conclusion = first
        if self.peek() is not None:
            self.error(f"unexpected {self.peek()}")
        return UHSentence(self.vars, tuple(premise), conclusion)

    def conclusion(self):
        a = self.atom()
        if a == "true":
            self.error("`true` cannot be a conclusion")
        return a

    def atom(self):
        tok = self.peek()
        if tok == "false":
            self.take()
            return BOTTOM
        if tok == "true":
            self.take()
            return "true"
        if tok == "def":
            self.take()
            t = self.term()
            if not isinstance(t, App):
                self.error("`def` needs an operation application")
            return Eq(t, t)
        left = self.term(relation_ok=True)
        if isinstance(left, Rel):
            return left
        self.take("=")
        right = self.term()
        return Eq(left, right)

    def term(self, relation_ok=False):
        start = self.i
        name = self.ident()
        if self.peek() != "(":
            if name not in self.vars:
                self.i -= 1
                self.error(f"unknown variable {name}")
            return Var(name)
        self.take("(")
        args = []
        if self.peek() != ")":
            args.append(self.term())
            while self.peek() == ",":
                self.take()
                args.append(self.term())
        self.take(")")
        args = tuple(args)
        kind = None
        if self.sig is not None:
            if name not in self.sig:
                self.error(f"unknown symbol {name}", at=start)
            kind, arity = self.sig[name]
            if arity != len(args):
                self.error(f"{name} has arity {arity}, used with {len(args)}", at=start)
        is_rel = kind == "rel" if kind else (relation_ok and self.peek() != "=")
        if is_rel:
            if not relation_ok or self.peek() == "=":
                self.error(f"relation {name} used as a term", at=start)
            return Rel(name, args)
        return App(name, args)


def parse_sentence(text, signature=None, line=1):
    toks = _tokenize(text, line)
    if not toks:
        raise InputError(f"line {line}: empty sentence")
    return _Parser(toks, signature, line).sentence()


def parse_sentences(text, signature=None):
    """Parse a sentence file; returns a list of (label, sentence)."""
    out = []
    for n, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        label = None
        m = re.match(r"\[([^\]]+)\]\s*(.*)$", body)
        if m:
            label, body = m.group(1).strip(), m.group(2)
        out.append((label or str(len(out) + 1), parse_sentence(body, signature, n)))
    return out


def print_sentence(s):
    head = "! " + " ".join(s.variables) + " :" if s.variables else "! :"
    concl = str(s.conclusion)
    if not s.premise:
        return f"{head} -> {concl}"
    return f"{head} {' & '.join(map(str, s.premise))} -> {concl}"


# ---------------------------------------------------------------- purity

def _flat_app(t):
    return isinstance(t, App) and all(is_var(a) for a in t.args)


def premise_atom_is_pure(a):
    if isinstance(a, Rel):
        return all(is_var(t) for t in a.args)
    if isinstance(a, Eq):
        return _flat_app(a.left) and is_var(a.right)
    return False


def conclusion_is_pure(c):
    if isinstance(c, Bottom):
        return True
    if isinstance(c, Rel):
        return all(is_var(t) for t in c.args)
    if isinstance(c, Eq):
        if is_var(c.left) and is_var(c.right):
            return True
        return c.left == c.right and _flat_app(c.left)
    return False


def is_pure(s):
    return all(premise_atom_is_pure(a) for a in s.premise) and conclusion_is_pure(s.conclusion)


def _dedupe(atoms):
    out = []
    for a in atoms:
        if a not in out:
            out.append(a)
    return out


class _Fresh:
    def __init__(self, used):
        self.used = set(used)
        self.n = 0

    def __call__(self):
        while True:
            self.n += 1
            name = f"w{self.n}"
            if name not in self.used:
                self.used.add(name)
                return name


def _rewrite(variables, premise, conclusion, fresh, out):
    premise = _dedupe(premise)
    if any(isinstance(a, Bottom) for a in premise):
        return
    # (0) premise equation between variables
    for k, a in enumerate(premise):
        if isinstance(a, Eq) and is_var(a.left) and is_var(a.right):
            rest = premise[:k] + premise[k + 1:]
            u, v = a.left.name, a.right.name
            if u != v:
                mapping = {v: Var(u)}
                rest = [subst_atom(x, mapping) for x in rest]
                conclusion = subst_atom(conclusion, mapping)
                variables = [x for x in variables if x != v]
            return _rewrite(variables, rest, conclusion, fresh, out)
    # (1) relation atom with a non-variable argument
    for k, a in enumerate(premise):
        if isinstance(a, Rel) and not all(is_var(t) for t in a.args):
            ws = [fresh() for _ in a.args]
            new = premise[:k] + premise[k + 1:] + [Rel(a.symbol, tuple(Var(w) for w in ws))]
            new += [Eq(t, Var(w)) for t, w in zip(a.args, ws)]
            return _rewrite(variables + ws, new, conclusion, fresh, out)
    # (2) equation whose right side is not a variable
    for k, a in enumerate(premise):
        if isinstance(a, Eq) and not is_var(a.right):
            w = fresh()
            new = premise[:k] + premise[k + 1:] + [Eq(a.left, Var(w)), Eq(a.right, Var(w))]
            return _rewrite(variables + [w], new, conclusion, fresh, out)
    # (3) h(t...) = v with a non-variable argument
    for k, a in enumerate(premise):
        if isinstance(a, Eq) and isinstance(a.left, App) and not _flat_app(a.left):
            ws = [fresh() for _ in a.left.args]
            new = premise[:k] + premise[k + 1:] + [Eq(App(a.left.symbol, tuple(Var(w) for w in ws)), a.right)]
            new += [Eq(t, Var(w)) for t, w in zip(a.left.args, ws)]
            return _rewrite(variables + ws, new, conclusion, fresh, out)
    c = conclusion
    # (4) relation conclusion with a non-variable argument
    if isinstance(c, Rel) and not all(is_var(t) for t in c.args):
        for t in c.args:
            _rewrite(list(variables), list(premise), Eq(t, t), fresh, out)
        ws = [fresh() for _ in c.args]
        extra = [Eq(t, Var(w)) for t, w in zip(c.args, ws)]
        _rewrite(variables + ws, premise + extra, Rel(c.symbol, tuple(Var(w) for w in ws)), fresh, out)
        return
    if isinstance(c, Eq):
        s, t = c.left, c.right
        # (5) equation between distinct terms, not both variables
        if s != t and not (is_var(s) and is_var(t)):
            _rewrite(list(variables), list(premise), Eq(s, s), fresh, out)
            _rewrite(list(variables), list(premise), Eq(t, t), fresh, out)
            w1, w2 = fresh(), fresh()
            _rewrite(variables + [w1, w2], premise + [Eq(s, Var(w1)), Eq(t, Var(w2))],
                     Eq(Var(w1), Var(w2)), fresh, out)
            return
        # (6) definedness of an application with non-variable arguments
        if s == t and isinstance(s, App) and not _flat_app(s):
            for arg in s.args:
                _rewrite(list(variables), list(premise), Eq(arg, arg), fresh, out)
            ws = [fresh() for _ in s.args]
            extra = [Eq(arg, Var(w)) for arg, w in zip(s.args, ws)]
            app = App(s.symbol, tuple(Var(w) for w in ws))
            _rewrite(variables + ws, premise + extra, Eq(app, app), fresh, out)
            return
        if is_var(s) and s == t:
            return  # tautology u = u
    out.append(UHSentence(tuple(variables), tuple(premise), c))


def purify(s):
    """Logically equivalent list of pure sentences."""
    out = []
    fresh = _Fresh(s.variables)
    _rewrite(list(s.variables), list(s.premise), s.conclusion, fresh, out)
    result = []
    for x in out:
        if not any(same_up_to_renaming(x, y) for y in result):
            result.append(x)
    return result


def same_up_to_renaming(s1, s2):
    """Equality up to a bijective renaming of variables and premise order."""
    if len(s1.premise) != len(s2.premise) or len(s1.variables) != len(s2.variables):
        return False

    def match(x, y, m, inv):
        if isinstance(x, Var) and isinstance(y, Var):
            if m.get(x.name, y.name) != y.name or inv.get(y.name, x.name) != x.name:
                return False
            m[x.name] = y.name
            inv[y.name] = x.name
            return True
        if type(x) is not type(y):
            return False
        if isinstance(x, Bottom):
            return True
        if isinstance(x, Eq):
            return match(x.left, y.left, m, inv) and match(x.right, y.right, m, inv)
        if x.symbol != y.symbol or len(x.args) != len(y.args):
            return False
        return all(match(a, b, m, inv) for a, b in zip(x.args, y.args))

    for perm in itertools.permutations(s2.premise):
        m, inv = {}, {}
        if all(match(a, b, m, inv) for a, b in zip(s1.premise + (s1.conclusion,),
                                                    perm + (s2.conclusion,))):
            return True
    return False


# ---------------------------------------------------------------- model checking

def _solve(X, atoms, variables, env):
    env = dict(env)
    pending = list(atoms)
    while True:
        progressed = False
        rest = []
        for a in pending:
            vs = atom_vars(a)
            free = [v for v in vs if v not in env]
            if not free:
                if not holds(a, X, env):
                    return
                progressed = True
                continue
            if isinstance(a, Eq):
                for lhs, rhs in ((a.left, a.right), (a.right, a.left)):
                    if is_var(rhs) and rhs.name in free and len(free) == 1 and rhs.name not in term_vars(lhs):
                        val = eval_term(lhs, X, env)
                        if val is None:
                            return
                        env[rhs.name] = val
                        progressed = True
                        break
                else:
                    rest.append(a)
                continue
            rest.append(a)
        pending = rest
        if not progressed:
            break
    if not pending:
        free = [v for v in variables if v not in env]
        for vals in itertools.product(range(X.size), repeat=len(free)):
            e = dict(env)
            e.update(zip(free, vals))
            yield e
        return
    # branch on the tuples of a flat relation atom, or the domain of a flat application
    # (only atoms that would bind a new variable are useful for branching)
    choices = []
    for a in pending:
        if isinstance(a, Rel) and all(is_var(t) for t in a.args):
            choices.append(([t.name for t in a.args], X.relations[a.symbol].tuples))
        elif isinstance(a, Eq):
            choices += [([t.name for t in app.args], X.operations[app.symbol].domain.tuples)
                        for app in (a.left, a.right) if _flat_app(app)]
    for names, tuples in choices:
        if any(n not in env for n in names):
            break
    else:
        counts = {}
        for a in pending:
            for v in atom_vars(a):
                if v not in env:
                    counts[v] = counts.get(v, 0) + 1
        v = max(counts, key=counts.get)
        names, tuples = [v], [(x,) for x in range(X.size)]
    for t in tuples:
        e = dict(env)
        ok = True
        for name, x in zip(names, t):
            if e.setdefault(name, x) != x:
                ok = False
                break
        if ok:
            yield from _solve(X, pending, variables, e)


def solutions(X, atoms, variables, env=None):
    """All assignments (dicts name -> element index) satisfying the atoms."""
    check_signature([a for a in atoms if not isinstance(a, Bottom)], X.signature)
    if any(isinstance(a, Bottom) for a in atoms):
        return
    yield from _solve(X, atoms, variables, env or {})


@dataclass(frozen=True)
class NaturalizedSentence:
    """A pure sentence with premise atoms replaced by hat-relation formulas."""

    original: UHSentence
    variables: tuple
    blocks: tuple          # (original atom, tuple of replacing atoms) per premise atom
    conclusion: object     # Bottom, Eq of variables, or ExistsFormula

    @property
    def premise(self):
        return tuple(a for _, atoms in self.blocks for a in atoms)

    def __str__(self):
        prem = " & ".join(map(str, self.premise)) or "true"
        c = self.conclusion
        if isinstance(c, ExistsFormula):
            cs = f"(exists {' '.join(c.bound)} : {' & '.join(map(str, c.atoms)) or 'true'})" if c.bound \
                else (" & ".join(map(str, c.atoms)) or "true")
        else:
            cs = str(c)
        return f"! {' '.join(self.variables)} : {prem} -> {cs}"


def _conclusion_holds(X, c, env):
    if isinstance(c, ExistsFormula):
        for _ in solutions(X, list(c.atoms), list(c.free) + list(c.bound), env):
            return True
        return False
    return holds(c, X, env)


def models(X, s):
    """Truth of a sentence in a finite structure."""
    if isinstance(s, NaturalizedSentence):
        premise = list(s.premise)
    else:
        check_signature(list(s.premise) + [s.conclusion], X.signature)
        premise = list(s.premise)
    for env in solutions(X, premise, list(s.variables)):
        if not _conclusion_holds(X, s.conclusion, env):
            return False
    return True


def models_all(X, sentences):
    return all(models(X, s) for s in sentences)


def premise_relation(X, s):
    variables = list(s.variables)
    rows = {tuple(env[v] for v in variables) for env in solutions(X, list(s.premise), variables)}
    return Relation(X.carrier, len(variables), rows)


# ---------------------------------------------------------------- naturalization

class BetaTable:
    """Lazily computed defining formulas in `ego` for the symbols of `source`.

    Keys are (kind, symbol) with kind 'rel', 'graph' or 'dom'."""

    def __init__(self, ego, source):
        self.ego = ego
        self.source = source
        self._cache = {}

    def relation_for(self, kind, sym):
        src = self.source
        if kind == "rel":
            if sym not in src.relations:
                raise PreconditionFailure(f"no relation symbol {sym} to naturalize")
            return src.relations[sym]
        if sym not in src.operations:
            raise PreconditionFailure(f"no operation symbol {sym} to naturalize")
        h = src.operations[sym]
        return h.graph if kind == "graph" else h.domain

    def entry(self, kind, sym):
        key = (kind, sym)
        if key not in self._cache:
            self._cache[key] = beta_formulas(self.ego, self.relation_for(kind, sym))
        return self._cache[key]


def _instantiate(entry, block, fresh):
    names = list(entry.hat_formula.variables)
    extra = [fresh() for _ in range(entry.extra)]
    mapping = {x: Var(y) for x, y in zip(names, list(block) + extra)}
    return extra, tuple(subst_atom(a, mapping) for a in entry.hat_formula.atoms)


def naturalize(s, betas):
    if not is_pure(s):
        raise InputError("only pure sentences can be naturalized")
    fresh = _Fresh(set(s.variables))
    variables = list(s.variables)
    blocks = []
    for a in s.premise:
        if isinstance(a, Rel):
            entry = betas.entry("rel", a.symbol)
            block = [t.name for t in a.args]
        else:
            entry = betas.entry("graph", a.left.symbol)
            block = [t.name for t in a.left.args] + [a.right.name]
        extra, atoms = _instantiate(entry, block, fresh)
        variables += extra
        blocks.append((a, atoms))
    c = s.conclusion
    if isinstance(c, Rel):
        entry = betas.entry("rel", c.symbol)
        bound, atoms = _instantiate(entry, [t.name for t in c.args], fresh)
        concl = ExistsFormula(tuple(t.name for t in c.args), tuple(bound), atoms)
    elif isinstance(c, Eq) and isinstance(c.left, App):
        entry = betas.entry("dom", c.left.symbol)
        args = [t.name for t in c.left.args]
        bound, atoms = _instantiate(entry, args, fresh)
        concl = ExistsFormula(tuple(args), tuple(bound), atoms)
    else:
        concl = c
    return NaturalizedSentence(s, tuple(variables), tuple(blocks), concl)


# ---------------------------------------------------------------- dual class

def canonical_embedding_failure(X, E, limit=None):
    """Why X is not (isomorphic to) a substructure of a power of E, or None."""
    Es = E.as_structure() if hasattr(E, "as_structure") else E
    if X.signature != Es.signature:
        raise InputError("structure and alter ego have different signatures")
    if X.size == 0:
        if any(h.arity == 0 for h in Es.operations.values()):
            return "empty structure but the alter ego has nullary operations"
        return None
    homs = structure_homs(X, Es, limit=limit)
    if not homs:
        return "no morphisms into the alter ego"
    images = [tuple(u[x] for u in homs) for x in range(X.size)]
    if len(set(images)) != X.size:
        return "morphisms do not separate points"
    where = {img: x for x, img in enumerate(images)}
    for sym, r in X.relations.items():
        target = Es.relations[sym].members
        for t in itertools.product(range(X.size), repeat=r.arity):
            if t in r.members:
                continue
            if all(tuple(u[x] for x in t) in target for u in homs):
                return f"relation {sym} is not reflected at {t}"
    for sym, h in X.operations.items():
        target = Es.operations[sym].table
        for t in itertools.product(range(X.size), repeat=h.arity):
            vals = [target.get(tuple(u[x] for x in t)) for u in homs]
            if any(v is None for v in vals):
                continue
            y = where.get(tuple(vals))
            if y is None or h.table.get(t) != y:
                return f"operation {sym} is not reflected at {t}"
    return None


def in_finite_dual_class(X, E):
    return canonical_embedding_failure(X, E) is None


def enumerate_structures(signature, size, sentences=(), cap=500_000):
    """All structures on range(size) with the given signature satisfying the sentences.

    Symbols are filled in one at a time; a sentence is checked as soon as all of
    its symbols have been chosen."""
    from .algebra import FiniteStructure, PartialOperation

    carrier = tuple(str(i) for i in range(size))
    symbols = sorted(signature)
    sents = [(s, {sym for _, sym, _ in s.symbols()}) for s in sentences]
    count = [0]

    def choices(sym):
        kind, k = signature[sym]
        tuples = list(itertools.product(range(size), repeat=k))
        if kind == "rel":
            for bits in range(1 << len(tuples)):
                yield Relation(carrier, k, [t for i, t in enumerate(tuples) if bits >> i & 1])
        else:
            for vals in itertools.product(range(size + 1), repeat=len(tuples)):
                yield PartialOperation(carrier, k, tuple((t, v) for t, v in zip(tuples, vals) if v < size))

    def fill(i, rels, ops):
        done = set(symbols[:i])
        X = FiniteStructure(carrier, rels, ops)
        for s, syms in sents:
            if syms <= done and not (syms <= set(symbols[:i - 1]) if i else False):
                if not models(X, s):
                    return
        if i == len(symbols):
            count[0] += 1
            if count[0] > cap:
                raise BoundExceeded(f"more than {cap} candidate structures of size {size}")
            yield X
            return
        sym = symbols[i]
        for val in choices(sym):
            if signature[sym][0] == "rel":
                yield from fill(i + 1, {**rels, sym: val}, ops)
            else:
                yield from fill(i + 1, rels, {**ops, sym: val})

    yield from fill(0, {}, {})


def _candidate_count(signature, size):
    total = 1
    for kind, k in signature.values():
        total *= (2 ** (size ** k)) if kind == "rel" else (size + 1) ** (size ** k)
    return total


@dataclass
class BasisValidation:
    holds_in_ego: bool
    failing_sentence: object = None
    counterexample: object = None
    checked_sizes: list = field(default_factory=list)
    inconclusive_sizes: list = field(default_factory=list)

    @property
    def verdict(self):
        if not self.holds_in_ego or self.counterexample is not None:
            return "fail"
        return "inconclusive" if self.inconclusive_sizes else "pass"


def validate_basis(E, sentences, size_bound=2, cap=200_000):
    """Check E satisfies the sentences and every small model lies in the dual class."""
    Es = E.as_structure()
    for s in sentences:
        if not models(Es, s):
            return BasisValidation(False, failing_sentence=s)
    report = BasisValidation(True)
    sig = Es.signature
    for size in range(1, size_bound + 1):
        try:
            for X in enumerate_structures(sig, size, sentences, cap=cap):
                if not in_finite_dual_class(X, E):
                    report.counterexample = X
                    return report
        except BoundExceeded:
            report.inconclusive_sizes.append(size)
            continue
        report.checked_sizes.append(size)
    return report
