"""Finite-level duality checks, the sharp and transfer functors, and the
procedure that builds a fully dualising alter ego from a dualising one.

Every universally quantified statement over relations is checked up to an
arity bound, and the bound is recorded in the report."""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .algebra import (FiniteAlgebra, FiniteStructure, PartialOperation, Relation, algebra_homs,
                      all_subuniverses, build_power, closed_subsets, format_tuple, is_closed_subset,
                      structure_homs, subpower_algebra, substructure)
from .clone import extends_in_clone, non_extending_homs, structural_reduct_failure
from .definability import (AlterEgo, bijective_projection, cadef_define, cadef_relations,
                           compatible_operations_on, hom_minimal_relations, injective_coordinate_sets,
                           is_hom_minimal, relational_closure)
from .errors import BoundExceeded, InputError, PreconditionFailure
from .fileformat import dump_partial, dump_relation
from .syntax import App, Bottom, Eq, atom_symbols
from .uhlogic import BetaTable, naturalize, premise_relation, purify, solutions

SCHEMA = "dualize.report/1"


# ---------------------------------------------------------------- reports

@dataclass
class Check:
    name: str
    verdict: str            # pass | fail | inconclusive
    detail: str = ""
    witness: object = None

    def to_json(self):
        out = {"name": self.name, "verdict": self.verdict}
        if self.detail:
            out["detail"] = self.detail
        if self.witness is not None:
            out["witness"] = _render(self.witness)
        return out


def _render(w):
    if isinstance(w, (list, tuple)):
        return [_render(x) for x in w]
    if isinstance(w, dict):
        return {str(k): _render(v) for k, v in w.items()}
    if isinstance(w, (int, float, bool)) or w is None:
        return w
    if isinstance(w, Relation):
        return dump_relation(w, "w")
    if isinstance(w, PartialOperation):
        return dump_partial(w, "w")
    return str(w)


@dataclass
class DualityReport:
    subject: str
    bounds: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    def add(self, name, verdict, detail="", witness=None):
        self.checks.append(Check(name, verdict, detail, witness))
        return self.checks[-1]

    def extend(self, other, prefix=""):
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.verdict, c.detail, c.witness))
        self.bounds.update(other.bounds)

    @property
    def verdict(self):
        verdicts = {c.verdict for c in self.checks}
        if "fail" in verdicts:
            return "fail"
        if "inconclusive" in verdicts:
            return "inconclusive"
        return "pass"

    @property
    def passed(self):
        return self.verdict == "pass"

    def failures(self):
        return [c for c in self.checks if c.verdict == "fail"]

    def to_json(self):
        return {"schema": SCHEMA, "subject": self.subject, "verdict": self.verdict,
                "bounds": self.bounds, "checks": [c.to_json() for c in self.checks]}

    def __str__(self):
        lines = [f"{self.subject}: {self.verdict}"]
        if self.bounds:
            lines.append("  bounds: " + ", ".join(f"{k}={v}" for k, v in self.bounds.items()))
        for c in self.checks:
            line = f"  [{c.verdict}] {c.name}"
            if c.detail:
                line += f": {c.detail}"
            lines.append(line)
            if c.witness is not None and c.verdict != "pass":
                lines.append("      witness:")
                lines += ["        " + x for x in _witness_lines(_render(c.witness))]
        return "\n".join(lines)


def _witness_lines(w):
    if isinstance(w, dict):
        out = []
        for k, v in w.items():
            out.append(f"{k}:")
            out += ["  " + x for x in _witness_lines(v)]
        return out
    if isinstance(w, list) and any(isinstance(x, (dict, list)) or "\n" in str(x) for x in w):
        return [x for v in w for x in _witness_lines(v)]
    return str(w).rstrip("\n").splitlines() or [""]


# ---------------------------------------------------------------- hom functors

def _label(carrier, vec):
    return format_tuple(carrier, vec)


def dual_of_algebra(A, E):
    """D(A): the homomorphisms A -> M with the structure inherited from E^A."""
    M = E.base
    if A.size == 0:
        raise InputError("algebras are never empty")
    homs = algebra_homs(A, M)
    labels = tuple(_label(M.carrier, u) for u in homs)
    pos = {u: i for i, u in enumerate(homs)}
    rels = {}
    for sym, r in E.relations.items():
        rows = [t for t in itertools.product(range(len(homs)), repeat=r.arity)
                if all(tuple(homs[i][a] for i in t) in r.members for a in range(A.size))]
        rels[sym] = Relation(labels, r.arity, rows)
    ops = {}
    for sym, h in E.operations.items():
        items = []
        for t in itertools.product(range(len(homs)), repeat=h.arity):
            vals = [h.table.get(tuple(homs[i][a] for i in t)) for a in range(A.size)]
            if None in vals:
                continue
            items.append((t, pos[tuple(vals)]))
        ops[sym] = PartialOperation(labels, h.arity, tuple(items))
    return FiniteStructure(labels, rels, ops, name=f"D({A.name})")


def dual_of_structure(X, E):
    """E(X): the morphisms X -> E as a subalgebra of M^X."""
    M = E.base
    Es = E.as_structure()
    if X.signature != Es.signature:
        raise InputError("structure and alter ego have different signatures")
    homs = structure_homs(X, Es)
    labels = [_label(M.carrier, u) for u in homs]
    pos = {u: i for i, u in enumerate(homs)}
    tables = {}
    for op, table in M.tables.items():
        k = table.ndim
        out = {}
        for args in itertools.product(range(len(homs)), repeat=k):
            val = tuple(int(table[tuple(homs[a][x] for a in args)]) for x in range(X.size))
            if val not in pos:
                raise AssertionError(f"{op} does not preserve E({X.name})")
            out[args] = pos[val]
        arr = np.zeros((len(homs),) * k, dtype=np.int64)
        for args, v in out.items():
            arr[args] = v
        tables[op] = arr
    return FiniteAlgebra(f"E({X.name or 'X'})", labels, tables)


def dual_relation(X, E):
    """E(X) as a relation of arity |X| on M (rows are the morphisms)."""
    Es = E.as_structure()
    return Relation(E.base.carrier, X.size, structure_homs(X, Es))


# ---------------------------------------------------------------- evaluation maps

def _partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in _partitions(rest):
        yield [[first]] + p
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]


def congruences(A):
    """All congruences of a small algebra, as tuples of block labels."""
    if A.size > 8:
        raise BoundExceeded("congruence enumeration is limited to 8 elements")
    out = []
    for p in _partitions(list(range(A.size))):
        lab = [0] * A.size
        for b, block in enumerate(p):
            for x in block:
                lab[x] = b
        ok = True
        for op, table in A.tables.items():
            k = table.ndim
            for args in itertools.product(range(A.size), repeat=k):
                for j in range(k):
                    for y in range(A.size):
                        if lab[y] == lab[args[j]] and lab[int(table[args])] != \
                                lab[int(table[args[:j] + (y,) + args[j + 1:]])]:
                            ok = False
                            break
                    if not ok:
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            out.append(tuple(lab))
    return out


def directly_indecomposable(A):
    if A.size <= 1:
        return False
    cons = congruences(A)
    n = A.size
    for a, b in itertools.combinations(cons, 2):
        if len(set(a)) in (1, n) or len(set(b)) in (1, n):
            continue
        meet_zero = len({(a[x], b[x]) for x in range(n)}) == n
        # a o b is everything iff every a-block meets every b-block
        product_all = len({(a[x], b[x]) for x in range(n)}) == len(set(a)) * len(set(b))
        if meet_zero and product_all:
            return False
    return True


def lattice_reduct(M):
    """A pair of binary operations forming a lattice, or None."""
    bins = [op for op, t in M.tables.items() if t.ndim == 2]
    rng = range(M.size)
    for j, m in itertools.permutations(bins, 2):
        J, Mt = M.tables[j], M.tables[m]
        if all(J[x, y] == J[y, x] and Mt[x, y] == Mt[y, x] and J[x, Mt[x, y]] == x
               and Mt[x, J[x, y]] == x for x in rng for y in rng) and \
           all(J[J[x, y], z] == J[x, J[y, z]] and Mt[Mt[x, y], z] == Mt[x, Mt[y, z]]
               for x in rng for y in rng for z in rng):
            return j, m
    return None


def component_reduction_applies(M):
    """Whether surjectivity of evaluation maps can be checked per connected component.

    E(X1 + X2) is E(X1) x E(X2).  When M has a lattice reduct its variety is
    congruence distributive, so the kernel of a hom from a product is a product
    congruence; if every subalgebra of M is directly indecomposable such a hom
    factors through one coordinate."""
    if lattice_reduct(M) is None:
        return False
    for r in all_subuniverses(M, 1):
        if len(r) and not directly_indecomposable(subpower_algebra(M, r)):
            return False
    return True


def components(X):
    """Connected components of a structure (relation tuples and op items link elements)."""
    parent = list(range(X.size))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def link(elems):
        elems = list(elems)
        for y in elems[1:]:
            a, b = find(elems[0]), find(y)
            if a != b:
                parent[b] = a

    for r in X.relations.values():
        for t in r.tuples:
            link(t)
    for h in X.operations.values():
        for args, v in h.items:
            link(args + (v,))
    groups = {}
    for x in range(X.size):
        groups.setdefault(find(x), []).append(x)
    return sorted(groups.values())


def _canonical(X, limit=7):
    """Isomorphism-invariant key for small structures, or None when too large."""
    if X.size > limit:
        return None
    best = None
    sig = sorted(X.signature)
    for perm in itertools.permutations(range(X.size)):
        key = []
        for s in sig:
            if s in X.relations:
                key.append(tuple(sorted(tuple(perm[x] for x in t) for t in X.relations[s].tuples)))
            else:
                key.append(tuple(sorted((tuple(perm[x] for x in a), perm[v])
                                        for a, v in X.operations[s].items)))
        key = tuple(key)
        if best is None or key < best:
            best = key
    return (X.size, best)


def evaluation_onto_algebra(A, E):
    """Morphisms D(A) -> E that are not evaluations (empty list iff e_A is onto)."""
    D = dual_of_algebra(A, E)
    evals = set()
    homs = algebra_homs(A, E.base)
    for a in range(A.size):
        evals.add(tuple(u[a] for u in homs))
    if len(evals) != A.size:
        raise AssertionError("e_A is not injective")
    return [u for u in structure_homs(D, E.as_structure()) if u not in evals]


def evaluation_onto_structure(X, E, cap):
    """Homs E(X) -> M that are not evaluations, or raise BoundExceeded."""
    r = dual_relation(X, E)
    if len(r) > cap:
        raise BoundExceeded(f"E(X) has {len(r)} elements, above the cap {cap}")
    cols = [r.column(i) for i in range(r.arity)]
    if len(set(cols)) != X.size:
        raise AssertionError("epsilon_X is not injective")
    from .algebra import hom_vectors
    return [v for v in hom_vectors(E.base, r) if v not in set(cols)]


def check_evaluation_isos(E, power=2, cap=20_000, by_components=True):
    """e_A for subalgebras A of M^power and epsilon_X for substructures X of E^power."""
    M = E.base
    rep = DualityReport(f"evaluation maps of {E.name}", {"power": power, "dual size cap": cap})
    count = 0
    for r in all_subuniverses(M, power):
        if not len(r):
            continue
        A = subpower_algebra(M, r)
        bad = evaluation_onto_algebra(A, E)
        count += 1
        if bad:
            rep.add("e_A onto", "fail", f"A = subalgebra {r} of M^{power}",
                    {"subalgebra": r, "morphism": bad[0]})
            break
    else:
        rep.add("e_A onto", "pass", f"{count} subalgebras of M^{power}")

    Es = E.as_structure()
    P = build_power(Es, power)
    split = by_components and component_reduction_applies(M)
    seen = {}
    failure = None
    skipped = 0
    subsets = [s for s in closed_subsets(P) if s]
    for S in subsets:
        X = substructure(P, S)
        parts = [substructure(X, c) for c in components(X)] if split else [X]
        for Y in parts:
            key = _canonical(Y) if split else None
            key = key if key is not None else (Y.carrier, id(Y))
            if key not in seen:
                try:
                    seen[key] = evaluation_onto_structure(Y, E, cap)
                except BoundExceeded:
                    seen[key] = "inconclusive"
            res = seen[key]
            if res == "inconclusive":
                skipped += 1
            elif res:
                failure = (Y, res[0])
                break
        if failure:
            break
    detail = f"{len(subsets)} substructures of E^{power}"
    if split:
        detail += f", checked through {len(seen)} component types"
        rep.bounds["component reduction"] = True
    if failure:
        Y, hom = failure
        rep.add("epsilon_X onto", "fail", f"X = {list(Y.carrier)}", {"substructure": list(Y.carrier),
                                                                      "hom on E(X)": hom})
    elif skipped:
        rep.add("epsilon_X onto", "inconclusive", detail + f"; {skipped} exceeded the cap")
    else:
        rep.add("epsilon_X onto", "pass", detail)
    return rep


# ---------------------------------------------------------------- duality checks

def check_finite_duality(E, arity_bound):
    if arity_bound < 1:
        raise InputError("arity bound must be at least 1")
    M = E.base
    rep = DualityReport(f"duality of {E.name} at arity {arity_bound}", {"arity": arity_bound})
    try:
        hm = hom_minimal_relations(M, arity_bound)
        for r in hm:
            if cadef_define(E, r) is None:
                rep.add("hom-minimal relations cadef", "fail",
                        f"hom-minimal relation of arity {r.arity} is not conjunct-atomic definable", r)
                return rep
    except BoundExceeded as exc:
        rep.add("hom-minimal relations cadef", "inconclusive", str(exc))
        return rep
    rep.add("hom-minimal relations cadef", "pass", f"{len(hm)} hom-minimal relations")
    return rep


def _signature_relations(E):
    out = [(sym, r) for sym, r in sorted(E.relations.items())]
    out += [(f"dom {sym}", h.domain) for sym, h in sorted(E.operations.items())]
    return out


def _rich_check(rep, name, E, relations):
    for label, r in relations:
        try:
            bad = non_extending_homs(E, r)
        except BoundExceeded as exc:
            rep.add(name, "inconclusive", f"{label}: {exc}")
            return False
        if bad:
            rep.add(name, "fail", f"not operationally rich at {label}",
                    {"relation": r, "operation": bad[0]})
            return False
    rep.add(name, "pass", f"{len(relations)} relations")
    return True


def check_finite_full_duality(E, arity_bound):
    rep = check_finite_duality(E, arity_bound)
    rep.subject = f"full duality of {E.name} at arity {arity_bound}"
    if not rep.passed:
        return rep
    if not _rich_check(rep, "rich at R and dom H", E, _signature_relations(E)):
        return rep
    M = E.base
    closure = relational_closure(M, hom_minimal_relations(M, arity_bound), arity_bound)
    if not _rich_check(rep, "rich at cadef(hom-minimal)", E, [(str(r), r) for r in closure]):
        return rep
    # equivalent characterisation: richness at everything cadef in the ego
    try:
        own = cadef_relations(E, arity_bound)
    except BoundExceeded as exc:
        rep.add("rich at cadef(ego)", "inconclusive", str(exc))
        return rep
    _rich_check(rep, "rich at cadef(ego)", E, [(str(r), r) for r in own])
    return rep


def build_m_alpha(M, arity_bound, cadef_arity=None, compact=True):
    """The bounded alter ego M_alpha.

    R_alpha: relations of arity <= cadef_arity conjunct-atomic definable from
    the hom-minimal relations of arity <= arity_bound.  H_alpha: compatible
    partial operations with domain in R_alpha, projection restrictions left
    out.  With `compact`, R is replaced by its hom-minimal generators and an
    operation is only added if it does not already extend in the clone built
    so far; the result is structurally equivalent to the full family."""
    cadef_arity = cadef_arity or arity_bound
    hm = hom_minimal_relations(M, arity_bound)
    R = relational_closure(M, hm, cadef_arity)
    name = f"{M.name}_alpha{arity_bound}" + (f"_{cadef_arity}" if cadef_arity != arity_bound else "")
    if not compact:
        rels, ops = {}, {}
        for i, r in enumerate(R):
            rels[f"r{i + 1}"] = r
            for j, h in enumerate(compatible_operations_on(M, r)):
                ops[f"h{i + 1}_{j + 1}"] = h
        return AlterEgo(name, M, ops, rels, check=False)
    rels = {f"r{i + 1}": r for i, r in enumerate(hm)}
    ego = AlterEgo(name, M, {}, rels, check=False)
    ops = {}
    for r in R:
        for h in compatible_operations_on(M, r):
            if not extends_in_clone(ego, h):
                ops[f"h{len(ops) + 1}"] = h
                ego = AlterEgo(name, M, ops, rels, check=False)
    return ego


def check_strong_at_bound(E, arity_bound, cadef_arity=None):
    """Structural equivalence with the bounded M_alpha (finite-level strong duality shadow)."""
    rep = DualityReport(f"equivalence of {E.name} and M_alpha at arity {arity_bound}",
                        {"arity": arity_bound, "cadef arity": cadef_arity or arity_bound})
    alpha = build_m_alpha(E.base, arity_bound, cadef_arity)
    for a, b, name in ((E, alpha, "ego is a reduct of M_alpha"), (alpha, E, "M_alpha is a reduct of ego")):
        why = structural_reduct_failure(a, b)
        rep.add(name, "pass" if why is None else "fail", witness=why and why[2])
    return rep


# ---------------------------------------------------------------- transfer

def _same_interpretation(E, sym, obj):
    """Symbol of E interpreted exactly as `obj`, preferring the name `sym`."""
    pool = E.operations if isinstance(obj, PartialOperation) else E.relations
    if pool.get(sym) == obj:
        return sym
    for s, v in sorted(pool.items()):
        if v == obj:
            return s
    return None


def in_language(E_target, E_source, atoms):
    """Whether every symbol in the atoms (read in E_source) is a symbol of E_target."""
    for a in atoms:
        for kind, sym, _ in atom_symbols(a):
            obj = E_source.interpretation(sym)
            if _same_interpretation(E_target, sym, obj) != sym:
                return False
    return True


class TransferContext:
    """ego1 is the target side, ego2 the side whose structures are transferred.

    `basis1` is a universal Horn basis of ego1 (purified on construction)."""

    def __init__(self, ego1, ego2, basis1=None):
        if ego1.base.carrier != ego2.base.carrier:
            raise InputError("alter egos over different algebras")
        self.ego1 = ego1
        self.ego2 = ego2
        self.betas = BetaTable(ego2, ego1)
        self.basis1 = None if basis1 is None else [p for s in basis1 for p in purify(s)]
        self._natural = None

    @property
    def naturalized(self):
        if self._natural is None:
            self._natural = [naturalize(s, self.betas) for s in self.basis1 or []]
        return self._natural


def triggered_sentences(ctx):
    """Pure basis sentences whose conclusion is outside ego2's language."""
    out = []
    for s in ctx.basis1:
        c = s.conclusion
        if isinstance(c, Bottom) or (isinstance(c, Eq) and not isinstance(c.left, App)):
            continue
        if not in_language(ctx.ego2, ctx.ego1, [c]):
            out.append(s)
    return out


def check_transfer_assumptions(ctx, arity_bound=2):
    rep = DualityReport(f"transfer assumptions {ctx.ego2.name} -> {ctx.ego1.name}",
                        {"arity": arity_bound})
    hm = check_finite_duality(ctx.ego2, arity_bound)
    rep.extend(hm, "(hm) ")
    _rich_check(rep, "(op) rich at R2 and dom H2", ctx.ego2, _signature_relations(ctx.ego2))
    if ctx.basis1 is None:
        rep.add("(ax)", "inconclusive", "no basis supplied")
        return rep
    E1s = ctx.ego1.as_structure()
    for s in triggered_sentences(ctx):
        r = premise_relation(E1s, s)
        try:
            if not len(r) or not non_extending_homs(ctx.ego2, r):
                rep.add(f"(ax) {s}", "pass", "rich at the premise relation in M_Omega", r)
                continue
            nat = naturalize(s, ctx.betas)
            r2 = premise_relation(ctx.ego2.as_structure(), nat)
            bad = non_extending_homs(ctx.ego2, r2) if len(r2) else []
        except BoundExceeded as exc:
            rep.add(f"(ax) {s}", "inconclusive", str(exc))
            continue
        if bad:
            rep.add(f"(ax) {s}", "fail", "not rich at the naturalized premise relation",
                    {"relation": r2, "operation": bad[0]})
        else:
            rep.add(f"(ax) {s}", "pass", "rich at the naturalized premise relation", r2)
    return rep


def _formula_solutions(X, formula):
    names = list(formula.free) + list(formula.bound)
    rows = {tuple(env[v] for v in formula.free) for env in solutions(X, list(formula.atoms), names)}
    return rows


def sharp_enrich(X, betas, targets=None):
    """X with each target symbol of the source ego interpreted via its pp definition."""
    src = betas.source
    Xs = X
    targets = targets if targets is not None else sorted(src.signature)
    rels = dict(X.relations)
    ops = dict(X.operations)
    for sym in targets:
        if sym in src.relations:
            rows = _formula_solutions(X, betas.entry("rel", sym).beta)
            new = Relation(X.carrier, src.relations[sym].arity, rows)
            if sym in X.relations and X.relations[sym] != new:
                raise AssertionError(f"{sym} changes under enrichment")
            rels[sym] = new
        elif sym in src.operations:
            k = src.operations[sym].arity
            graph = _formula_solutions(X, betas.entry("graph", sym).beta)
            table = {}
            for t in graph:
                if table.setdefault(t[:k], t[k]) != t[k]:
                    raise PreconditionFailure(f"{sym} is not single-valued; the structure fails the basis",
                                              witness=t)
            new = PartialOperation(X.carrier, k, tuple(table.items()))
            dom = _formula_solutions(X, betas.entry("dom", sym).beta)
            if set(new.table) != dom:
                raise PreconditionFailure(f"domain of {sym} disagrees with its definition")
            if sym in X.operations and X.operations[sym] != new:
                raise AssertionError(f"{sym} changes under enrichment")
            ops[sym] = new
        else:
            raise PreconditionFailure(f"no symbol {sym} to enrich with")
    return FiniteStructure(Xs.carrier, rels, ops, name=f"{X.name}#")


def transfer_structure(X, source, target):
    """T: structures of the `source` ego -> structures of the `target` ego.

    Enrich X by pp definitions (in `source`) of the target's symbols, then
    forget everything else."""
    if X.signature != source.signature:
        raise InputError("structure does not have the source signature")
    betas = BetaTable(source, target)
    S = sharp_enrich(X, betas, sorted(target.signature))
    return S.reduct(sorted(target.signature))


# ---------------------------------------------------------------- new from old

@dataclass
class NewFromOldStep:
    sentence: object
    branch: str
    relation: Relation
    domain: Relation
    added: list
    projection: tuple = None


@dataclass
class NewFromOldResult:
    ego: AlterEgo
    steps: list


def _collapse_duplicate_columns(r):
    keep = []
    seen = set()
    for i in range(r.arity):
        c = r.column(i)
        if c not in seen:
            seen.add(c)
            keep.append(i)
    return r.project(keep)


def check_new_from_old_preconditions(ego0, arity_bound):
    rep = check_finite_duality(ego0, arity_bound)
    rep.subject = f"preconditions on {ego0.name}"
    _rich_check(rep, "rich at own signature", ego0, _signature_relations(ego0))
    bad = [s for s, h in ego0.operations.items() if not h.is_total()]
    bad += [s for s, r in ego0.relations.items() if not is_hom_minimal(ego0.base, r)]
    rep.add("total operations and hom-minimal relations", "fail" if bad else "pass", witness=bad or None)
    return rep


def run_new_from_old(M, ego0, ego1, basis1, arity_bound=3, minimize=False, check=True):
    """Add partial operations to ego0 so that the result fully dualises.

    `basis1` is a universal Horn basis of ego1, which must dualise M fully at
    the finite level.  With `minimize`, each new domain is replaced by a
    smallest coordinate projection onto which it maps bijectively, and
    operations already extending in the current clone are skipped."""
    if ego0.base.carrier != M.carrier or ego1.base.carrier != M.carrier:
        raise InputError("alter egos must be over the given algebra")
    if check:
        rep = check_new_from_old_preconditions(ego0, arity_bound)
        if not rep.passed:
            c = rep.failures()[0] if rep.failures() else rep.checks[-1]
            raise PreconditionFailure(f"{ego0.name}: {c.name}: {c.detail}", witness=c.witness)
    betas = BetaTable(ego0, ego1)
    E1s = ego1.as_structure()
    steps = []
    added = {}
    current = ego0
    count = 0
    for s in (p for x in basis1 for p in purify(x)):
        c = s.conclusion
        if isinstance(c, Bottom) or (isinstance(c, Eq) and not isinstance(c.left, App)):
            continue
        if in_language(ego0, ego1, [c]):
            continue
        if in_language(ego0, ego1, s.premise):
            branch, r = "premise in language", premise_relation(E1s, s)
        else:
            nat = naturalize(s, betas)
            branch, r = "naturalized premise", premise_relation(ego0.as_structure(), nat)
        r = _collapse_duplicate_columns(r)
        if not len(r):
            steps.append(NewFromOldStep(s, branch, r, r, []))
            continue
        dom, theta = r, None
        if minimize:
            coords = injective_coordinate_sets(r)
            if coords and len(coords[0]) < r.arity:
                dom = r.project(coords[0])
                theta = bijective_projection(dom, r)
        names = []
        for h in compatible_operations_on(M, dom):
            if h in added.values():
                continue
            if minimize and extends_in_clone(current, h):
                continue
            count += 1
            name = f"n{count}"
            added[name] = h
            names.append(name)
        if names:
            current = ego0.extended(f"{ego0.name}+", operations=added)
        steps.append(NewFromOldStep(s, branch, r, dom, names, theta))
    ego = ego0.extended(f"{ego0.name}+", operations=added)
    return NewFromOldResult(ego, steps)


def check_enrichment(E1, E2, arity_bound=None):
    """Richness of E2 at the relations and domains it adds to E1."""
    rep = DualityReport(f"enrichment {E1.name} -> {E2.name}")
    why = structural_reduct_failure(E1, E2)
    if why is not None:
        raise PreconditionFailure(f"{E1.name} is not a structural reduct of {E2.name}", witness=why[2])
    new = [(s, r) for s, r in sorted(E2.relations.items()) if r not in E1.relations.values()]
    new += [(f"dom {s}", h.domain) for s, h in sorted(E2.operations.items())
            if h not in E1.operations.values()]
    _rich_check(rep, "rich at added relations", E2, new)
    if arity_bound is not None and rep.passed:
        full = check_finite_full_duality(E2, arity_bound)
        rep.extend(full, "cross-check ")
    return rep


def check_embedding_counterexample():
    """A one-element substructure of Q0 whose transfer to Q1 is not a substructure."""
    from .catalog import load_fixture

    Q0 = load_fixture("Q0").payload
    Q1 = load_fixture("Q1").payload
    S0, S1 = Q0.as_structure(), Q1.as_structure()
    a = S0.index["a"]
    rep = DualityReport("embedding counterexample between Q0 and Q1")
    rep.add("{a} is a substructure of Q0", "pass" if is_closed_subset(S0, [a]) else "fail")
    rep.add("{a} is not closed under f in Q1", "fail" if is_closed_subset(S1, [a]) else "pass",
            f"f(a) = {S1.carrier[S1.operations['f'].table[(a,)]]}")
    zero, one = S0.index["0"], S0.index["1"]
    both = is_closed_subset(S0, [zero, one]) and is_closed_subset(S1, [zero, one])
    rep.add("{0, 1} is a substructure of both", "pass" if both else "fail")
    X = substructure(S0, [a])
    TX = transfer_structure(X, Q0, Q1)
    inclusion = (a,)
    morph = inclusion in structure_homs(TX, S1)
    rep.add("transferred inclusion is a one-to-one morphism", "pass" if morph else "fail",
            f"T(X) has f = {TX.operations['f']}")
    rep.add("its image is not a substructure", "fail" if is_closed_subset(S1, list(inclusion)) else "pass")
    return rep
