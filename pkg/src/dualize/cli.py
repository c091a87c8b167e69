"""`dualize` command-line front end.

Exit codes: 0 computed and the property holds, 1 computed and it fails (a
witness is printed), 2 input or usage error, 3 inconclusive at the bound.
Inputs are built-in fixture names or paths to files in the formats of
`dualize.fileformat`."""

import argparse
import json
import os
import sys
from pathlib import Path

from .algebra import hom_vectors, PartialOperation
from .catalog import FIXTURE_NAMES, export_fixture, load_fixture
from .clone import PartialClone, non_extending_homs, structural_reduct_failure
from .definability import (cadef_define, cadef_failure_point, hom_minimal_relations,
                           is_hom_minimal)
from .duality import (_render, build_m_alpha, check_evaluation_isos,
                      check_finite_duality, check_finite_full_duality, run_new_from_old,
                      transfer_structure)
from .errors import BoundExceeded, InputError, PreconditionFailure
from .fileformat import (dump_ego, dump_partial, dump_relation, dump_sentences, dump_structure,
                         load_algebra, load_ego, load_relation, load_sentences, load_structure)
from .uhlogic import canonical_embedding_failure, purify, same_up_to_renaming

SCHEMA = "dualize.cli/1"
OK, FALSE, USAGE, INCONCLUSIVE = 0, 1, 2, 3
VERDICT_CODE = {"pass": OK, "fail": FALSE, "inconclusive": INCONCLUSIVE}


# ---------------------------------------------------------------- input resolution

def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _fixture(name, kind):
    if name in FIXTURE_NAMES:
        fx = load_fixture(name)
        if fx.kind != kind:
            raise InputError(f"fixture {name} is a {fx.kind}, not a {kind}")
        return fx.payload
    return None


def algebra_arg(source):
    fx = _fixture(source, "algebra")
    return fx if fx is not None else load_algebra(_read(source))


def ego_arg(source):
    fx = _fixture(source, "ego")
    if fx is not None:
        return fx
    here = Path(source).parent

    def resolve(name):
        if name in FIXTURE_NAMES:
            return algebra_arg(name)
        for cand in (here / name, here / f"{name}.alg"):
            if cand.is_file():
                return load_algebra(_read(cand))
        raise InputError(f"algebra {name} is neither a fixture nor a file next to {source}")

    return load_ego(_read(source), resolve)


def relation_arg(source, carrier):
    fx = _fixture(source, "relation")
    if fx is not None:
        if fx.carrier != tuple(carrier):
            raise InputError(f"fixture {source} is over a different carrier")
        return source, fx
    return load_relation(_read(source), list(carrier))


def sentences_arg(source, signature=None):
    fx = _fixture(source, "sentences")
    if fx is not None:
        return list(fx)
    return load_sentences(_read(source), signature)


# ---------------------------------------------------------------- verbs

def _names(carrier, vec):
    return " ".join(str(carrier[x]) for x in vec)


def cmd_homs(a):
    M = algebra_arg(a.algebra)
    name, r = relation_arg(a.relation, M.carrier)
    homs = hom_vectors(M, r)
    lines = [f"{len(homs)} homomorphisms from {name} to {M.name}"]
    lines += [_names(M.carrier, v) for v in homs]
    return OK, "\n".join(lines), {"relation": name, "algebra": M.name, "count": len(homs),
                                  "homs": [[M.carrier[x] for x in v] for v in homs]}


def cmd_hom_minimal(a):
    M = algebra_arg(a.algebra)
    if a.relation is None:
        rels = hom_minimal_relations(M, a.arity_bound)
        text = f"{len(rels)} hom-minimal relations of arity at most {a.arity_bound}\n"
        text += "".join(dump_relation(r, f"m{i + 1}") for i, r in enumerate(rels))
        return OK, text.rstrip(), {"count": len(rels),
                                   "relations": [dump_relation(r, f"m{i + 1}") for i, r in enumerate(rels)]}
    name, r = relation_arg(a.relation, M.carrier)
    if is_hom_minimal(M, r):
        return OK, f"{name} is hom-minimal", {"relation": name, "hom_minimal": True}
    cols = {r.column(i) for i in range(r.arity)}
    wit = next((v for v in hom_vectors(M, r) if v not in cols), None)
    text = f"{name} is not hom-minimal"
    out = {"relation": name, "hom_minimal": False}
    if wit is not None:
        h = PartialOperation.on_domain(r, wit)
        text += "\nwitness homomorphism that is not a projection:\n" + dump_partial(h, "w").rstrip()
        out["witness"] = dump_partial(h, "w")
    else:
        text += "\na homomorphism on a subpower of it is not a projection"
    return FALSE, text, out


def cmd_cadef(a):
    E = ego_arg(a.ego)
    name, r = relation_arg(a.relation, E.carrier)
    phi = cadef_define(E, r)
    if phi is not None:
        return OK, f"{name} = {{ ({', '.join(phi.variables)}) : {phi} }}", {"relation": name, "formula": str(phi)}
    pt = cadef_failure_point(E, r)
    wit = None if pt is None else _names(E.carrier, pt)
    return FALSE, (f"{name} is not conjunct-atomic definable in {E.name}\n"
                   f"witness tuple outside {name} satisfying every atom true on {name}: {wit}"), \
        {"relation": name, "formula": None, "witness": wit}


def cmd_clone(a):
    E = ego_arg(a.ego)
    cl = PartialClone(E, a.arity)
    blocks = [f"# {t}\n" + dump_partial(h, f"c{i + 1}") for i, (h, t) in enumerate(cl)]
    text = f"{len(cl)} members of arity {a.arity} in the clone of {E.name}\n" + "".join(blocks)
    return OK, text.rstrip(), {"arity": a.arity, "count": len(cl),
                               "members": [{"term": str(t), "operation": dump_partial(h, "c")}
                                           for h, t in cl]}


def cmd_op_rich(a):
    E = ego_arg(a.ego)
    name, r = relation_arg(a.relation, E.carrier)
    bad = non_extending_homs(E, r)
    if not bad:
        return OK, f"{E.name} is operationally rich at {name}", {"relation": name, "rich": True}
    w = dump_partial(bad[0], "w")
    return FALSE, (f"{E.name} is not operationally rich at {name}\n"
                   f"witness homomorphism with no extension in the clone:\n{w.rstrip()}"), \
        {"relation": name, "rich": False, "witness": w}


def cmd_reduct(a):
    E1, E2 = ego_arg(a.ego), ego_arg(a.of)
    pairs = [(E1, E2), (E2, E1)] if a.equivalent else [(E1, E2)]
    for X, Y in pairs:
        why = structural_reduct_failure(X, Y)
        if why is not None:
            kind, label, obj = why
            w = _render(obj)
            return FALSE, (f"{X.name} is not a structural reduct of {Y.name}: the {kind} {label} "
                           f"is not available\nwitness:\n{w.rstrip()}"), \
                {"holds": False, "reduct": X.name, "of": Y.name, "kind": kind, "symbol": label, "witness": w}
    what = "structurally equivalent to" if a.equivalent else "a structural reduct of"
    return OK, f"{E1.name} is {what} {E2.name}", {"holds": True}


def _purified_labels(labeled):
    out = []
    groups = {}
    for label, s in labeled:
        group = groups.setdefault(label, [])
        group += [p for p in purify(s) if not any(same_up_to_renaming(p, q) for q in group)]
    for label, pure in groups.items():
        if len(pure) == 1:
            out.append((label, pure[0]))
        else:
            out += [(f"{label}{_suffix(i)}", p) for i, p in enumerate(pure)]
    return out


def _suffix(i):
    s = ""
    i += 1
    while i:
        i, rem = divmod(i - 1, 26)
        s = chr(ord("a") + rem) + s
    return s


def cmd_purify(a):
    sig = ego_arg(a.ego).signature if a.ego else None
    labeled = sentences_arg(a.sentences, sig)
    out = _purified_labels(labeled)
    text = dump_sentences(out).rstrip()
    return OK, text, {"sentences": [{"label": lab, "sentence": str(s)} for lab, s in out]}


def cmd_check(a):
    E = ego_arg(a.ego)
    if a.full:
        rep = check_finite_full_duality(E, a.arity_bound)
    else:
        rep = check_finite_duality(E, a.arity_bound)
    if a.direct_size:
        rep.extend(check_evaluation_isos(E, power=a.direct_size), "direct ")
    return VERDICT_CODE[rep.verdict], str(rep), rep.to_json()


def cmd_m_alpha(a):
    M = algebra_arg(a.algebra)
    E = build_m_alpha(M, a.arity_bound, a.cadef_arity, compact=not a.all)
    text = dump_ego(E).rstrip()
    out = {"ego": dump_ego(E)}
    if not a.compare:
        return OK, text, out
    other = ego_arg(a.compare)
    why = structural_reduct_failure(E, other) or structural_reduct_failure(other, E)
    out["equivalent"] = why is None
    if why is None:
        return OK, text + f"\nstructurally equivalent to {other.name}", out
    kind, label, obj = why
    out["witness"] = _render(obj)
    return FALSE, text + f"\nnot structurally equivalent to {other.name}: {kind} {label}\n" \
        + _render(obj).rstrip(), out


def cmd_new_from_old(a):
    M = algebra_arg(a.algebra)
    E0, E1 = ego_arg(a.ego0), ego_arg(a.ego1)
    basis = [s for _, s in sentences_arg(a.sentences, E1.signature)]
    res = run_new_from_old(M, E0, E1, basis, a.arity_bound, minimize=a.minimize)
    lines, steps = [], []
    for st in res.steps:
        lines.append(f"# {st.sentence}  [{st.branch}]")
        if st.added:
            extra = f", projection {st.projection}" if st.projection is not None else ""
            lines.append(f"#   added {', '.join(st.added)} on a domain of arity {st.domain.arity}{extra}")
        else:
            lines.append("#   nothing added")
        steps.append({"sentence": str(st.sentence), "branch": st.branch, "added": st.added,
                      "domain": dump_relation(st.domain, "d"),
                      "projection": None if st.projection is None else list(st.projection)})
    text = "\n".join(lines + [dump_ego(res.ego).rstrip()])
    return OK, text, {"steps": steps, "ego": dump_ego(res.ego)}


def cmd_transfer(a):
    X = load_structure(_read(a.structure))
    src, dst = ego_arg(a.source), ego_arg(a.target)
    Y = transfer_structure(X, src, dst)
    text = dump_structure(Y).rstrip()
    why = canonical_embedding_failure(Y, dst)
    out = {"structure": dump_structure(Y), "in_dual_class": why is None}
    if why is None:
        return OK, text + f"\n# lies in the finite dual class of {dst.name}", out
    out["reason"] = why
    return FALSE, text + f"\n# not in the finite dual class of {dst.name}: {why}", out


def cmd_fixtures(a):
    if a.name:
        if a.name not in FIXTURE_NAMES:
            raise InputError(f"unknown fixture {a.name!r}")
        text = export_fixture(a.name)
        return OK, text.rstrip(), {"name": a.name, "text": text}
    rows = [(n, load_fixture(n)) for n in FIXTURE_NAMES]
    text = "\n".join(f"{n:18} {fx.kind:10} {fx.note}" for n, fx in rows)
    return OK, text, {"fixtures": [{"name": n, "kind": fx.kind, "note": fx.note} for n, fx in rows]}


# ---------------------------------------------------------------- parser

def _positive(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a JSON report")
    common.add_argument("--jobs", type=_positive, default=None,
                        help="worker count (default: DUALIZE_JOBS or 1)")

    p = _Parser(prog="dualize", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def verb(name, fn, help_):
        s = sub.add_parser(name, help=help_, parents=[common])
        s.set_defaults(fn=fn)
        return s

    s = verb("homs", cmd_homs, "homomorphisms from a relation (as a subalgebra) to the algebra")
    s.add_argument("--algebra", required=True)
    s.add_argument("--relation", required=True)

    s = verb("hom-minimal", cmd_hom_minimal, "test or list hom-minimal relations")
    s.add_argument("--algebra", required=True)
    s.add_argument("--relation")
    s.add_argument("--arity-bound", type=_positive, default=2)

    s = verb("cadef", cmd_cadef, "conjunct-atomic definition of a relation in an alter ego")
    s.add_argument("--ego", required=True)
    s.add_argument("--relation", required=True)

    s = verb("clone", cmd_clone, "members of the partial clone of an alter ego")
    s.add_argument("--ego", required=True)
    s.add_argument("--arity", type=int, required=True)

    s = verb("op-rich", cmd_op_rich, "operational richness at a relation")
    s.add_argument("--ego", required=True)
    s.add_argument("--relation", required=True)

    s = verb("reduct", cmd_reduct, "structural reduct or equivalence of alter egos")
    s.add_argument("--ego", required=True)
    s.add_argument("--of", required=True)
    s.add_argument("--equivalent", action="store_true")

    s = verb("purify", cmd_purify, "rewrite universal Horn sentences into pure form")
    s.add_argument("--sentences", required=True)
    s.add_argument("--ego", help="alter ego whose signature the sentences use")

    s = verb("check", cmd_check, "finite-level duality checks")
    s.add_argument("--ego", required=True)
    s.add_argument("--full", action="store_true")
    s.add_argument("--arity-bound", type=_positive, default=2)
    s.add_argument("--direct-size", type=_positive, default=None,
                   help="also verify the evaluation maps on M^k and E^k for this k")

    s = verb("m-alpha", cmd_m_alpha, "the alter ego built from hom-minimal relations")
    s.add_argument("--algebra", required=True)
    s.add_argument("--arity-bound", type=_positive, required=True)
    s.add_argument("--cadef-arity", type=_positive, default=None)
    s.add_argument("--all", action="store_true", help="keep redundant operations")
    s.add_argument("--compare", help="alter ego to test for structural equivalence")

    s = verb("new-from-old", cmd_new_from_old, "add partial operations to a dualising alter ego")
    s.add_argument("--algebra", required=True)
    s.add_argument("--ego0", required=True)
    s.add_argument("--ego1", required=True)
    s.add_argument("--sentences", required=True, help="universal Horn basis of ego1")
    s.add_argument("--arity-bound", type=_positive, default=3)
    s.add_argument("--minimize", action="store_true")

    s = verb("transfer", cmd_transfer, "move a structure from one alter ego's side to another's")
    s.add_argument("--structure", required=True)
    s.add_argument("--from", dest="source", required=True)
    s.add_argument("--to", dest="target", required=True)

    s = verb("fixtures", cmd_fixtures, "list built-in fixtures or print one in file format")
    s.add_argument("name", nargs="?")
    return p


def _jobs(a):
    if a.jobs is not None:
        return a.jobs
    env = os.environ.get("DUALIZE_JOBS")
    if env is None:
        return 1
    try:
        return _positive(env)
    except argparse.ArgumentTypeError as exc:
        raise InputError(f"DUALIZE_JOBS: {exc}") from None


def run(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    want_json = "--json" in (argv if argv is not None else sys.argv[1:])
    try:
        a = build_parser().parse_args(argv)
        _jobs(a)
        code, text, payload = a.fn(a)
    except SystemExit as exc:          # --help
        return exc.code or 0
    except InputError as exc:
        print(f"error: {exc}", file=err)
        return USAGE
    except BoundExceeded as exc:
        print(f"inconclusive: {exc}", file=err)
        if want_json:
            print(json.dumps({"schema": SCHEMA, "verdict": "inconclusive", "detail": str(exc)}), file=out)
        return INCONCLUSIVE
    except PreconditionFailure as exc:
        w = None if exc.witness is None else _render(exc.witness)
        print(f"precondition failed: {exc}", file=err)
        if want_json:
            print(json.dumps({"schema": SCHEMA, "verdict": "fail", "detail": str(exc), "witness": w}), file=out)
        elif w is not None:
            print(w if isinstance(w, str) else json.dumps(w), file=out)
        return FALSE
    if a.json:
        if not isinstance(payload, dict) or payload.get("schema") is None:
            payload = {"schema": SCHEMA, "verb": a.verb, **payload}
        payload.setdefault("exit", code)
        print(json.dumps(payload, indent=2), file=out)
    else:
        print(text, file=out)
    return code


def main():
    sys.exit(run())
