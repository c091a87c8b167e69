"""Line-oriented text formats for algebras, alter egos, structures and relations.

    algebra three
    elements 0 a 1
    op join 2
    0 0 -> 0
    ...
    op bot 0
    -> 0

    ego three_h over three
    partial h 2
    0 0 -> 0
    relation leq 2
    0 a

    structure X
    signature op:f:1 rel:r:2
    elements x y
    partial f 1
    x -> y
    relation r 2
    x x

    relation r5 5
    0 0 0 0 0
    0010a          # compact form when every element name is one character

Blank lines and `#` comments are ignored.  Several blocks may share a file.
"""

import itertools

import numpy as np

from .algebra import FiniteAlgebra, FiniteStructure, PartialOperation, Relation
from .errors import InputError
from .uhlogic import parse_sentences, print_sentence


def _lines(text):
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield n, line.split()


def _blocks(text):
    """Split into top-level blocks: (kind, header tokens, line number, body lines)."""
    blocks = []
    for n, toks in _lines(text):
        loose = toks[0] in ("relation", "partial") and (not blocks or blocks[-1][0] in ("relation", "partial"))
        if toks[0] in ("algebra", "ego", "structure") or loose:
            blocks.append((toks[0], toks, n, []))
        elif not blocks:
            raise InputError(f"line {n}: expected algebra, ego, structure or relation header")
        else:
            blocks[-1][3].append((n, toks))
    return blocks


def _split_tuple(tokens, arity, n):
    if len(tokens) == 1 and arity > 1 and len(tokens[0]) == arity:
        return list(tokens[0])
    if len(tokens) != arity:
        raise InputError(f"line {n}: expected {arity} elements, found {len(tokens)}")
    return tokens


def _position(carrier, name, n):
    try:
        return carrier.index(name)
    except ValueError:
        raise InputError(f"line {n}: unknown element {name!r}") from None


def _arity(tok, n):
    try:
        k = int(tok)
    except ValueError:
        raise InputError(f"line {n}: arity must be an integer, found {tok!r}") from None
    if k < 0:
        raise InputError(f"line {n}: negative arity")
    return k


def _sections(body, carrier):
    """Parse `op`/`partial`/`relation` sections into (kind, name, arity, items)."""
    out = []
    for n, toks in body:
        if toks[0] in ("op", "partial", "relation"):
            if len(toks) != 3:
                raise InputError(f"line {n}: expected `{toks[0]} <name> <arity>`")
            out.append([toks[0], toks[1], _arity(toks[2], n), [], n])
            continue
        if not out:
            raise InputError(f"line {n}: table line outside a section")
        kind, name, k, items, _ = out[-1]
        if kind == "relation":
            items.append(tuple(_position(carrier, x, n) for x in _split_tuple(toks, k, n)))
        else:
            if "->" not in toks:
                raise InputError(f"line {n}: table lines look like `a1 ... ak -> v`")
            i = toks.index("->")
            args = _split_tuple(toks[:i], k, n) if k else toks[:i]
            if k == 0 and args:
                raise InputError(f"line {n}: nullary table line must be `-> v`")
            if len(toks) != i + 2:
                raise InputError(f"line {n}: exactly one value after `->`")
            items.append((tuple(_position(carrier, x, n) for x in args), _position(carrier, toks[i + 1], n)))
    return out


def load_algebra(text):
    algs = [b for b in _blocks(text) if b[0] == "algebra"]
    if not algs:
        raise InputError("no algebra block found")
    return _algebra_from_block(algs[0])


def _algebra_from_block(block):
    _, head, n0, body = block
    if len(head) != 2:
        raise InputError(f"line {n0}: expected `algebra <name>`")
    if not body or body[0][1][0] != "elements":
        raise InputError(f"line {n0}: an `elements` line must follow the header")
    carrier = body[0][1][1:]
    if len(set(carrier)) != len(carrier):
        raise InputError(f"line {body[0][0]}: repeated element names")
    tables = {}
    for kind, name, k, items, n in _sections(body[1:], carrier):
        if kind != "op":
            raise InputError(f"line {n}: algebras only have `op` sections")
        arr = np.full((len(carrier),) * k, -1, dtype=np.int64)
        for args, v in items:
            arr[args] = v
        if (arr < 0).any():
            raise InputError(f"line {n}: operation {name} is not total")
        tables[name] = arr
    return FiniteAlgebra(head[1], carrier, tables)


def load_ego(text, resolve_algebra):
    """Parse an ego block; `over <name>` is looked up in the same file first,
    then through `resolve_algebra(name)`."""
    from .definability import AlterEgo

    blocks = _blocks(text)
    local = {b[1][1]: _algebra_from_block(b) for b in blocks if b[0] == "algebra" and len(b[1]) > 1}
    egos = [b for b in blocks if b[0] == "ego"]
    if not egos:
        raise InputError("no ego block found")
    _, head, n0, body = egos[0]
    if len(head) != 4 or head[2] != "over":
        raise InputError(f"line {n0}: expected `ego <name> over <algebra>`")
    M = local.get(head[3]) or resolve_algebra(head[3])
    ops, rels = {}, {}
    for kind, name, k, items, n in _sections(body, M.carrier):
        if kind == "relation":
            rels[name] = Relation(M.carrier, k, items)
        elif kind == "partial":
            ops[name] = PartialOperation(M.carrier, k, tuple(items))
        else:
            raise InputError(f"line {n}: egos have `partial` and `relation` sections")
    return AlterEgo(head[1], M, ops, rels)


def load_structure(text):
    blocks = [b for b in _blocks(text) if b[0] == "structure"]
    if not blocks:
        raise InputError("no structure block found")
    _, head, n0, body = blocks[0]
    if not body or body[0][1][0] != "signature":
        raise InputError(f"line {n0}: a `signature` line must follow the header")
    sig = {}
    for tok in body[0][1][1:]:
        parts = tok.split(":")
        if len(parts) != 3 or parts[0] not in ("op", "rel"):
            raise InputError(f"line {body[0][0]}: signature entries look like op:f:1 or rel:r:2")
        sig[parts[1]] = (parts[0], _arity(parts[2], body[0][0]))
    if len(body) < 2 or body[1][1][0] != "elements":
        raise InputError(f"line {n0}: an `elements` line must follow the signature")
    carrier = body[1][1][1:]
    ops, rels = {}, {}
    for kind, name, k, items, n in _sections(body[2:], carrier):
        if name not in sig:
            raise InputError(f"line {n}: symbol {name} is not in the signature")
        want = "rel" if kind == "relation" else "op"
        if sig[name] != (want, k):
            raise InputError(f"line {n}: {name} declared as {sig[name]}")
        if kind == "relation":
            rels[name] = Relation(carrier, k, items)
        else:
            ops[name] = PartialOperation(carrier, k, tuple(items))
    for name, (kind, k) in sig.items():
        if kind == "rel":
            rels.setdefault(name, Relation(carrier, k, ()))
        else:
            ops.setdefault(name, PartialOperation(carrier, k, ()))
    name = head[1] if len(head) > 1 else ""
    return FiniteStructure(carrier, rels, ops, name=name)


def load_relation(text, carrier):
    """Parse the first relation block over the given carrier."""
    for kind, head, n0, body in _blocks(text):
        if kind != "relation":
            continue
        if len(head) != 3:
            raise InputError(f"line {n0}: expected `relation <name> <arity>`")
        k = _arity(head[2], n0)
        rows = [tuple(_position(carrier, x, n) for x in _split_tuple(toks, k, n)) for n, toks in body]
        return head[1], Relation(tuple(carrier), k, rows)
    raise InputError("no relation block found")


def load_partial(text, carrier):
    """Parse the first standalone `partial` block over the given carrier."""
    for kind, head, n0, body in _blocks(text):
        if kind == "partial":
            (_, name, k, items, _), = _sections([(n0, head)] + body, list(carrier))
            return name, PartialOperation(tuple(carrier), k, tuple(items))
    raise InputError("no partial operation block found")


def load_sentences(text, signature=None):
    return parse_sentences(text, signature)


# ---------------------------------------------------------------- writers

def _row(carrier, t):
    return " ".join(str(carrier[i]) for i in t)


def dump_algebra(M):
    out = [f"algebra {M.name}", "elements " + " ".join(map(str, M.carrier))]
    for op, table in M.tables.items():
        k = table.ndim
        out.append(f"op {op} {k}")
        for args in itertools.product(range(M.size), repeat=k):
            lhs = _row(M.carrier, args)
            out.append(f"{lhs} -> {M.carrier[int(table[args])]}".lstrip())
    return "\n".join(out) + "\n"


def _dump_symbols(carrier, operations, relations, op_word):
    out = []
    for sym, h in operations.items():
        out.append(f"{op_word} {sym} {h.arity}")
        for args, v in h.items:
            out.append(f"{_row(carrier, args)} -> {carrier[v]}".lstrip())
    for sym, r in relations.items():
        out.append(f"relation {sym} {r.arity}")
        out += [_row(carrier, t) for t in r.tuples]
    return out


def dump_ego(E, with_algebra=False):
    out = [dump_algebra(E.base).rstrip()] if with_algebra else []
    out.append(f"ego {E.name} over {E.base.name}")
    out += _dump_symbols(E.carrier, E.operations, E.relations, "partial")
    return "\n".join(out) + "\n"


def dump_structure(X):
    sig = " ".join(f"{kind}:{sym}:{k}" for sym, (kind, k) in sorted(X.signature.items()))
    out = [f"structure {X.name or 'X'}", f"signature {sig}".rstrip(),
           "elements " + " ".join(_element_name(e) for e in X.carrier)]
    carrier = tuple(_element_name(e) for e in X.carrier)
    out += _dump_symbols(carrier, X.operations, X.relations, "partial")
    return "\n".join(out) + "\n"


def _element_name(e):
    if isinstance(e, tuple):
        return "".join(map(str, e)) if all(len(str(x)) == 1 for x in e) else "_".join(map(str, e))
    return str(e)


def dump_relation(r, name="r"):
    return "\n".join([f"relation {name} {r.arity}"] + [_row(r.carrier, t) for t in r.tuples]) + "\n"


def dump_partial(h, name="h"):
    return "\n".join([f"partial {name} {h.arity}"] + _dump_symbols(h.carrier, {name: h}, {}, "partial")[1:]) + "\n"


def dump_sentences(labeled):
    return "\n".join(f"[{label}] {print_sentence(s)}" for label, s in labeled) + "\n"
