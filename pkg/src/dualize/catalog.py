"""Built-in fixtures: the three-element lattice, the four-element quasi-primal
algebra Q, their alter egos, and universal Horn bases."""

from dataclasses import dataclass

from .algebra import FiniteAlgebra, PartialOperation, Relation
from .definability import AlterEgo
from .errors import InputError
from .uhlogic import parse_sentences

THREE = ("0", "a", "1")
FOUR = ("0", "a", "b", "1")


@dataclass(frozen=True)
class Fixture:
    name: str
    kind: str          # algebra | ego | sentences | relation
    payload: object
    note: str

    @property
    def groups(self):
        """Sentence fixtures: label -> list of sentences, in order."""
        if self.kind != "sentences":
            raise InputError(f"{self.name} is not a sentence set")
        out = {}
        for label, s in self.payload:
            out.setdefault(label, []).append(s)
        return out


def _chain(carrier, name, extra=None):
    rank = {x: i for i, x in enumerate(carrier)}
    ops = {
        "join": (2, lambda x, y: max(x, y, key=rank.get)),
        "meet": (2, lambda x, y: min(x, y, key=rank.get)),
        "bot": (0, lambda: carrier[0]),
        "top": (0, lambda: carrier[-1]),
    }
    ops.update(extra or {})
    return FiniteAlgebra.from_functions(name, carrier, ops)


def three():
    return _chain(THREE, "three")


def algebra_Q():
    return _chain(FOUR, "Q", {"t": (3, lambda x, y, z: z if x == y else x)})


def three_ops():
    f = PartialOperation.from_names(THREE, 1, {"0": "0", "a": "0", "1": "1"})
    g = PartialOperation.from_names(THREE, 1, {"0": "0", "a": "1", "1": "1"})
    sigma = PartialOperation.from_names(THREE, 2, {"00": "0", "01": "a", "11": "1"})
    h = PartialOperation.from_names(THREE, 2, {"00": "0", "0a": "a", "a1": "a", "11": "1"})
    return {"f": f, "g": g, "sigma": sigma, "h": h}


def Q_ops():
    f = PartialOperation.from_names(FOUR, 1, {"0": "0", "a": "b", "1": "1"})
    g = PartialOperation.from_names(FOUR, 1, {"0": "0", "b": "a", "1": "1"})
    return {"f": f, "g": g}


R5 = ("00000", "0010a", "011a1", "11111")

SIGMA_BASIS = """\
# f and g are idempotent with a common image
[1] ! v : -> f(v)=f(f(v))
[1] ! v : -> f(v)=g(f(v))
[1] ! v : -> g(v)=f(g(v))
[1] ! v : -> g(v)=g(g(v))
# sigma(u,v) is the element with f-value u and g-value v
[2] ! u v w : f(w)=u & g(w)=v -> sigma(u,v)=w
[2] ! u v w : sigma(u,v)=w -> f(w)=u
[2] ! u v w : sigma(u,v)=w -> g(w)=v
[3] ! u v : def sigma(u,v) & def sigma(v,u) -> u=v
[4] ! u v w : def sigma(u,v) & def sigma(v,w) -> def sigma(u,w)
"""

Q1_BASIS = """\
[1] ! u v : f(u)=v -> g(v)=u
[2] ! u v : g(u)=v -> f(v)=u
[3] ! u v w : f(u)=v & f(v)=w -> u=v
"""

SENTENCE_4_PRIME = """\
[4'] ! u v w x y : f(x)=u & g(x)=v & f(y)=v & g(y)=w -> def sigma(u,w)
"""

H_SENTENCES = """\
[5] ! x y : g(x)=f(y) -> def h(x,y)
[6] ! x y : def h(x,y) -> f(h(x,y))=f(x)
[7] ! x y : def h(x,y) -> g(h(x,y))=g(y)
[sep] ! u v : f(u)=f(v) & g(u)=g(v) -> u=v
"""

SIGNATURE_3 = {"f": ("op", 1), "g": ("op", 1), "sigma": ("op", 2), "h": ("op", 2)}
SIGNATURE_Q = {"f": ("op", 1), "g": ("op", 1), "graph_f": ("rel", 2)}


def _build(name):
    if name == "three":
        return Fixture(name, "algebra", three(), "bounded lattice on the chain 0 < a < 1")
    if name == "Q":
        return Fixture(name, "algebra", algebra_Q(),
                       "bounded lattice 0 < a < b < 1 with the ternary discriminator t")
    if name in ("three0", "three_sigma", "three_h", "three_empty"):
        ops = three_ops()
        keep = {"three0": "fg", "three_sigma": ("f", "g", "sigma"), "three_h": ("f", "g", "h"),
                "three_empty": ()}[name]
        ego = AlterEgo(name, three(), {k: ops[k] for k in keep})
        return Fixture(name, "ego", ego, f"alter ego on three with operations {', '.join(keep) or 'none'}")
    if name == "Q0":
        ego = AlterEgo(name, algebra_Q(), relations={"graph_f": Q_ops()["f"].graph})
        return Fixture(name, "ego", ego, "alter ego on Q with the graph of f as its only relation")
    if name == "Q1":
        return Fixture(name, "ego", AlterEgo(name, algebra_Q(), Q_ops()),
                       "alter ego on Q with the partial automorphisms f and g")
    if name == "sigma_basis_three":
        return Fixture(name, "sentences", parse_sentences(SIGMA_BASIS, SIGNATURE_3),
                       "universal Horn basis of three_sigma, grouped in four labels")
    if name == "basis_Q1":
        return Fixture(name, "sentences", parse_sentences(Q1_BASIS, SIGNATURE_Q),
                       "universal Horn basis of Q1")
    if name == "sentence_4prime":
        return Fixture(name, "sentences", parse_sentences(SENTENCE_4_PRIME, SIGNATURE_3),
                       "sentence 4 of the sigma basis rewritten with f and g premises")
    if name == "h_sentences":
        return Fixture(name, "sentences", parse_sentences(H_SENTENCES, SIGNATURE_3),
                       "sentences true in three_h describing h, plus separation by f and g")
    if name == "r5":
        return Fixture(name, "relation", Relation.from_names(THREE, 5, R5),
                       "5-ary relation defined by the premise of sentence 4'")
    raise InputError(f"unknown fixture {name!r}; known: {', '.join(FIXTURE_NAMES)}")


FIXTURE_NAMES = ("three", "three0", "three_sigma", "three_h", "three_empty", "Q", "Q0", "Q1",
                 "sigma_basis_three", "basis_Q1", "sentence_4prime", "h_sentences", "r5")

_cache = {}


def load_fixture(name):
    if name not in _cache:
        _cache[name] = _build(name)
    return _cache[name]


def sentences(name):
    return [s for _, s in load_fixture(name).payload]


def export_fixture(name):
    """DSL text for a fixture (see fileformat for the grammar)."""
    from .fileformat import dump_algebra, dump_ego, dump_relation, dump_sentences

    fx = load_fixture(name)
    if fx.kind == "algebra":
        return dump_algebra(fx.payload)
    if fx.kind == "ego":
        return dump_ego(fx.payload)
    if fx.kind == "relation":
        return dump_relation(fx.payload, name)
    return dump_sentences(fx.payload)
