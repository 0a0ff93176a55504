"""Exact arithmetic for the marked groups used throughout the package.

Every element is a plain hashable value in canonical form, so equality of
elements is equality of representations:

* free products (free groups, ``C2*C3``, ``C2^{*3}``): tuples of
  ``(factor, exponent)`` pairs, fully reduced;
* cyclic groups: integers mod ``k``;
* Heisenberg group: integer triples ``(a, b, c)`` for the upper unitriangular
  matrix with entries ``a`` (1,2), ``b`` (1,3), ``c`` (2,3);
* lamplighter group: ``(n, lamps)`` with ``lamps`` a sorted tuple of ints;
* infinite dihedral group: ``(k, eps)`` for ``r^k s^eps``;
* direct products: pairs; semidirect products ``K |x N``: pairs ``(k, n)``
  standing for the product ``k n``.

Cayley graph edges are ``(x, x*g)``, i.e. generators act on the right.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

__all__ = [
    "GroupError",
    "Group",
    "FreeProduct",
    "Cyclic",
    "DirectProduct",
    "Semidirect",
    "Heisenberg",
    "Lamplighter",
    "InfiniteDihedral",
    "GroupDescriptor",
    "MarkedGroup",
    "PRESETS",
    "make_group",
    "parse_descriptor",
    "multiply",
    "inverse",
    "canonical",
    "semidirect_action",
    "lamplighter_flip",
]


class GroupError(ValueError):
    """Raised for malformed descriptors, bad generating sets or foreign elements."""


class Group:
    """Abstract group with canonical hashable elements."""

    name = "group"

    def identity(self) -> Any:
        raise NotImplementedError

    def mul(self, x, y):
        raise NotImplementedError

    def inv(self, x):
        raise NotImplementedError

    def contains(self, x) -> bool:
        raise NotImplementedError

    def random_element(self, rng, size: int = 4):
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


class FreeProduct(Group):
    """Free product of cyclic factors; order 0 means an infinite cyclic factor."""

    def __init__(self, orders: Sequence[int]):
        if not orders:
            raise GroupError("free product needs at least one factor")
        for k in orders:
            if k < 0 or k == 1:
                raise GroupError(f"bad factor order {k}")
        self.orders = tuple(orders)
        self.name = "*".join("Z" if k == 0 else f"C{k}" for k in self.orders)

    def identity(self):
        return ()

    def _norm(self, f: int, e: int) -> int:
        k = self.orders[f]
        return e % k if k else e

    def mul(self, x, y):
        if not x:
            return y
        if not y:
            return x
        out = list(x)
        for f, e in y:
            if out and out[-1][0] == f:
                ne = self._norm(f, out[-1][1] + e)
                if ne == 0:
                    out.pop()
                else:
                    out[-1] = (f, ne)
            else:
                out.append((f, e))
        return tuple(out)

    def inv(self, x):
        return tuple((f, self._norm(f, -e)) for f, e in reversed(x))

    def contains(self, x) -> bool:
        if not isinstance(x, tuple):
            return False
        prev = None
        for letter in x:
            if not (isinstance(letter, tuple) and len(letter) == 2):
                return False
            f, e = letter
            if not (isinstance(f, int) and 0 <= f < len(self.orders)) or f == prev:
                return False
            if not isinstance(e, int) or e == 0 or self._norm(f, e) != e:
                return False
            prev = f
        return True

    def letter(self, f: int, e: int = 1):
        e = self._norm(f, e)
        return ((f, e),) if e else ()

    def random_element(self, rng, size: int = 4):
        x = ()
        for _ in range(int(rng.integers(0, size + 1))):
            f = int(rng.integers(len(self.orders)))
            k = self.orders[f]
            e = int(rng.integers(1, k)) if k else int(rng.choice([-2, -1, 1, 2]))
            x = self.mul(x, self.letter(f, e))
        return x


class Cyclic(Group):
    def __init__(self, k: int):
        if k < 1:
            raise GroupError("cyclic order must be positive")
        self.k = k
        self.name = f"C{k}"

    def identity(self):
        return 0

    def mul(self, x, y):
        return (x + y) % self.k

    def inv(self, x):
        return (-x) % self.k

    def contains(self, x) -> bool:
        return isinstance(x, int) and 0 <= x < self.k

    def random_element(self, rng, size: int = 4):
        return int(rng.integers(self.k))


class DirectProduct(Group):
    def __init__(self, left: Group, right: Group):
        self.left, self.right = left, right
        self.name = f"({left.name})x({right.name})"

    def identity(self):
        return (self.left.identity(), self.right.identity())

    def mul(self, x, y):
        return (self.left.mul(x[0], y[0]), self.right.mul(x[1], y[1]))

    def inv(self, x):
        return (self.left.inv(x[0]), self.right.inv(x[1]))

    def contains(self, x) -> bool:
        return (isinstance(x, tuple) and len(x) == 2
                and self.left.contains(x[0]) and self.right.contains(x[1]))

    def random_element(self, rng, size: int = 4):
        return (self.left.random_element(rng, size), self.right.random_element(rng, size))


class Semidirect(Group):
    """``K |x N`` with ``k n k^-1 = action(k, n)``; elements are pairs ``(k, n)``.

    ``action`` must be a homomorphism ``K -> Aut(N)``. It is validated on the
    supplied generators at construction.
    """

    def __init__(self, acting: Group, normal: Group, action: Callable,
                 acting_gens: Sequence = (), normal_gens: Sequence = (), name: str = ""):
        self.acting, self.normal, self.action = acting, normal, action
        self.name = name or f"({acting.name})|x({normal.name})"
        self._validate(list(acting_gens), list(normal_gens))

    def _validate(self, kg, ng):
        K, N, act = self.acting, self.normal, self.action
        for n in ng:
            if act(K.identity(), n) != n:
                raise GroupError("action of the identity is not trivial")
        for k in kg:
            for n1 in ng:
                for n2 in ng:
                    if act(k, N.mul(n1, n2)) != N.mul(act(k, n1), act(k, n2)):
                        raise GroupError("action is not a homomorphism of the normal part")
                for k2 in kg:
                    if act(K.mul(k, k2), n1) != act(k, act(k2, n1)):
                        raise GroupError("action is not compatible with the acting group")
                if act(K.inv(k), act(k, n1)) != n1:
                    raise GroupError("action is not invertible")

    def identity(self):
        return (self.acting.identity(), self.normal.identity())

    def mul(self, x, y):
        K, N = self.acting, self.normal
        k1, n1 = x
        k2, n2 = y
        return (K.mul(k1, k2), N.mul(self.action(K.inv(k2), n1), n2))

    def inv(self, x):
        k, n = x
        return (self.acting.inv(k), self.action(k, self.normal.inv(n)))

    def contains(self, x) -> bool:
        return (isinstance(x, tuple) and len(x) == 2
                and self.acting.contains(x[0]) and self.normal.contains(x[1]))

    def random_element(self, rng, size: int = 4):
        return (self.acting.random_element(rng, size), self.normal.random_element(rng, size))


class Heisenberg(Group):
    name = "H3(Z)"

    def identity(self):
        return (0, 0, 0)

    def mul(self, x, y):
        a, b, c = x
        a2, b2, c2 = y
        return (a + a2, b + b2 + a * c2, c + c2)

    def inv(self, x):
        a, b, c = x
        return (-a, a * c - b, -c)

    def contains(self, x) -> bool:
        return isinstance(x, tuple) and len(x) == 3 and all(isinstance(t, int) for t in x)

    def random_element(self, rng, size: int = 4):
        return tuple(int(t) for t in rng.integers(-size, size + 1, 3))


def _symdiff(a: tuple, b) -> tuple:
    return tuple(sorted(set(a).symmetric_difference(b)))


class Lamplighter(Group):
    """``C2 wr Z`` as pairs ``(n, A)``, product ``(n+m, A ^ (n+B))``."""

    name = "C2 wr Z"

    def identity(self):
        return (0, ())

    def mul(self, x, y):
        n, A = x
        m, B = y
        return (n + m, _symdiff(A, [n + b for b in B]))

    def inv(self, x):
        n, A = x
        return (-n, tuple(sorted(a - n for a in A)))

    def contains(self, x) -> bool:
        if not (isinstance(x, tuple) and len(x) == 2 and isinstance(x[0], int)):
            return False
        A = x[1]
        return isinstance(A, tuple) and list(A) == sorted(set(A)) and all(isinstance(a, int) for a in A)

    def random_element(self, rng, size: int = 4):
        n = int(rng.integers(-size, size + 1))
        lamps = {int(a) for a in rng.integers(-size, size + 1, int(rng.integers(0, size + 1)))}
        return (n, tuple(sorted(lamps)))


def lamplighter_flip(x):
    """The involution ``(n, A) -> (-n, {-1-a})`` inverting every DL generator."""
    n, A = x
    return (-n, tuple(sorted(-1 - a for a in A)))


class InfiniteDihedral(Group):
    """``D_inf = <r, s | s^2, srs = r^-1>`` as pairs ``(k, eps)`` for ``r^k s^eps``."""

    name = "D_inf"

    def identity(self):
        return (0, 0)

    def mul(self, x, y):
        k1, e1 = x
        k2, e2 = y
        return (k1 + (-k2 if e1 else k2), e1 ^ e2)

    def inv(self, x):
        k, e = x
        return (k, 1) if e else (-k, 0)

    def contains(self, x) -> bool:
        return isinstance(x, tuple) and len(x) == 2 and isinstance(x[0], int) and x[1] in (0, 1)

    def random_element(self, rng, size: int = 4):
        return (int(rng.integers(-size, size + 1)), int(rng.integers(2)))


# ---------------------------------------------------------------------------
# marked groups


@dataclass(frozen=True)
class GroupDescriptor:
    """``kind`` is one of free, cyclic, free-product, direct-product, preset."""

    kind: str
    params: tuple = ()

    def __str__(self) -> str:
        k, p = self.kind, self.params
        if k == "preset":
            return f"preset:{p[0]}"
        if k == "free":
            return f"free:m={p[0]}"
        if k == "cyclic":
            return f"cyclic:{p[0]}"
        if k == "free-product":
            return "fp:[" + ",".join(p) + "]"
        if k == "direct-product":
            return f"dp:({p[0]})x({p[1]})"
        return f"{k}:{p}"


@dataclass
class MarkedGroup:
    """A group with an ordered, symmetric, labelled generating set."""

    name: str
    group: Group
    gens: list  # [(label, element)]
    pairing: dict = field(default_factory=dict)
    height_fn: Optional[Callable] = None

    def __post_init__(self):
        labels = [lab for lab, _ in self.gens]
        if len(set(labels)) != len(labels):
            raise GroupError("generator labels must be distinct")
        e = self.group.identity()
        elems = [g for _, g in self.gens]
        if any(g == e for g in elems):
            raise GroupError("a generator equals the identity")
        if len(set(elems)) != len(elems):
            raise GroupError("two labels name the same element")
        self.label_of = {g: lab for lab, g in self.gens}
        self.element_of = dict(self.gens)
        if not self.pairing:
            pairing = {}
            for lab, g in self.gens:
                ginv = self.group.inv(g)
                if ginv not in self.label_of:
                    raise GroupError(f"generating set is not symmetric: {lab} has no inverse")
                pairing[lab] = self.label_of[ginv]
            self.pairing = pairing
        for lab, g in self.gens:
            other = self.pairing.get(lab)
            if other is None or self.group.mul(g, self.element_of[other]) != e:
                raise GroupError(f"inverse pairing is inconsistent at {lab}")
        self._right_cache: dict = {}

    # arithmetic -----------------------------------------------------------
    @property
    def labels(self) -> list:
        return [lab for lab, _ in self.gens]

    def identity(self):
        return self.group.identity()

    def mul(self, x, y):
        return self.group.mul(x, y)

    def inv(self, x):
        return self.group.inv(x)

    def gen(self, label):
        try:
            return self.element_of[label]
        except KeyError:
            raise GroupError(f"unknown generator label {label!r}") from None

    def word(self, labels: Sequence) -> Any:
        x = self.identity()
        for lab in labels:
            x = self.group.mul(x, self.gen(lab))
        return x

    def times_label(self, x, label):
        """``x * gen(label)``, memoised (hot path for path products)."""
        key = (x, label)
        c = self._right_cache
        y = c.get(key)
        if y is None:
            y = self.group.mul(x, self.element_of[label])
            if len(c) < 500_000:
                c[key] = y
        return y

    @property
    def degree(self) -> int:
        return len(self.gens)

    @classmethod
    def symmetrize(cls, name: str, group: Group, gens: Sequence) -> "MarkedGroup":
        """Close ``gens`` under inverses, naming missing inverses ``label^-1``."""
        out = list(gens)
        present = {g for _, g in out}
        for lab, g in list(gens):
            ginv = group.inv(g)
            if ginv not in present:
                out.append((f"{lab}^-1", ginv))
                present.add(ginv)
        return cls(name, group, out)


# ---------------------------------------------------------------------------
# presets


def _c2_star3():
    return FreeProduct([2, 2, 2])


def _preset_dinf():
    D = InfiniteDihedral()
    gens = [("r", (1, 0)), ("s", (0, 1)), ("rs", (1, 1)), ("r^-2s", (-2, 1))]
    return MarkedGroup.symmetrize("dinf-grr", D, gens)


def _preset_f2():
    F = FreeProduct([0, 0])
    a, b = F.letter(0), F.letter(1)
    w = lambda *xs: _fold(F, xs)  # noqa: E731
    gens = [("a", a), ("b", b), ("ab", w(a, b)), ("ba", w(b, a)), ("baa", w(b, a, a))]
    return MarkedGroup.symmetrize("f2-grr", F, gens)


def _fold(G: Group, xs):
    out = G.identity()
    for x in xs:
        out = G.mul(out, x)
    return out


HEIS_F = {
    "A": (1, 0, 0),
    "B": (0, 0, 1),
    "A2": (2, 0, 0),
    "A2B": (2, 2, 1),
    "B2": (0, 0, 2),
}


def heisenberg_generators() -> list:
    """``F u F^-1`` for the Heisenberg example, as ``(label, triple)`` pairs."""
    H = Heisenberg()
    out = list(HEIS_F.items())
    out += [(f"{lab}^-1", H.inv(m)) for lab, m in HEIS_F.items()]
    return out


def _preset_heis_c2():
    G = DirectProduct(Cyclic(2), Heisenberg())
    gens = [(f"{a}.{lab}", (a, m)) for a in (0, 1) for lab, m in heisenberg_generators()]
    return MarkedGroup("heis-c2", G, gens)


def _preset_gamma():
    G = DirectProduct(_c2_star3(), Cyclic(3))
    gens = [(f"a{i + 1}", (((i, 1),), 0)) for i in range(3)]
    gens += [("b", ((), 1)), ("b^-1", ((), 2))]
    return MarkedGroup("gamma", G, gens)


def _delta_action(w, n):
    return n if len(w) % 2 == 0 else (-n) % 3


def _preset_delta():
    K = _c2_star3()
    G = Semidirect(K, Cyclic(3), _delta_action,
                   acting_gens=[K.letter(i) for i in range(3)], normal_gens=[1, 2],
                   name="C2^{*3}|xC3")
    gens = [(f"a{i + 1}", (((i, 1),), 0)) for i in range(3)]
    gens += [("b", ((), 1)), ("b^-1", ((), 2))]
    return MarkedGroup("delta", G, gens)


DL_LABELS = {
    "(1,{})": (1, ()),
    "(1,{0})": (1, (0,)),
    "(-1,{})": (-1, ()),
    "(-1,{-1})": (-1, (-1,)),
}


def _preset_lamplighter_dl():
    return MarkedGroup("lamplighter-DL", Lamplighter(), list(DL_LABELS.items()),
                       height_fn=_lamp_height)


def _lamp_height(x) -> int:
    return x[0]


def _flip_action(t, x):
    return lamplighter_flip(x) if t else x


def _preset_lamplighter_ext():
    L = Lamplighter()
    G = Semidirect(Cyclic(2), L, _flip_action, acting_gens=[1],
                   normal_gens=list(DL_LABELS.values()), name="C2|x(C2 wr Z)")
    gens = [(lab, (0, x)) for lab, x in DL_LABELS.items()]
    gens += [("t", (1, L.identity())), ("t(1,{})", (1, (1, ()))), ("t(1,{0})", (1, (1, (0,))))]
    return MarkedGroup("lamplighter-ext", G, gens)


def _preset_c2c3():
    G = FreeProduct([2, 3])
    gens = [("a", G.letter(0)), ("b", G.letter(1, 1)), ("b^-1", G.letter(1, 2))]
    return MarkedGroup("c2*c3", G, gens)


PRESETS: dict[str, Callable[[], MarkedGroup]] = {
    "dinf-grr": _preset_dinf,
    "f2-grr": _preset_f2,
    "heis-c2": _preset_heis_c2,
    "gamma": _preset_gamma,
    "delta": _preset_delta,
    "lamplighter-DL": _preset_lamplighter_dl,
    "lamplighter-ext": _preset_lamplighter_ext,
    "c2*c3": _preset_c2c3,
}


# ---------------------------------------------------------------------------
# descriptors

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def parse_descriptor(text: str) -> GroupDescriptor:
    """Parse ``preset:<name> | free:m=<int> | cyclic:<int> | fp:[..] | dp:(..)x(..)``."""
    text = text.strip()
    kind, sep, rest = text.partition(":")
    if not sep:
        raise GroupError(f"malformed group descriptor {text!r}")
    if kind == "preset":
        if rest not in PRESETS:
            raise GroupError(f"unknown preset {rest!r}")
        return GroupDescriptor("preset", (rest,))
    if kind == "free":
        m = re.fullmatch(r"m=(\d+)", rest)
        if not m or int(m.group(1)) < 1:
            raise GroupError(f"malformed free descriptor {text!r}")
        return GroupDescriptor("free", (int(m.group(1)),))
    if kind == "cyclic":
        if not re.fullmatch(r"\d+", rest) or int(rest) < 2:
            raise GroupError(f"malformed cyclic descriptor {text!r}")
        return GroupDescriptor("cyclic", (int(rest),))
    if kind == "fp":
        m = re.fullmatch(r"\[([^\]]*)\]", rest)
        if not m:
            raise GroupError(f"malformed free-product descriptor {text!r}")
        factors = tuple(f.strip() for f in m.group(1).split(",") if f.strip())
        for f in factors:
            if not re.fullmatch(r"c\d+|f1", f) or f in ("c0", "c1"):
                raise GroupError(f"bad free-product factor {f!r}")
        if not factors:
            raise GroupError("empty free product")
        return GroupDescriptor("free-product", factors)
    if kind == "dp":
        left, right = _split_dp(rest)
        parse_descriptor(left)
        parse_descriptor(right)
        return GroupDescriptor("direct-product", (left, right))
    raise GroupError(f"unknown group kind {kind!r}")


def _split_dp(rest: str) -> tuple[str, str]:
    if not rest.startswith("("):
        raise GroupError(f"malformed direct-product descriptor {rest!r}")
    depth = 0
    for i, ch in enumerate(rest):
        depth += ch == "("
        depth -= ch == ")"
        if depth == 0:
            left = rest[1:i]
            tail = rest[i + 1:]
            if not (tail.startswith("x(") and tail.endswith(")")):
                raise GroupError(f"malformed direct-product descriptor {rest!r}")
            return left, tail[2:-1]
    raise GroupError(f"unbalanced parentheses in {rest!r}")


def _free_product_group(orders, name):
    G = FreeProduct(orders)
    gens = []
    for i, k in enumerate(orders):
        lab = _LETTERS[i] if i < len(_LETTERS) else f"x{i}"
        gens.append((lab, G.letter(i, 1)))
    return MarkedGroup.symmetrize(name, G, gens)


def make_group(spec) -> MarkedGroup:
    """Build a :class:`MarkedGroup` from a descriptor or descriptor string."""
    if isinstance(spec, str):
        spec = parse_descriptor(spec)
    k, p = spec.kind, spec.params
    if k == "preset":
        try:
            return PRESETS[p[0]]()
        except KeyError:
            raise GroupError(f"unknown preset {p[0]!r}") from None
    if k == "free":
        return _free_product_group([0] * p[0], str(spec))
    if k == "cyclic":
        C = Cyclic(p[0])
        return MarkedGroup.symmetrize(str(spec), C, [("g", 1)])
    if k == "free-product":
        orders = [0 if f == "f1" else int(f[1:]) for f in p]
        return _free_product_group(orders, str(spec))
    if k == "direct-product":
        L, R = make_group(p[0]), make_group(p[1])
        G = DirectProduct(L.group, R.group)
        gens = [(f"L.{lab}", (g, R.identity())) for lab, g in L.gens]
        gens += [(f"R.{lab}", (L.identity(), g)) for lab, g in R.gens]
        return MarkedGroup(str(spec), G, gens)
    raise GroupError(f"unknown descriptor kind {k!r}")


# ---------------------------------------------------------------------------
# functional surface


def _check(G: MarkedGroup, *xs):
    for x in xs:
        if not G.group.contains(x):
            raise GroupError(f"{x!r} is not a canonical element of {G.name}")


def multiply(G: MarkedGroup, x, y):
    _check(G, x, y)
    return G.mul(x, y)


def inverse(G: MarkedGroup, x):
    _check(G, x)
    return G.inv(x)


def canonical(G: MarkedGroup, word: Sequence) -> Any:
    return G.word(word)


def semidirect_action(G: MarkedGroup, actor, target):
    """Apply the acting element ``actor`` to the normal-part element ``target``."""
    S = G.group
    if not isinstance(S, Semidirect):
        raise GroupError(f"{G.name} is not a semidirect product")
    if not S.acting.contains(actor) or not S.normal.contains(target):
        raise GroupError("actor/target do not belong to the acting/normal parts")
    return S.action(actor, target)
