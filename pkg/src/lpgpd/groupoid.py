"""Finite groupoids, slices and the inverse semigroup of slices.

A finite groupoid is stored as explicit tables indexed by arrow position:
source, range, inverse, unit and a dense composition table with ``-1``
marking non-composable pairs.  Arrow and object ids are arbitrary hashables;
the builders use ints and tuples of ints.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import CapExceeded, InvalidParams, NotASlice, NotComposable


def label(x) -> str:
    """Compact printable name of an object/arrow id; tuples print as ``(a,b)``."""
    if isinstance(x, tuple):
        return "(" + ",".join(label(e) for e in x) + ")"
    return str(x)


def _frozen(a):
    a = np.asarray(a)
    a.setflags(write=False)
    return a


class FiniteGroupoid:
    """Objects, arrows and their partial composition.

    The constructor does not check the axioms, so that corrupted tables can be
    built and handed to :func:`validate`.
    """

    def __init__(self, objects, arrows, comp, inv, units):
        self.objects = tuple(objects)
        self.arrows = tuple(a for a, _, _ in arrows)
        self._obj_index = {x: i for i, x in enumerate(self.objects)}
        self._arrow_index = {a: i for i, a in enumerate(self.arrows)}
        if len(self._obj_index) != len(self.objects) or len(self._arrow_index) != len(self.arrows):
            raise InvalidParams("duplicate object or arrow ids")
        n = len(self.arrows)
        try:
            self.src = _frozen([self._obj_index[s] for _, s, _ in arrows])
            self.rng = _frozen([self._obj_index[r] for _, _, r in arrows])
        except KeyError as exc:
            raise InvalidParams(f"arrow endpoint {exc.args[0]!r} is not an object") from None
        table = np.full((n, n), -1, dtype=np.int64)
        for (a, b), c in dict(comp).items():
            table[self._arrow_index[a], self._arrow_index[b]] = self._arrow_index[c]
        self.comp = _frozen(table)
        inv = dict(inv)
        self.inv = _frozen([self._arrow_index[inv[a]] if a in inv else -1 for a in self.arrows])
        units = dict(units)
        self.unit = _frozen([self._arrow_index[units[x]] if x in units else -1 for x in self.objects])
        self._pairs = None

    # -- lookups -----------------------------------------------------------
    @property
    def n_arrows(self) -> int:
        return len(self.arrows)

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    def arrow_index(self, a) -> int:
        return self._arrow_index[a]

    def object_index(self, x) -> int:
        return self._obj_index[x]

    def has_arrow(self, a) -> bool:
        return a in self._arrow_index

    def source(self, a):
        return self.objects[self.src[self._arrow_index[a]]]

    def range(self, a):
        return self.objects[self.rng[self._arrow_index[a]]]

    def inverse(self, a):
        return self.arrows[self.inv[self._arrow_index[a]]]

    def unit_of(self, x):
        return self.arrows[self.unit[self._obj_index[x]]]

    def compose(self, g, h):
        """The composite ``g h`` (first ``h``, then ``g``)."""
        i, j = self._arrow_index[g], self._arrow_index[h]
        if self.src[i] != self.rng[j]:
            raise NotComposable(f"s({label(g)}) != r({label(h)})")
        k = self.comp[i, j]
        if k < 0:
            raise NotComposable(f"composition table has no entry for ({label(g)}, {label(h)})")
        return self.arrows[k]

    def range_fiber(self, x) -> list:
        """``xG``: arrows with range ``x``."""
        i = self._obj_index[x]
        return [self.arrows[k] for k in np.flatnonzero(self.rng == i)]

    def source_fiber(self, x) -> list:
        """``Gx``: arrows with source ``x``."""
        i = self._obj_index[x]
        return [self.arrows[k] for k in np.flatnonzero(self.src == i)]

    def orbit(self, x) -> list:
        i = self._obj_index[x]
        hit = set(self.rng[self.src == i].tolist())
        return [self.objects[k] for k in sorted(hit)]

    def orbits(self) -> list[list]:
        seen, out = set(), []
        for x in self.objects:
            if x not in seen:
                orb = self.orbit(x)
                seen.update(orb)
                out.append(orb)
        return out

    def composable_pairs(self):
        """Arrays ``(i, j, k)`` of arrow indices with ``arrows[i] arrows[j] = arrows[k]``."""
        if self._pairs is None:
            i, j = np.nonzero(self.comp >= 0)
            self._pairs = (_frozen(i), _frozen(j), _frozen(self.comp[i, j]))
        return self._pairs

    def __repr__(self):
        return f"FiniteGroupoid({self.n_objects} objects, {self.n_arrows} arrows)"

    # -- serialization -------------------------------------------------------
    def to_json(self) -> dict:
        ids = {a: label(a) for a in self.arrows}
        return {
            "objects": [label(x) for x in self.objects],
            "arrows": [
                {"id": ids[a], "src": label(self.source(a)), "rng": label(self.range(a))}
                for a in self.arrows
            ],
            "comp": [
                [ids[self.arrows[i]], ids[self.arrows[j]], ids[self.arrows[k]]]
                for i, j, k in zip(*self.composable_pairs())
            ],
            "inv": [[ids[a], ids[self.arrows[self.inv[n]]]] for n, a in enumerate(self.arrows)],
            "units": {label(x): ids[self.arrows[self.unit[n]]] for n, x in enumerate(self.objects)},
        }


def from_json(doc) -> FiniteGroupoid:
    """Load the explicit table format, or a builder shorthand ``{"kind": ...}``."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    if "kind" in doc:
        params = {k: v for k, v in doc.items() if k != "kind"}
        if "groupoids" in params:
            params["groupoids"] = [from_json(g) for g in params["groupoids"]]
        if "groupoid" in params:
            params["groupoid"] = from_json(params["groupoid"])
        return build_standard(doc["kind"], **params)
    try:
        objects = list(doc["objects"])
        by_label = {label(x): x for x in objects}

        def obj(v):
            return v if v in by_label.values() else by_label[str(v)]

        return FiniteGroupoid(
            objects,
            [(a["id"], obj(a["src"]), obj(a["rng"])) for a in doc["arrows"]],
            {(a, b): c for a, b, c in doc["comp"]},
            {a: b for a, b in doc["inv"]},
            {obj(x): u for x, u in doc["units"].items()},
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParams(f"malformed groupoid document: {exc}") from None


# -- validation ----------------------------------------------------------------

def validate(G: FiniteGroupoid) -> list[str]:
    """Return a list of violated groupoid axioms (empty when ``G`` is valid)."""
    out = []
    A = G.arrows
    n = G.n_arrows
    src, rng, comp = G.src, G.rng, G.comp
    for x, u in zip(G.objects, G.unit):
        if u < 0:
            out.append(f"unit missing for object {label(x)}")
        elif G.objects[src[u]] != x or G.objects[rng[u]] != x:
            out.append(f"unit {label(A[u])} of {label(x)} does not have src=rng={label(x)}")
    for i in range(n):
        for j in range(n):
            k = comp[i, j]
            composable = src[i] == rng[j]
            if composable and k < 0:
                out.append(f"composition undefined for composable pair ({label(A[i])}, {label(A[j])})")
            elif not composable and k >= 0:
                out.append(f"composition defined for non-composable pair ({label(A[i])}, {label(A[j])})")
            elif k >= 0:
                if rng[k] != rng[i]:
                    out.append(f"range mismatch: r({label(A[i])}{label(A[j])}) != r({label(A[i])})")
                if src[k] != src[j]:
                    out.append(f"source mismatch: s({label(A[i])}{label(A[j])}) != s({label(A[j])})")
    if out:
        return out
    for i in range(n):
        for j in np.flatnonzero(comp[i] >= 0):
            ij = comp[i, j]
            for k in np.flatnonzero(comp[j] >= 0):
                if comp[ij, k] != comp[i, comp[j, k]]:
                    out.append(f"associativity fails on ({label(A[i])}, {label(A[j])}, {label(A[k])})")
    for i in range(n):
        g = G.inv[i]
        if g < 0:
            out.append(f"inverse missing for {label(A[i])}")
            continue
        if G.inv[g] != i:
            out.append(f"inverse is not an involution at {label(A[i])}")
        if comp[i, g] != G.unit[rng[i]]:
            out.append(f"{label(A[i])} composed with its inverse is not the unit at its range")
        if comp[g, i] != G.unit[src[i]]:
            out.append(f"inverse of {label(A[i])} composed with it is not the unit at its source")
        if G.unit[rng[i]] >= 0 and comp[G.unit[rng[i]], i] != i:
            out.append(f"left unit law fails at {label(A[i])}")
        if G.unit[src[i]] >= 0 and comp[i, G.unit[src[i]]] != i:
            out.append(f"right unit law fails at {label(A[i])}")
    return out


# -- builders ------------------------------------------------------------------

def pair_groupoid(labels: Sequence[Hashable]) -> FiniteGroupoid:
    """The transitive principal groupoid on ``labels``: arrows ``(i, j)`` from ``j`` to ``i``."""
    labels = list(labels)
    arrows = [((i, j), j, i) for i in labels for j in labels]
    comp = {((i, j), (j2, k)): (i, k) for i in labels for j in labels for j2 in [j] for k in labels}
    inv = {(i, j): (j, i) for i in labels for j in labels}
    units = {i: (i, i) for i in labels}
    return FiniteGroupoid(labels, arrows, comp, inv, units)


def transitive(n: int) -> FiniteGroupoid:
    """``T_n``: the pair groupoid on ``0..n-1``."""
    if n < 1:
        raise InvalidParams("transitive groupoid needs n >= 1")
    return pair_groupoid(range(n))


def finite_group(table, obj=0) -> FiniteGroupoid:
    """A group given by its multiplication table, as a one-object groupoid.

    ``table[a][b]`` is the product ``ab`` of elements ``0..n-1``.
    """
    T = np.asarray(table)
    n = len(T)
    if T.shape != (n, n) or n == 0 or T.min() < 0 or T.max() >= n:
        raise InvalidParams("group table must be a square table over 0..n-1")
    ids = [e for e in range(n) if all(T[e, a] == a and T[a, e] == a for a in range(n))]
    if len(ids) != 1:
        raise InvalidParams("group table has no two-sided identity")
    e = ids[0]
    if any(T[T[a, b], c] != T[a, T[b, c]] for a in range(n) for b in range(n) for c in range(n)):
        raise InvalidParams("group table is not associative")
    inv = {}
    for a in range(n):
        cands = [b for b in range(n) if T[a, b] == e and T[b, a] == e]
        if not cands:
            raise InvalidParams(f"element {a} has no inverse")
        inv[a] = cands[0]
    arrows = [(a, obj, obj) for a in range(n)]
    comp = {(a, b): int(T[a, b]) for a in range(n) for b in range(n)}
    return FiniteGroupoid([obj], arrows, comp, inv, {obj: e})


def cyclic_group(k: int) -> FiniteGroupoid:
    return finite_group([[(a + b) % k for b in range(k)] for a in range(k)])


def disjoint_union(groupoids: Sequence[FiniteGroupoid], tag: bool = True) -> FiniteGroupoid:
    """Disjoint union; ids become ``(component, id)`` unless ``tag`` is false."""
    def t(c, x):
        return (c, x) if tag else x

    objects, arrows, comp, inv, units = [], [], {}, {}, {}
    for c, G in enumerate(groupoids):
        objects += [t(c, x) for x in G.objects]
        arrows += [(t(c, a), t(c, G.source(a)), t(c, G.range(a))) for a in G.arrows]
        for i, j, k in zip(*G.composable_pairs()):
            comp[t(c, G.arrows[i]), t(c, G.arrows[j])] = t(c, G.arrows[k])
        inv.update({t(c, a): t(c, G.inverse(a)) for a in G.arrows})
        units.update({t(c, x): t(c, G.unit_of(x)) for x in G.objects})
    return FiniteGroupoid(objects, arrows, comp, inv, units)


def units_only(objects: Iterable[Hashable]) -> FiniteGroupoid:
    """The groupoid whose only arrows are units, with unit arrow id equal to the object id."""
    objects = list(objects)
    return FiniteGroupoid(
        objects, [(x, x, x) for x in objects], {(x, x): x for x in objects},
        {x: x for x in objects}, {x: x for x in objects},
    )


def restriction(G: FiniteGroupoid, U: Iterable[Hashable]) -> FiniteGroupoid:
    """``G|_U``: arrows with source and range in ``U``."""
    U = set(U)
    if not U <= set(G.objects):
        raise InvalidParams("restriction set must consist of objects")
    objs = [x for x in G.objects if x in U]
    keep = [a for a in G.arrows if G.source(a) in U and G.range(a) in U]
    kept = set(keep)
    comp = {}
    for i, j, k in zip(*G.composable_pairs()):
        a, b = G.arrows[i], G.arrows[j]
        if a in kept and b in kept:
            comp[a, b] = G.arrows[k]
    return FiniteGroupoid(
        objs, [(a, G.source(a), G.range(a)) for a in keep], comp,
        {a: G.inverse(a) for a in keep}, {x: G.unit_of(x) for x in objs},
    )


def amplify(G: FiniteGroupoid, n: int) -> FiniteGroupoid:
    """``n x G x n`` with ``s(i,g,j) = (s(g), j)``, ``r(i,g,j) = (r(g), i)``.

    Objects are ordered block-major, ``(x, i)`` for ``i`` then ``x``, which
    matches the block order of ``l^p(n, L^p(mu, Z))``.
    """
    if n < 1:
        raise InvalidParams("amplification needs n >= 1")
    objects = [(x, i) for i in range(n) for x in G.objects]
    arrows = [((i, g, j), (G.source(g), j), (G.range(g), i))
              for i in range(n) for g in G.arrows for j in range(n)]
    comp = {}
    pairs = list(zip(*G.composable_pairs()))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for a, b, c in pairs:
                    comp[(i, G.arrows[a], j), (j, G.arrows[b], k)] = (i, G.arrows[c], k)
    inv = {(i, g, j): (j, G.inverse(g), i) for i in range(n) for g in G.arrows for j in range(n)}
    units = {(x, i): (i, G.unit_of(x), i) for i in range(n) for x in G.objects}
    return FiniteGroupoid(objects, arrows, comp, inv, units)


def build_standard(kind: str, **params) -> FiniteGroupoid:
    """Dispatch on ``kind``: transitive, finite_group, cyclic, disjoint_union, restriction, units, amplify."""
    try:
        if kind == "transitive":
            return transitive(int(params["n"]))
        if kind == "finite_group":
            return finite_group(params["table"])
        if kind == "cyclic":
            return cyclic_group(int(params["n"]))
        if kind == "disjoint_union":
            return disjoint_union(params["groupoids"])
        if kind == "restriction":
            return restriction(params["groupoid"], params["objects"])
        if kind == "units":
            return units_only(params["objects"])
        if kind == "amplify":
            return amplify(params["groupoid"], int(params["n"]))
    except KeyError as exc:
        raise InvalidParams(f"missing parameter {exc.args[0]!r} for kind {kind!r}") from None
    raise InvalidParams(f"unknown groupoid kind {kind!r}")


# -- slices --------------------------------------------------------------------

@dataclass(frozen=True)
class Slice:
    groupoid: FiniteGroupoid
    arrows: frozenset

    def __post_init__(self):
        object.__setattr__(self, "arrows", frozenset(self.arrows))

    def is_valid(self) -> bool:
        G = self.groupoid
        if not all(G.has_arrow(a) for a in self.arrows):
            return False
        srcs = [G.source(a) for a in self.arrows]
        rngs = [G.range(a) for a in self.arrows]
        return len(set(srcs)) == len(srcs) and len(set(rngs)) == len(rngs)

    def check(self) -> "Slice":
        if not self.is_valid():
            raise NotASlice(f"{sorted(map(label, self.arrows))} is not a slice")
        return self

    def source_set(self) -> frozenset:
        return frozenset(self.groupoid.source(a) for a in self.arrows)

    def range_set(self) -> frozenset:
        return frozenset(self.groupoid.range(a) for a in self.arrows)

    def is_idempotent(self) -> bool:
        G = self.groupoid
        return all(G.source(a) == G.range(a) and G.unit_of(G.source(a)) == a for a in self.arrows)

    def __repr__(self):
        return "Slice{" + ", ".join(sorted(label(a) for a in self.arrows)) + "}"


def make_slice(G: FiniteGroupoid, arrows) -> Slice:
    return Slice(G, frozenset(arrows)).check()


def unit_slice(G: FiniteGroupoid, U=None) -> Slice:
    """The idempotent slice of units over ``U`` (default: all of ``G^0``)."""
    U = G.objects if U is None else U
    return Slice(G, frozenset(G.unit_of(x) for x in U))


def slice_inverse(A: Slice):
    """Return ``(A^-1, theta_A)`` with ``theta_A`` the bijection ``s(A) -> r(A)``."""
    A.check()
    G = A.groupoid
    inv = Slice(G, frozenset(G.inverse(a) for a in A.arrows))
    theta = {G.source(a): G.range(a) for a in A.arrows}
    return inv, theta


def slice_product(A: Slice, B: Slice) -> Slice:
    G = A.groupoid
    if B.groupoid is not G:
        raise InvalidParams("slices live on different groupoids")
    by_range = {G.range(b): b for b in B.arrows}
    out = set()
    for a in A.arrows:
        b = by_range.get(G.source(a))
        if b is not None:
            out.add(G.compose(a, b))
    return Slice(G, frozenset(out))


def all_slices(G: FiniteGroupoid) -> list[Slice]:
    """Every slice of ``G`` by brute force (exponential; meant for tiny groupoids)."""
    out = []
    for k in range(G.n_objects + 1):
        for combo in itertools.combinations(G.arrows, k):
            S = Slice(G, frozenset(combo))
            if S.is_valid():
                out.append(S)
    return out


def generate_slice_semigroup(G: FiniteGroupoid, generators: Sequence[Slice], cap: int = 10_000):
    """Close ``generators`` and the empty slice under product and inverse.

    Returns a :class:`~lpgpd.semigroup.FiniteInverseSemigroup` whose elements
    are the slices' arrow frozensets; ``slices`` maps them back to
    :class:`Slice` objects.
    """
    from .semigroup import FiniteInverseSemigroup

    for A in generators:
        A.check()
    empty = frozenset()
    elems = {empty: Slice(G, empty)}
    order = [empty]
    frontier = []
    for A in generators:
        for X in (A, slice_inverse(A)[0]):
            if X.arrows not in elems:
                elems[X.arrows] = X
                order.append(X.arrows)
                frontier.append(X.arrows)
    if len(order) > cap:
        raise CapExceeded(f"slice closure exceeds cap={cap}")
    while frontier:
        new = []
        current = list(order)
        for a in frontier:
            for b in current:
                for P in (slice_product(elems[a], elems[b]), slice_product(elems[b], elems[a])):
                    if P.arrows not in elems:
                        elems[P.arrows] = P
                        order.append(P.arrows)
                        new.append(P.arrows)
                        if len(order) > cap:
                            raise CapExceeded(f"slice closure exceeds cap={cap}")
        frontier = new
    idx = {a: i for i, a in enumerate(order)}
    n = len(order)
    mul = np.empty((n, n), dtype=np.int64)
    for i, a in enumerate(order):
        for j, b in enumerate(order):
            mul[i, j] = idx[slice_product(elems[a], elems[b]).arrows]
    star = [idx[slice_inverse(elems[a])[0].arrows] for a in order]
    S = FiniteInverseSemigroup(order, mul, star, zero=0)
    S.slices = [elems[a] for a in order]
    S.groupoid = G
    return S


def singleton_slice_semigroup(G: FiniteGroupoid):
    """The inverse semigroup of singleton slices plus the empty slice.

    In the discrete finite case these form a basis of the topology, which is
    all the disintegration needs; its idempotent semilattice has only
    ``|G^0| + 1`` elements.
    """
    return generate_slice_semigroup(G, [Slice(G, frozenset([a])) for a in G.arrows])
