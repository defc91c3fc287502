"""Measures on the unit space, the induced arrow measures and the modular cocycle."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, NotQuasiInvariant
from .groupoid import FiniteGroupoid, label

SUPPORT_TOL = 1e-15


class _Undefined:
    """Value of the cocycle off the support of the arrow measure."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "Undefined"

    def __bool__(self):
        return False


Undefined = _Undefined()


class ObjectMeasure:
    """Nonnegative weights on ``G^0``, stored as a vector aligned with ``G.objects``."""

    def __init__(self, groupoid: FiniteGroupoid, weights):
        self.groupoid = groupoid
        if isinstance(weights, dict):
            w = np.zeros(groupoid.n_objects)
            for x, v in weights.items():
                w[groupoid.object_index(x)] = v
        else:
            w = np.asarray(weights, dtype=float).copy()
        if w.shape != (groupoid.n_objects,):
            raise InvalidParams(f"measure needs {groupoid.n_objects} weights")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InvalidParams("measure weights must be finite and nonnegative")
        w[w < SUPPORT_TOL] = 0.0
        w.setflags(write=False)
        self.weights = w

    def __call__(self, x) -> float:
        return float(self.weights[self.groupoid.object_index(x)])

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def is_probability(self, tol=1e-12) -> bool:
        return abs(self.total - 1.0) <= tol

    def normalized(self) -> "ObjectMeasure":
        return ObjectMeasure(self.groupoid, self.weights / self.total)

    @property
    def support_mask(self):
        return self.weights > 0

    def support(self) -> list:
        return [x for x, w in zip(self.groupoid.objects, self.weights) if w > 0]

    def to_json(self):
        return {"mu": {label(x): float(w) for x, w in zip(self.groupoid.objects, self.weights)}}

    def __repr__(self):
        return f"ObjectMeasure({dict(zip(map(label, self.groupoid.objects), self.weights.round(6)))})"


def uniform_measure(G: FiniteGroupoid) -> ObjectMeasure:
    return ObjectMeasure(G, np.full(G.n_objects, 1.0 / G.n_objects))


def measure_from_json(doc, G: FiniteGroupoid) -> ObjectMeasure:
    if isinstance(doc, str):
        doc = json.loads(doc)
    by_label = {label(x): x for x in G.objects}
    w = {}
    for k, v in doc.get("mu", doc).items():
        if k not in by_label:
            raise InvalidParams(f"unknown object {k!r}")
        w[by_label[k]] = float(v)
    return ObjectMeasure(G, w)


@dataclass(frozen=True)
class Induced:
    nu: np.ndarray        # nu({g}) = mu(r(g))
    nu_inv: np.ndarray    # nu^-1({g}) = mu(s(g))
    quasi_invariant: bool

    def __iter__(self):
        return iter((self.nu, self.nu_inv, self.quasi_invariant))


def induce(G: FiniteGroupoid, mu: ObjectMeasure) -> Induced:
    w = mu.weights
    nu = w[np.asarray(G.rng)]
    nu_inv = w[np.asarray(G.src)]
    return Induced(nu, nu_inv, bool(np.array_equal(nu > 0, nu_inv > 0)))


class Cocycle:
    """``D(g) = mu(r(g)) / mu(s(g))`` on the support of ``nu``."""

    def __init__(self, groupoid: FiniteGroupoid, values, defined):
        self.groupoid = groupoid
        self.values = values
        self.defined = defined

    def __call__(self, a):
        i = self.groupoid.arrow_index(a)
        return float(self.values[i]) if self.defined[i] else Undefined

    def as_dict(self) -> dict:
        return {a: float(v) for a, v, d in zip(self.groupoid.arrows, self.values, self.defined) if d}


def cocycle(G: FiniteGroupoid, mu: ObjectMeasure) -> Cocycle:
    ind = induce(G, mu)
    if not ind.quasi_invariant:
        bad = [label(a) for a, n, m in zip(G.arrows, ind.nu, ind.nu_inv) if (n > 0) != (m > 0)]
        raise NotQuasiInvariant(f"nu and nu^-1 have different supports; e.g. at {bad[:3]}")
    defined = ind.nu > 0
    vals = np.ones(G.n_arrows)
    vals[defined] = ind.nu[defined] / ind.nu_inv[defined]
    return Cocycle(G, vals, defined)


def transitive_measure(G: FiniteGroupoid, x) -> ObjectMeasure:
    """Uniform probability on the orbit of ``x``."""
    orb = G.orbit(x)
    return ObjectMeasure(G, {y: 1.0 / len(orb) for y in orb})


def pushforward_density(G: FiniteGroupoid, mu: ObjectMeasure, A) -> dict:
    """``d(theta_A)_* mu / d mu`` on ``r(A)`` where it is defined."""
    out = {}
    for a in A.arrows:
        y, x = G.range(a), G.source(a)
        if mu(y) > 0:
            out[y] = mu(x) / mu(y)
    return out
