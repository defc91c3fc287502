"""Convolution algebra of a finite groupoid.

Elements are complex coefficient vectors aligned with ``G.arrows``.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import GroupoidMismatch, InvalidParams, ShapeMismatch
from .groupoid import FiniteGroupoid, Slice, amplify, from_json as groupoid_from_json, label


class AlgebraElement:
    __slots__ = ("groupoid", "coeffs")

    def __init__(self, groupoid: FiniteGroupoid, coeffs=None):
        self.groupoid = groupoid
        if coeffs is None:
            coeffs = np.zeros(groupoid.n_arrows, dtype=complex)
        elif isinstance(coeffs, dict):
            vec = np.zeros(groupoid.n_arrows, dtype=complex)
            for a, c in coeffs.items():
                vec[groupoid.arrow_index(a)] += c
            coeffs = vec
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (groupoid.n_arrows,):
            raise ShapeMismatch(f"expected {groupoid.n_arrows} coefficients, got {coeffs.shape}")
        self.coeffs = coeffs

    def __call__(self, a):
        return self.coeffs[self.groupoid.arrow_index(a)]

    def _same(self, other):
        if other.groupoid is not self.groupoid:
            raise GroupoidMismatch("elements live on different groupoids")

    def __add__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        self._same(other)
        return AlgebraElement(self.groupoid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        self._same(other)
        return AlgebraElement(self.groupoid, self.coeffs - other.coeffs)

    def __neg__(self):
        return AlgebraElement(self.groupoid, -self.coeffs)

    def __mul__(self, c):
        if isinstance(c, AlgebraElement):
            return convolve(self, c)
        return AlgebraElement(self.groupoid, self.coeffs * c)

    def __rmul__(self, c):
        return AlgebraElement(self.groupoid, self.coeffs * c)

    def __matmul__(self, other):
        return convolve(self, other)

    def support(self, tol=0.0):
        return [a for a, c in zip(self.groupoid.arrows, self.coeffs) if abs(c) > tol]

    def allclose(self, other, atol=1e-12):
        self._same(other)
        return bool(np.max(np.abs(self.coeffs - other.coeffs), initial=0.0) <= atol)

    def to_json(self) -> dict:
        return {
            "coeffs": {
                label(a): [float(c.real), float(c.imag)]
                for a, c in zip(self.groupoid.arrows, self.coeffs) if c != 0
            }
        }

    def __repr__(self):
        terms = [f"({c:.4g})*{label(a)}" for a, c in zip(self.groupoid.arrows, self.coeffs) if c != 0]
        return "AlgebraElement(" + (" + ".join(terms) or "0") + ")"


def delta(G: FiniteGroupoid, a, c=1.0) -> AlgebraElement:
    f = AlgebraElement(G)
    f.coeffs[G.arrow_index(a)] = c
    return f


def chi(A) -> AlgebraElement:
    """Characteristic function of a slice (or any arrow set given as ``(G, arrows)``)."""
    if isinstance(A, Slice):
        G, arrows = A.groupoid, A.arrows
    else:
        G, arrows = A
    f = AlgebraElement(G)
    for a in arrows:
        f.coeffs[G.arrow_index(a)] = 1.0
    return f


def unit_element(G: FiniteGroupoid) -> AlgebraElement:
    """``chi_{G^0}``, the identity of the convolution algebra."""
    f = AlgebraElement(G)
    f.coeffs[np.asarray(G.unit)] = 1.0
    return f


def convolve(f: AlgebraElement, g: AlgebraElement) -> AlgebraElement:
    """``(f*g)(c) = sum over a b = c of f(a) g(b)``."""
    f._same(g)
    i, j, k = f.groupoid.composable_pairs()
    out = np.zeros(f.groupoid.n_arrows, dtype=complex)
    np.add.at(out, k, f.coeffs[i] * g.coeffs[j])
    return AlgebraElement(f.groupoid, out)


def involute(f: AlgebraElement) -> AlgebraElement:
    G = f.groupoid
    out = np.empty_like(f.coeffs)
    out[np.asarray(G.inv)] = np.conj(f.coeffs)
    return AlgebraElement(G, out)


def i_norm(f) -> float:
    """The I-norm: larger of the sup over objects of range-fibre and source-fibre sums of ``|f|``."""
    if isinstance(f, MatrixElement):
        return i_norm(f.transport())
    G = f.groupoid
    a = np.abs(f.coeffs)
    by_range = np.bincount(G.rng, weights=a, minlength=G.n_objects)
    by_source = np.bincount(G.src, weights=a, minlength=G.n_objects)
    return float(max(by_range.max(initial=0.0), by_source.max(initial=0.0)))


class MatrixElement:
    """An ``n x n`` matrix over the convolution algebra, stored as an ``(n, n, |G|)`` array."""

    def __init__(self, groupoid: FiniteGroupoid, entries):
        self.groupoid = groupoid
        if isinstance(entries, np.ndarray) and entries.ndim == 3:
            arr = np.asarray(entries, dtype=complex)
        else:
            rows = [[e.coeffs if isinstance(e, AlgebraElement) else e for e in row] for row in entries]
            for row in entries:
                for e in row:
                    if isinstance(e, AlgebraElement) and e.groupoid is not groupoid:
                        raise GroupoidMismatch("matrix entries must share the groupoid")
            arr = np.asarray(rows, dtype=complex)
        if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != groupoid.n_arrows:
            raise ShapeMismatch(f"bad matrix element shape {arr.shape}")
        self.entries = arr

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def entry(self, i, j) -> AlgebraElement:
        return AlgebraElement(self.groupoid, self.entries[i, j])

    def __mul__(self, other: "MatrixElement") -> "MatrixElement":
        if other.groupoid is not self.groupoid or other.n != self.n:
            raise GroupoidMismatch("matrix elements do not match")
        i, j, k = self.groupoid.composable_pairs()
        # out[a, c, k] += sum_b self[a, b, i] * other[b, c, j]
        prod = np.einsum("abm,bcm->mac", self.entries[:, :, i], other.entries[:, :, j])
        out = np.zeros((self.groupoid.n_arrows, self.n, self.n), dtype=complex)
        np.add.at(out, k, prod)
        return MatrixElement(self.groupoid, out.transpose(1, 2, 0))

    def star(self) -> "MatrixElement":
        G = self.groupoid
        out = np.empty_like(self.entries)
        out[:, :, np.asarray(G.inv)] = np.conj(self.entries)
        return MatrixElement(G, out.transpose(1, 0, 2))

    def transport(self, Gn: FiniteGroupoid | None = None) -> AlgebraElement:
        """The element of ``C_c(amplify(G, n))`` with value ``f_ij(g)`` at ``(i, g, j)``."""
        G = self.groupoid
        Gn = amplify(G, self.n) if Gn is None else Gn
        out = np.zeros(Gn.n_arrows, dtype=complex)
        for i in range(self.n):
            for j in range(self.n):
                for m, g in enumerate(G.arrows):
                    out[Gn.arrow_index((i, g, j))] = self.entries[i, j, m]
        return AlgebraElement(Gn, out)


def element_from_json(doc, groupoid: FiniteGroupoid | None = None) -> AlgebraElement:
    """Read ``{"groupoid": ..., "coeffs": {"arrowId": [re, im]}}``; ids are matched by label."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    if groupoid is None:
        g = doc.get("groupoid")
        if g is None:
            raise InvalidParams("element document has no groupoid")
        if isinstance(g, str):
            with open(g) as fh:
                g = json.load(fh)
        groupoid = groupoid_from_json(g)
    by_label = {label(a): a for a in groupoid.arrows}
    f = AlgebraElement(groupoid)
    for key, val in doc.get("coeffs", {}).items():
        if key not in by_label:
            raise InvalidParams(f"unknown arrow {key!r}")
        c = complex(val[0], val[1]) if isinstance(val, (list, tuple)) else complex(val)
        f.coeffs[groupoid.arrow_index(by_label[key])] += c
    return f
