"""Spatial partial isometries of finite weighted L^p spaces.

A spatial partial isometry is a weighted composition operator
``(s xi)(y) = g(y) xi(phi^-1 y)`` with ``phi: E -> F`` a bijection between
index subsets of the domain and codomain, isometric from ``L^p(E)`` onto
``L^p(F)``.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    InvalidParams,
    NotAnIsometryOnSupport,
    NotSpatial,
    SpaceMismatch,
)
from .lpspace import LpOperator, WeightedLpSpace

SPARSITY_TOL = 1e-12
ISOMETRY_RTOL = 1e-10


class SpatialPartialIsometry:
    def __init__(self, dom: WeightedLpSpace, cod: WeightedLpSpace, phi: dict, g: dict, unique=None):
        self.dom = dom
        self.cod = cod
        self.phi = {int(k): int(v) for k, v in phi.items()}
        self.g = {int(k): complex(v) for k, v in g.items()}
        if set(self.g) != set(self.phi.values()) or len(set(self.phi.values())) != len(self.phi):
            raise InvalidParams("phi must be a bijection onto the support of g")
        self.unique = dom.p != 2 if unique is None else unique

    @property
    def E(self) -> frozenset:
        return frozenset(self.phi)

    @property
    def F(self) -> frozenset:
        return frozenset(self.phi.values())

    def matrix(self) -> np.ndarray:
        M = np.zeros((self.cod.dim, self.dom.dim), dtype=complex)
        for x, y in self.phi.items():
            M[y, x] = self.g[y]
        return M

    def operator(self) -> LpOperator:
        return LpOperator(self.matrix(), self.dom, self.cod)

    def isometry_defect(self) -> float:
        """Largest relative failure of ``|g(y)|^p lambda_cod(y) = lambda_dom(phi^-1 y)``."""
        p = self.dom.p
        worst = 0.0
        for x, y in self.phi.items():
            lhs = abs(self.g[y]) ** p * self.cod.weights[y]
            rhs = self.dom.weights[x]
            worst = max(worst, abs(lhs - rhs) / rhs)
        return worst

    def __repr__(self):
        return f"SpatialPartialIsometry(phi={self.phi})"


def spatial_idempotent(space: WeightedLpSpace, support) -> SpatialPartialIsometry:
    """The multiplication operator by the indicator of ``support``."""
    return SpatialPartialIsometry(space, space, {i: i for i in support}, {i: 1.0 for i in support})


def lamperti_decompose(T: LpOperator, require_p_not2: bool = False,
                       tol: float = SPARSITY_TOL, rtol: float = ISOMETRY_RTOL) -> SpatialPartialIsometry:
    """Read ``(E, F, phi, g)`` off the sparsity pattern of ``T`` and check the isometry condition."""
    p = T.p
    if require_p_not2 and p == 2:
        raise InvalidParams("decomposition requested with p != 2 but p = 2")
    M = T.matrix
    mask = np.abs(M) > tol
    rows_bad = np.flatnonzero(mask.sum(axis=1) > 1)
    cols_bad = np.flatnonzero(mask.sum(axis=0) > 1)
    if len(rows_bad) or len(cols_bad):
        where = f"row {rows_bad[0]}" if len(rows_bad) else f"column {cols_bad[0]}"
        raise NotSpatial(f"{where} has more than one nonzero entry")
    ys, xs = np.nonzero(mask)
    phi = {int(x): int(y) for x, y in zip(xs, ys)}
    g = {int(y): M[y, x] for x, y in zip(xs, ys)}
    s = SpatialPartialIsometry(T.dom, T.cod, phi, g)
    for x, y in phi.items():
        lhs = abs(g[y]) ** p * T.cod.weights[y]
        rhs = T.dom.weights[x]
        if abs(lhs - rhs) > rtol * rhs:
            raise NotAnIsometryOnSupport(
                f"|g({y})|^p lambda({y}) = {lhs:.6g} but lambda({x}) = {rhs:.6g}")
    return s


def spatial_reverse(s: SpatialPartialIsometry) -> SpatialPartialIsometry:
    """The reverse ``t``: ``t s`` and ``s t`` are the indicator projections onto ``E`` and ``F``."""
    phi = {y: x for x, y in s.phi.items()}
    g = {x: 1.0 / s.g[y] for x, y in s.phi.items()}
    return SpatialPartialIsometry(s.cod, s.dom, phi, g, s.unique)


def spatial_compose(s: SpatialPartialIsometry, t: SpatialPartialIsometry) -> SpatialPartialIsometry:
    """``s t`` (apply ``t`` first)."""
    if not t.cod.same_as(s.dom):
        raise SpaceMismatch("codomain of the right factor differs from domain of the left factor")
    phi, g = {}, {}
    for x, y in t.phi.items():
        z = s.phi.get(y)
        if z is not None:
            phi[x] = z
            g[z] = s.g[z] * t.g[y]
    return SpatialPartialIsometry(t.dom, s.cod, phi, g, s.unique and t.unique)
