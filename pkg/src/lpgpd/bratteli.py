"""Bratteli diagrams, their level groupoids and spatial AF norms."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .convolution import AlgebraElement
from .errors import InvalidParams, LevelMismatch, LevelOutOfRange
from .groupoid import FiniteGroupoid, disjoint_union, pair_groupoid
from .lpspace import LpOperator, NormConfig, WeightedLpSpace, op_norm


class BratteliDiagram:
    """``levels[k]`` lists vertex names; ``edges[k]`` lists ``(u, v, mult)`` from level ``k`` to ``k+1``."""

    def __init__(self, levels, edges):
        self.levels = [list(lv) for lv in levels]
        self.edges = [[(u, v, int(m)) for u, v, m in lv] for lv in edges]
        if not self.levels or len(self.levels[0]) != 1:
            raise InvalidParams("level 0 must be a single root")
        if len(self.edges) != len(self.levels) - 1:
            raise InvalidParams("need one edge list between consecutive levels")
        for k, lv in enumerate(self.edges):
            src, dst = set(self.levels[k]), set(self.levels[k + 1])
            hit = set()
            for u, v, m in lv:
                if u not in src or v not in dst or m < 1:
                    raise InvalidParams(f"bad edge {(u, v, m)} at level {k}")
                hit.add(v)
            if hit != dst:
                raise InvalidParams(f"vertices {sorted(dst - hit)} at level {k + 1} receive no edge")

    @property
    def depth(self) -> int:
        return len(self.levels)

    def _check_level(self, k):
        if not 0 <= k < self.depth:
            raise LevelOutOfRange(f"level {k} outside 0..{self.depth - 1}")

    def to_json(self):
        return {"levels": self.levels, "edges": [[list(e) for e in lv] for lv in self.edges]}


def diagram_from_json(doc) -> BratteliDiagram:
    if isinstance(doc, str):
        doc = json.loads(doc)
    if "kind" in doc:
        kind, n = doc["kind"], int(doc.get("depth", 4))
        if kind == "fibonacci":
            return fibonacci_diagram(n)
        if kind == "uhf":
            return uhf_diagram(int(doc.get("n", 2)), n)
        if kind == "chain":
            return chain_diagram(n)
        raise InvalidParams(f"unknown diagram kind {kind!r}")
    return BratteliDiagram(doc["levels"], doc["edges"])


def fibonacci_diagram(depth: int) -> BratteliDiagram:
    """Root, then two vertices per level; ``a`` receives from ``a`` and ``b``, ``b`` from ``a``."""
    levels = [["r"]] + [[f"a{k}", f"b{k}"] for k in range(1, depth)]
    edges = []
    if depth > 1:
        edges.append([("r", "a1", 1), ("r", "b1", 1)])
    for k in range(1, depth - 1):
        edges.append([(f"a{k}", f"a{k+1}", 1), (f"b{k}", f"a{k+1}", 1), (f"a{k}", f"b{k+1}", 1)])
    return BratteliDiagram(levels, edges)


def uhf_diagram(n: int, depth: int) -> BratteliDiagram:
    levels = [[f"v{k}"] for k in range(depth)]
    edges = [[(f"v{k}", f"v{k+1}", n)] for k in range(depth - 1)]
    return BratteliDiagram(levels, edges)


def chain_diagram(depth: int) -> BratteliDiagram:
    return uhf_diagram(1, depth)


def multiplicities(D: BratteliDiagram, k: int) -> np.ndarray:
    D._check_level(k)
    n = {D.levels[0][0]: 1}
    for lv in range(k):
        nxt = {v: 0 for v in D.levels[lv + 1]}
        for u, v, m in D.edges[lv]:
            nxt[v] += m * n[u]
        n = nxt
    return np.array([n[v] for v in D.levels[k]], dtype=np.int64)


def paths(D: BratteliDiagram, k: int) -> dict:
    """Paths from the root to each vertex of level ``k`` in embedding order.

    A path is a tuple of ``(edge index, copy)`` steps.  At each level the
    order is by incoming edge, then copy, then the order of the shorter path,
    so that ``embed`` is a plain block-diagonal placement.
    """
    D._check_level(k)
    cur = {D.levels[0][0]: [()]}
    for lv in range(k):
        nxt = {v: [] for v in D.levels[lv + 1]}
        for e, (u, v, m) in enumerate(D.edges[lv]):
            for c in range(m):
                nxt[v] += [pth + ((e, c),) for pth in cur[u]]
        cur = nxt
    return cur


def level_groupoid(D: BratteliDiagram, k: int) -> FiniteGroupoid:
    """Disjoint union over level-``k`` vertices of the pair groupoid on paths ending there."""
    P = paths(D, k)
    return disjoint_union([pair_groupoid(P[v]) for v in D.levels[k]], tag=False)


@dataclass
class TowerElement:
    level: int
    blocks: list   # one square matrix per vertex of the level

    def __matmul__(self, other):
        if other.level != self.level:
            raise LevelMismatch("elements at different levels")
        return TowerElement(self.level, [a @ b for a, b in zip(self.blocks, other.blocks)])


def tower_element(D: BratteliDiagram, k: int, blocks) -> TowerElement:
    n = multiplicities(D, k)
    blocks = [np.asarray(b, dtype=complex).reshape(int(m), int(m)) for b, m in zip(blocks, n)]
    if len(blocks) != len(n):
        raise InvalidParams(f"level {k} has {len(n)} vertices")
    return TowerElement(k, blocks)


def tower_identity(D: BratteliDiagram, k: int) -> TowerElement:
    return TowerElement(k, [np.eye(int(m), dtype=complex) for m in multiplicities(D, k)])


def embed(D: BratteliDiagram, k: int, a: TowerElement) -> TowerElement:
    """Block at ``v`` = block diagonal of the blocks at the sources of ``v``'s incoming edges, with multiplicity."""
    if a.level != k:
        raise LevelMismatch(f"element lives at level {a.level}, not {k}")
    if k + 1 >= D.depth:
        raise LevelOutOfRange(f"no level {k + 1}")
    src = {v: i for i, v in enumerate(D.levels[k])}
    out = []
    for v in D.levels[k + 1]:
        parts = []
        for u, w, m in D.edges[k]:
            if w == v:
                parts += [a.blocks[src[u]]] * m
        size = sum(b.shape[0] for b in parts)
        B = np.zeros((size, size), dtype=complex)
        o = 0
        for b in parts:
            B[o:o + len(b), o:o + len(b)] = b
            o += len(b)
        out.append(B)
    return TowerElement(k + 1, out)


def af_norm(a: TowerElement, p: float, cfg: NormConfig | None = None) -> float:
    """Norm on the ``l^p`` direct sum: the largest block norm."""
    return max(op_norm(LpOperator(B, WeightedLpSpace.unweighted(len(B), p)), cfg).value for B in a.blocks)


def tower_to_algebra(D: BratteliDiagram, a: TowerElement, G: FiniteGroupoid | None = None) -> AlgebraElement:
    """Transport to the convolution algebra of the level groupoid (``f(P_i, P_j) = B[i, j]``)."""
    G = level_groupoid(D, a.level) if G is None else G
    P = paths(D, a.level)
    f = AlgebraElement(G)
    for v, B in zip(D.levels[a.level], a.blocks):
        for i, pi in enumerate(P[v]):
            for j, pj in enumerate(P[v]):
                f.coeffs[G.arrow_index((pi, pj))] = B[i, j]
    return f
