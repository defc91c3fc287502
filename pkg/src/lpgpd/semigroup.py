"""Finite inverse semigroups, their idempotent semilattices and tight representations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidParams, NotHermitianIdempotent, TooLarge
from .lpspace import LpOperator, WeightedLpSpace, is_hermitian_idempotent
from .spatial import lamperti_decompose, spatial_reverse

TIGHT_CAP = 16


class FiniteInverseSemigroup:
    """Multiplication table over element indices; ``elements`` are arbitrary labels."""

    def __init__(self, elements, mul, star, zero=0):
        self.elements = list(elements)
        self.mul = np.asarray(mul, dtype=np.int64)
        self.star = np.asarray(star, dtype=np.int64)
        n = len(self.elements)
        if self.mul.shape != (n, n) or self.star.shape != (n,):
            raise InvalidParams("multiplication table / star have the wrong shape")
        if not (0 <= zero < n):
            raise InvalidParams("zero index out of range")
        self.zero = int(zero)
        self._index = {e: i for i, e in enumerate(self.elements)}

    def __len__(self):
        return len(self.elements)

    def index(self, e) -> int:
        return self._index[e]

    def product(self, a: int, b: int) -> int:
        return int(self.mul[a, b])

    def idempotents(self) -> list[int]:
        return [i for i in range(len(self)) if self.mul[i, i] == i]

    def to_json(self) -> dict:
        return {
            "elements": [str(e) for e in self.elements],
            "mul": self.mul.tolist(),
            "star": self.star.tolist(),
            "zero": self.zero,
        }


def semigroup_from_json(doc) -> FiniteInverseSemigroup:
    """``mul`` entries and ``star``/``zero`` may be element names or indices."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    els = list(doc["elements"])
    idx = {e: i for i, e in enumerate(els)}

    def ix(v):
        return idx[v] if v in idx and not isinstance(v, int) else int(v)

    mul = [[ix(v) for v in row] for row in doc["mul"]]
    star = [ix(v) for v in doc["star"]]
    return FiniteInverseSemigroup(els, mul, star, ix(doc.get("zero", 0)))


def symmetric_inverse_monoid(n: int) -> FiniteInverseSemigroup:
    """All partial bijections of ``{0..n-1}``, composed right to left; zero = empty map."""
    import itertools

    maps = []
    for k in range(n + 1):
        for dom in itertools.combinations(range(n), k):
            for img in itertools.permutations(range(n), k):
                maps.append(tuple(sorted(zip(dom, img))))
    maps.sort(key=lambda m: (len(m), m))
    idx = {m: i for i, m in enumerate(maps)}
    mul = np.empty((len(maps), len(maps)), dtype=np.int64)
    for i, a in enumerate(maps):
        da = dict(a)
        for j, b in enumerate(maps):
            c = tuple(sorted((x, da[y]) for x, y in b if y in da))
            mul[i, j] = idx[c]
    star = [idx[tuple(sorted((y, x) for x, y in m))] for m in maps]
    return FiniteInverseSemigroup(maps, mul, star, zero=idx[()])


def validate_inverse_semigroup(S: FiniteInverseSemigroup) -> list[str]:
    out = []
    M = S.mul
    n = len(S)
    if np.any(M < 0) or np.any(M >= n) or np.any(S.star < 0) or np.any(S.star >= n):
        return ["table entries out of range"]
    assoc = M[M[:, :, None], np.arange(n)[None, None, :]] != M[np.arange(n)[:, None, None], M[None, :, :]]
    for a, b, c in zip(*np.nonzero(assoc)):
        out.append(f"associativity fails on ({S.elements[a]}, {S.elements[b]}, {S.elements[c]})")
        break
    z = S.zero
    if np.any(M[z, :] != z) or np.any(M[:, z] != z):
        out.append("zero is not absorbing")
    for s in range(n):
        t = S.star[s]
        if M[M[s, t], s] != s:
            out.append(f"s s* s != s for s = {S.elements[s]}")
        if M[M[t, s], t] != t:
            out.append(f"s* s s* != s* for s = {S.elements[s]}")
        inverses = [u for u in range(n) if M[M[s, u], s] == s and M[M[u, s], u] == u]
        if len(inverses) > 1:
            out.append(f"{S.elements[s]} has {len(inverses)} pseudo-inverses: "
                       f"{[S.elements[u] for u in inverses]}")
    return out


# -- semilattices ---------------------------------------------------------------

class Semilattice:
    """A finite meet-semilattice with minimum ``zero`` given by its meet table."""

    def __init__(self, elements, meet, zero=0):
        self.elements = list(elements)
        self.meet = np.asarray(meet, dtype=np.int64)
        self.zero = int(zero)

    def __len__(self):
        return len(self.elements)

    def leq(self, a, b) -> bool:
        return self.meet[a, b] == a

    def orthogonal(self, a, b) -> bool:
        return self.meet[a, b] == self.zero

    def top(self):
        n = len(self)
        for t in range(n):
            if np.all(self.meet[t] == np.arange(n)):
                return t
        return None

    def validate(self) -> list[str]:
        m, n = self.meet, len(self)
        out = []
        r = np.arange(n)
        if np.any(m[r, r] != r):
            out.append("meet is not idempotent")
        if np.any(m != m.T):
            out.append("meet is not commutative")
        if np.any(m[m[:, :, None], r[None, None, :]] != m[r[:, None, None], m[None, :, :]]):
            out.append("meet is not associative")
        if np.any(m[self.zero] != self.zero):
            out.append("zero is not the minimum")
        return out

    @classmethod
    def from_semigroup(cls, S: FiniteInverseSemigroup) -> "Semilattice":
        E = S.idempotents()
        pos = {e: i for i, e in enumerate(E)}
        meet = [[pos[S.product(a, b)] for b in E] for a in E]
        sl = cls([S.elements[e] for e in E], meet, pos[S.zero])
        sl.semigroup_index = E
        return sl

    @classmethod
    def boolean(cls, k: int) -> "Semilattice":
        """Subsets of ``k`` atoms as bitmasks ``0..2^k-1``; meet is intersection."""
        n = 1 << k
        r = np.arange(n)
        return cls(list(range(n)), r[:, None] & r[None, :], 0)


@dataclass
class SemilatticeRep:
    """``beta``: element index -> subset of ``range(universe)`` encoded as an int bitmask."""

    source: Semilattice
    universe: int
    beta: list

    def validate(self) -> list[str]:
        out = []
        E = self.source
        if self.beta[E.zero] != 0:
            out.append("beta(0) != 0")
        for a in range(len(E)):
            for b in range(len(E)):
                if self.beta[E.meet[a, b]] != self.beta[a] & self.beta[b]:
                    out.append(f"beta does not preserve the meet of {E.elements[a]} and {E.elements[b]}")
                    return out
        return out


@dataclass
class TightResult:
    tight: bool
    counterexample: tuple | None = None  # (X, Y, Z) as lists of element labels
    regular: bool = True
    detail: dict = field(default_factory=dict)

    def __bool__(self):
        return self.tight


def _bits(mask):
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def is_tight_semilattice(rep: SemilatticeRep, cap: int = TIGHT_CAP) -> TightResult:
    """Decide tightness exactly.

    The inequality ``join beta(Z) <= meet beta(X) - join beta(Y)`` always holds,
    so a violation is a point ``w`` of the right side missed by every
    ``beta(z)``.  Adding such a failing cover to ``Y`` leaves ``E^{X,Y}`` with
    no nonzero element, hence ``beta`` is tight iff for every ``x`` (or no
    ``X`` at all) and every point ``w`` of ``beta(x)`` there is a nonzero
    ``z <= x`` orthogonal to all ``y`` with ``w`` outside ``beta(y)``.
    """
    E = rep.source
    n = len(E)
    if n > cap:
        raise TooLarge(f"semilattice has {n} elements, cap is {cap}")
    full = (1 << rep.universe) - 1
    beta = rep.beta
    lab = E.elements
    nonzero = [a for a in range(n) if a != E.zero]
    for x in nonzero + [None]:
        below = [z for z in nonzero if x is None or E.leq(z, x)]
        region = full if x is None else beta[x]
        X = [] if x is None else [lab[x]]
        for w in _bits(region):
            # first try the cover by everything in E^{X,{}} that misses w
            missing = [z for z in below if not beta[z] >> w & 1]
            if below and all(any(E.meet[z, v] != E.zero for z in missing) for v in below):
                return TightResult(False, (X, [], [lab[z] for z in missing]), detail={"point": w})
            Y = [y for y in nonzero if not beta[y] >> w & 1]
            if not any(all(E.orthogonal(z, y) for y in Y) for z in below):
                return TightResult(False, (X, [lab[y] for y in Y], []), detail={"point": w})
    return TightResult(True)


def is_boolean_hom(rep: SemilatticeRep, k: int) -> bool:
    """For ``rep.source = Semilattice.boolean(k)``: does ``beta`` preserve 0, 1, joins and complements?"""
    full = (1 << rep.universe) - 1
    top = (1 << k) - 1
    b = rep.beta
    if b[0] != 0 or b[top] != full:
        return False
    for s in range(top + 1):
        if b[top ^ s] != full ^ b[s]:
            return False
        for t in range(top + 1):
            if b[s | t] != b[s] | b[t] or b[s & t] != b[s] & b[t]:
                return False
    return True


# -- spatial representations ------------------------------------------------------

class SpatialSemigroupRep:
    """``rho``: element index -> matrix on ``space`` (spatial partial isometries)."""

    def __init__(self, semigroup: FiniteInverseSemigroup, space: WeightedLpSpace, matrices: Sequence):
        self.semigroup = semigroup
        self.space = space
        self.matrices = [np.asarray(M, dtype=complex) for M in matrices]
        if len(self.matrices) != len(semigroup):
            raise InvalidParams("need one matrix per semigroup element")

    def operator(self, i) -> LpOperator:
        return LpOperator(self.matrices[i], self.space)

    def validate(self, tol: float = 1e-10) -> list[str]:
        S = self.semigroup
        out = []
        n = len(S)
        spis = []
        for i in range(n):
            try:
                spis.append(lamperti_decompose(self.operator(i)))
            except Exception as exc:
                out.append(f"rho({S.elements[i]}) is not spatial: {exc}")
                spis.append(None)
        if np.max(np.abs(self.matrices[S.zero]), initial=0.0) > tol:
            out.append("rho(0) != 0")
        for a in range(n):
            for b in range(n):
                d = self.matrices[a] @ self.matrices[b] - self.matrices[S.product(a, b)]
                if np.max(np.abs(d), initial=0.0) > tol:
                    out.append(f"rho not multiplicative on ({S.elements[a]}, {S.elements[b]})")
        for a in range(n):
            if spis[a] is None:
                continue
            rev = spatial_reverse(spis[a]).matrix()
            if np.max(np.abs(rev - self.matrices[S.star[a]]), initial=0.0) > tol:
                out.append(f"rho({S.elements[a]}*) is not the reverse of rho({S.elements[a]})")
        return out

    def idempotent_rep(self, tol: float = 1e-12) -> SemilatticeRep:
        """Send each idempotent to the support of its (diagonal 0/1) matrix."""
        S = self.semigroup
        E = Semilattice.from_semigroup(S)
        beta = []
        for e in E.semigroup_index:
            M = self.matrices[e]
            if not is_hermitian_idempotent(M, tol):
                raise NotHermitianIdempotent(f"rho({S.elements[e]}) is not a diagonal 0/1 matrix")
            mask = 0
            for i in np.flatnonzero(np.abs(np.diag(M)) > 0.5):
                mask |= 1 << int(i)
            beta.append(mask)
        return SemilatticeRep(E, self.space.dim, beta)


def is_tight_spatial(rho: SpatialSemigroupRep, cap: int = TIGHT_CAP) -> TightResult:
    """Tightness of the idempotent part; regularity is automatic for finite slices."""
    res = is_tight_semilattice(rho.idempotent_rep(), cap)
    res.regular = True
    return res


def rho_from_pi(pi: Callable, S: FiniteInverseSemigroup) -> SpatialSemigroupRep:
    """``A -> pi(chi_A)`` on a slice semigroup; raises NotSpatial if some image is not spatial."""
    from .convolution import chi

    mats, space = [], None
    for A in S.slices:
        T = pi(chi(A))
        if not isinstance(T, LpOperator):
            raise InvalidParams("pi must return LpOperator values")
        lamperti_decompose(T)
        space = T.dom
        mats.append(T.matrix)
    return SpatialSemigroupRep(S, space, mats)
