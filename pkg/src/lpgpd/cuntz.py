"""The Cuntz inverse semigroup, Leavitt polynomials and truncated regular representations.

Nonzero elements of the Cuntz inverse semigroup are ``s_a s_b^*`` for words
``a, b``; the word pair ``(a, b)`` is the normal form.  Left convolution by
the characteristic function of the slice ``[a, b]`` on ``l^p`` of the arrows
with source ``x`` sends the arrow ``(y, k)`` to
``(a T^{|b|} y, k + |a| - |b|)`` when ``b`` is a prefix of ``y``; here ``T``
is the one-sided shift and arrows ending at ``x`` are recorded by their range
point ``y`` and lag ``k``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetTooSmall, InvalidParams, RelationsViolated
from .lpspace import LpOperator, NormConfig, WeightedLpSpace, op_norm
from .semigroup import Semilattice, SemilatticeRep
from .spatial import lamperti_decompose, spatial_reverse

Word = tuple


@dataclass(frozen=True)
class CuntzWord:
    """``s_a s_b^*``; ``a is None`` encodes the zero element."""

    a: Word | None
    b: Word | None = ()

    @classmethod
    def zero(cls) -> "CuntzWord":
        return cls(None, None)

    @classmethod
    def one(cls) -> "CuntzWord":
        return cls((), ())

    @classmethod
    def gen(cls, j: int, star: bool = False) -> "CuntzWord":
        return cls((), (j,)) if star else cls((j,), ())

    @property
    def is_zero(self) -> bool:
        return self.a is None

    def __mul__(self, other):
        return word_mul(self, other)

    def __repr__(self):
        if self.is_zero:
            return "0"
        if not self.a and not self.b:
            return "1"
        parts = []
        if self.a:
            parts.append("s_" + "".join(map(str, self.a)))
        if self.b:
            parts.append("s_" + "".join(map(str, self.b)) + "*")
        return " ".join(parts)


def word_mul(u: CuntzWord, v: CuntzWord) -> CuntzWord:
    """``(s_a s_b^*)(s_c s_e^*)`` by the prefix rule."""
    if u.is_zero or v.is_zero:
        return CuntzWord.zero()
    a, b = u.a, u.b
    c, e = v.a, v.b
    if c[:len(b)] == b:
        return CuntzWord(a + c[len(b):], e)
    if b[:len(c)] == c:
        return CuntzWord(a, e + b[len(c):])
    return CuntzWord.zero()


def word_star(u: CuntzWord) -> CuntzWord:
    return u if u.is_zero else CuntzWord(u.b, u.a)


class LeavittPolynomial:
    """A finite combination of nonzero Cuntz words; zero terms and zero coefficients are dropped."""

    def __init__(self, d: int, terms=None):
        if d < 1:
            raise InvalidParams("alphabet size must be positive")
        self.d = d
        self.terms: dict[CuntzWord, complex] = {}
        for w, c in (terms or {}).items():
            self._add(w, c)

    def _add(self, w: CuntzWord, c):
        if w.is_zero or c == 0:
            return
        if any(j >= self.d or j < 0 for j in w.a + w.b):
            raise InvalidParams(f"letter out of range in {w!r} for d={self.d}")
        v = self.terms.get(w, 0) + complex(c)
        if v == 0:
            self.terms.pop(w, None)
        else:
            self.terms[w] = v

    @classmethod
    def word(cls, d, w: CuntzWord, c=1.0):
        return cls(d, {w: c})

    @classmethod
    def scalar(cls, d, c):
        return cls(d, {CuntzWord.one(): c})

    def _check(self, other):
        if other.d != self.d:
            raise InvalidParams("polynomials over different alphabets")

    def __add__(self, other):
        if not isinstance(other, LeavittPolynomial):
            return NotImplemented
        self._check(other)
        out = LeavittPolynomial(self.d, self.terms)
        for w, c in other.terms.items():
            out._add(w, c)
        return out

    def __neg__(self):
        return LeavittPolynomial(self.d, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, LeavittPolynomial):
            self._check(other)
            out = LeavittPolynomial(self.d)
            for u, c in self.terms.items():
                for v, e in other.terms.items():
                    out._add(word_mul(u, v), c * e)
            return out
        return LeavittPolynomial(self.d, {w: c * other for w, c in self.terms.items()})

    def __rmul__(self, c):
        return LeavittPolynomial(self.d, {w: c * v for w, v in self.terms.items()})

    def star(self) -> "LeavittPolynomial":
        return LeavittPolynomial(self.d, {word_star(w): np.conj(c) for w, c in self.terms.items()})

    def max_word_length(self) -> int:
        return max((max(len(w.a), len(w.b)) for w in self.terms), default=0)

    def coefficient_sum(self) -> float:
        """``sum |c_w|``; an upper bound for every contractive representation."""
        return float(sum(abs(c) for c in self.terms.values()))

    def __eq__(self, other):
        return isinstance(other, LeavittPolynomial) and self.d == other.d and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({c:g})*{w!r}" for w, c in sorted(self.terms.items(), key=lambda t: (t[0].a, t[0].b)))


# -- eventually periodic points -----------------------------------------------------

def _primitive(period: Word) -> Word:
    n = len(period)
    for k in range(1, n + 1):
        if n % k == 0 and period[:k] * (n // k) == period:
            return period[:k]
    return period


@dataclass(frozen=True)
class EPoint:
    """The infinite word ``prefix period period ...`` in canonical form."""

    prefix: Word
    period: Word

    @classmethod
    def make(cls, prefix, period) -> "EPoint":
        prefix, period = tuple(prefix), _primitive(tuple(period))
        if not period:
            raise InvalidParams("period must be nonempty")
        while prefix and prefix[-1] == period[-1]:
            prefix = prefix[:-1]
            period = (period[-1],) + period[:-1]
        return cls(prefix, period)

    def take(self, n: int) -> Word:
        out = list(self.prefix[:n])
        i = 0
        while len(out) < n:
            out.append(self.period[i % len(self.period)])
            i += 1
        return tuple(out)

    def prepend(self, w: Word) -> "EPoint":
        return EPoint.make(tuple(w) + self.prefix, self.period)

    def shift(self, n: int) -> "EPoint":
        if n <= len(self.prefix):
            return EPoint.make(self.prefix[n:], self.period)
        k = (n - len(self.prefix)) % len(self.period)
        return EPoint.make((), self.period[k:] + self.period[:k])

    def __repr__(self):
        return "".join(map(str, self.prefix)) + "(" + "".join(map(str, self.period)) + ")^w"


def parse_point(s: str) -> EPoint:
    """``"01(10)"`` -> prefix 01, period 10; a bare word is read as its own period."""
    s = s.strip()
    if "(" in s:
        pre, rest = s.split("(", 1)
        per = rest.rstrip(")^wω").rstrip(")")
    else:
        pre, per = "", s
    return EPoint.make(tuple(int(c) for c in pre), tuple(int(c) for c in per))


# -- truncated regular representation ----------------------------------------------

def truncation_index(d: int, x: EPoint, N: int) -> list:
    """Arrows ``(w T^n x, |w| - n)`` with ``|w|, n <= N``, as ``(point, lag)`` pairs, deduplicated."""
    seen, out = set(), []
    for n in range(N + 1):
        tail = x.shift(n)
        for L in range(N + 1):
            for w in itertools.product(range(d), repeat=L):
                key = (tail.prepend(w), L - n)
                if key not in seen:
                    seen.add(key)
                    out.append(key)
    return out


def truncated_ind(d: int, x: EPoint, N: int, f: LeavittPolynomial, p: float, index=None) -> LpOperator:
    """Compression of left convolution by ``f`` to the truncation index set."""
    if f.max_word_length() > N:
        raise BudgetTooSmall(f"word length {f.max_word_length()} exceeds budget N={N}")
    idx = truncation_index(d, x, N) if index is None else index
    pos = {k: i for i, k in enumerate(idx)}
    M = np.zeros((len(idx), len(idx)), dtype=complex)
    for w, c in f.terms.items():
        a, b = w.a, w.b
        for j, (y, k) in enumerate(idx):
            if y.take(len(b)) != b:
                continue
            i = pos.get((y.shift(len(b)).prepend(a), k + len(a) - len(b)))
            if i is not None:
                M[i, j] += c
    return LpOperator(M, WeightedLpSpace(np.ones(len(idx)), p, idx))


@dataclass
class LeavittBounds:
    Ns: list
    values: list
    basepoints: list = field(default_factory=list)   # achieving base point per N
    upper: float = float("inf")


def leavitt_norm_bounds(f: LeavittPolynomial, d: int, p: float, maxN: int, basepoints=None,
                        cfg: NormConfig | None = None) -> LeavittBounds:
    """Lower bounds ``max_x |Ind_N(x) f|`` for ``N`` up to ``maxN``.

    Each estimate is seeded with the previous witness, padded by zeros, so the
    sequence cannot decrease.
    """
    basepoints = basepoints or [EPoint.make((), (0,))]
    start = max(1, f.max_word_length())
    out = LeavittBounds([], [], [], f.coefficient_sum())
    prev = {}
    for N in range(start, maxN + 1):
        best, arg = -1.0, None
        for x in basepoints:
            idx = truncation_index(d, x, N)
            T = truncated_ind(d, x, N, f, p, idx)
            starts = None
            if x in prev:
                old_idx, w = prev[x]
                pos = {k: i for i, k in enumerate(idx)}
                pad = np.zeros(len(idx), dtype=complex)
                for k, c in zip(old_idx, w):
                    pad[pos[k]] = c
                starts = pad[:, None]
            est = op_norm(T, cfg, starts=starts)
            prev[x] = (idx, est.witness)
            if est.value > best:
                best, arg = est.value, x
        out.Ns.append(N)
        # the padded witness keeps the previous ratio up to summation order; carry it
        # forward so rounding cannot make the sequence dip by an ulp
        out.values.append(max(best, out.values[-1]) if out.values else best)
        out.basepoints.append(arg)
    return out


# -- tightness ------------------------------------------------------------------------

def cuntz_semilattice(d: int, N: int):
    """Words of length ``<= N`` plus 0 under the tree order, and the cylinder map into leaves.

    Returns ``(E, beta)`` with ``beta(a)`` the set of length-``N`` words extending ``a``.
    """
    if d < 2 or N < 1:
        raise InvalidParams("need d >= 2 and N >= 1")
    words = [w for L in range(N + 1) for w in itertools.product(range(d), repeat=L)]
    elements = ["0"] + [w for w in words]
    n = len(elements)
    meet = np.zeros((n, n), dtype=np.int64)
    for i in range(1, n):
        for j in range(1, n):
            a, b = elements[i], elements[j]
            if b[:len(a)] == a:
                meet[i, j] = j
            elif a[:len(b)] == b:
                meet[i, j] = i
    leaves = {w: k for k, w in enumerate(itertools.product(range(d), repeat=N))}
    beta = [0]
    for w in words:
        mask = 0
        for leaf, k in leaves.items():
            if leaf[:len(w)] == w:
                mask |= 1 << k
        beta.append(mask)
    E = Semilattice(elements, meet, 0)
    return E, SemilatticeRep(E, len(leaves), beta)


def truncated_shift_generators(d: int, n: int) -> list:
    """``S_j e_k = e_{dk+j}`` when ``dk + j < n``: shift-like, but not isometric at the boundary."""
    out = []
    for j in range(d):
        M = np.zeros((n, n))
        for k in range(n):
            if d * k + j < n:
                M[d * k + j, k] = 1.0
        out.append(M)
    return out


def tight_identity_check(generators, space: WeightedLpSpace, tol: float = 1e-10) -> bool:
    """Evaluate ``sum_j rho(s_j) rho(s_j)^* == 1`` for spatial isometries ``rho(s_j)``.

    Raises RelationsViolated, with a witnessing basis vector, when some
    generator is not a spatial isometry.  Generators with overlapping ranges
    simply fail the identity.
    """
    n = space.dim
    total = np.zeros((n, n), dtype=complex)
    for j, M in enumerate(generators):
        T = LpOperator(M, space)
        try:
            sp = lamperti_decompose(T)
        except Exception as exc:
            raise RelationsViolated(f"rho(s_{j}) is not spatial: {exc}") from None
        lost = sorted(set(range(n)) - sp.E)
        if lost:
            w = np.zeros(n)
            w[lost[0]] = 1.0
            raise RelationsViolated(f"rho(s_{j}) is not an isometry: it kills e_{lost[0]}", witness=w)
        total += M @ spatial_reverse(sp).matrix()
    return bool(np.max(np.abs(total - np.eye(n)), initial=0.0) <= tol)
