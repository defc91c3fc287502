"""Finite weighted L^p spaces, operators between them and p-norm estimation.

Norm estimation for general p uses the p-norm power method (Boyd's
iteration): from ``x`` form ``y = A x``, map ``y`` to its norming functional,
pull back with ``A^H`` and map to the dual unit sphere.  The estimate is
nondecreasing along the iteration and every returned value is realised by
the returned witness, so it is always a lower bound.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ExponentMismatch,
    InvalidParams,
    ShapeMismatch,
    ZeroSecondArgument,
)


def conjugate_exponent(p: float) -> float:
    return p / (p - 1.0)


class WeightedLpSpace:
    """``L^p`` of a finite measure space with positive point masses ``weights``."""

    def __init__(self, weights, p: float, labels=None):
        w = np.asarray(weights, dtype=float).reshape(-1).copy()
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise InvalidParams("weights must be positive and finite")
        p = float(p)
        if not (1.0 < p < np.inf):
            raise InvalidParams(f"exponent must lie in (1, inf), got {p}")
        w.setflags(write=False)
        self.weights = w
        self.p = p
        self.labels = list(labels) if labels is not None else None

    @classmethod
    def unweighted(cls, n: int, p: float) -> "WeightedLpSpace":
        return cls(np.ones(n), p)

    @property
    def dim(self) -> int:
        return len(self.weights)

    @property
    def q(self) -> float:
        return conjugate_exponent(self.p)

    def dual(self) -> "WeightedLpSpace":
        return WeightedLpSpace(self.weights, self.q, self.labels)

    def with_p(self, p) -> "WeightedLpSpace":
        return WeightedLpSpace(self.weights, p, self.labels)

    def norm(self, xi) -> float:
        xi = np.asarray(xi)
        return float(np.sum(np.abs(xi) ** self.p * self.weights) ** (1.0 / self.p))

    def pairing(self, xi, eta) -> complex:
        """``<xi, eta> = sum xi conj(eta) lambda`` between ``L^p`` and ``L^p'``."""
        return complex(np.sum(np.asarray(xi) * np.conj(eta) * self.weights))

    def same_as(self, other: "WeightedLpSpace") -> bool:
        return self.p == other.p and np.array_equal(self.weights, other.weights)

    def __repr__(self):
        return f"WeightedLpSpace(dim={self.dim}, p={self.p:g})"


class LpOperator:
    def __init__(self, matrix, dom: WeightedLpSpace, cod: WeightedLpSpace | None = None):
        cod = dom if cod is None else cod
        M = np.asarray(matrix, dtype=complex)
        if M.shape != (cod.dim, dom.dim):
            raise ShapeMismatch(f"matrix shape {M.shape} does not match spaces ({cod.dim}, {dom.dim})")
        self.matrix = M
        self.dom = dom
        self.cod = cod

    @property
    def p(self) -> float:
        if self.dom.p != self.cod.p:
            raise ExponentMismatch(f"domain p={self.dom.p} but codomain p={self.cod.p}")
        return self.dom.p

    def __matmul__(self, other: "LpOperator") -> "LpOperator":
        if other.cod.dim != self.dom.dim:
            raise ShapeMismatch("operators cannot be composed")
        return LpOperator(self.matrix @ other.matrix, other.dom, self.cod)

    def apply(self, xi):
        return self.matrix @ np.asarray(xi)

    def dual(self) -> "LpOperator":
        return dual_operator(self)

    def __repr__(self):
        return f"LpOperator({self.cod.dim}x{self.dom.dim}, p={self.dom.p:g})"


def operator_from_json(doc) -> LpOperator:
    if isinstance(doc, str):
        doc = json.loads(doc)
    sp = doc["space"]
    M = np.asarray(doc["matrix"], dtype=float)
    M = M[..., 0] + 1j * M[..., 1] if M.ndim == 3 else M.astype(complex)
    dom = WeightedLpSpace(sp.get("weights", np.ones(M.shape[1])), sp["p"])
    csp = doc.get("codomain", sp)
    cod = WeightedLpSpace(csp.get("weights", np.ones(M.shape[0])), csp.get("p", sp["p"]))
    return LpOperator(M, dom, cod)


def dual_operator(T: LpOperator) -> LpOperator:
    """``T' = Lambda_dom^{-1} T^H Lambda_cod`` acting ``cod' -> dom'``."""
    M = (T.matrix.conj().T * T.cod.weights[None, :]) / T.dom.weights[:, None]
    return LpOperator(M, T.cod.dual(), T.dom.dual())


def semi_inner_product(f, g, space: WeightedLpSpace) -> complex:
    """``[f, g] = |g|_p^{2-p} sum f conj(g) |g|^{p-2} lambda``, with ``0 |0|^{p-2} = 0``."""
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    ng = space.norm(g)
    if ng == 0:
        raise ZeroSecondArgument("second argument of the semi-inner product is zero")
    a = np.abs(g)
    nz = a > 0
    w = np.zeros(len(g))
    w[nz] = a[nz] ** (space.p - 2.0)
    return complex(ng ** (2.0 - space.p) * np.sum(f * np.conj(g) * w * space.weights))


# -- norm estimation -----------------------------------------------------------

@dataclass
class NormConfig:
    restarts: int = 32
    tol: float = 1e-10
    max_iter: int = 10_000
    seed: int = 0


@dataclass
class NormEstimate:
    value: float
    witness: np.ndarray
    converged: bool
    restarts: int
    argmax: object = None
    iterations: int = 0
    extra: dict = field(default_factory=dict)

    def __float__(self):
        return self.value


def _phase(z):
    a = np.abs(z)
    out = np.zeros_like(z)
    nz = a > 0
    out[nz] = z[nz] / a[nz]
    return out


def _pnorm_cols(X, p):
    return np.sum(np.abs(X) ** p, axis=0) ** (1.0 / p)


def _dual_vec(Y, p):
    """Columnwise norming functional: ``|y|^{p-1} sgn(y) / |y|_p^{p-1}`` (unit in ``l^p'``)."""
    n = _pnorm_cols(Y, p)
    n = np.where(n > 0, n, 1.0)
    return np.abs(Y / n) ** (p - 1.0) * _phase(Y)


def _components(A, thresh=0.0):
    """Connected components of the row/column incidence graph of ``A``."""
    m, n = A.shape
    nz = np.abs(A) > thresh
    parent = list(range(m + n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    rows, cols = np.nonzero(nz)
    for r, c in zip(rows, cols):
        ra, rb = find(r), find(m + c)
        if ra != rb:
            parent[ra] = rb
    groups = {}
    for c in range(n):
        if nz[:, c].any():
            groups.setdefault(find(m + c), ([], []))[1].append(c)
    for r in range(m):
        if nz[r].any():
            groups.setdefault(find(r), ([], []))[0].append(r)
    return [(np.array(r, dtype=int), np.array(c, dtype=int)) for r, c in groups.values()]


def _power_method(A, p, X0, tol, max_iter):
    """Run the p-norm power method from every column of ``X0``; return best (value, x, converged, iters)."""
    q = conjugate_exponent(p)
    X = X0 / np.where(_pnorm_cols(X0, p) > 0, _pnorm_cols(X0, p), 1.0)
    AH = A.conj().T
    est = _pnorm_cols(A @ X, p)
    active = np.arange(X.shape[1])
    done = np.zeros(X.shape[1], dtype=bool)
    it = 0
    while it < max_iter and len(active):
        it += 1
        Xa = X[:, active]
        Y = A @ Xa
        Z = AH @ _dual_vec(Y, p)
        Xn = _dual_vec(Z, q)
        zero = _pnorm_cols(Z, q) == 0
        Xn[:, zero] = Xa[:, zero]
        new = _pnorm_cols(A @ Xn, p)
        old = est[active]
        better = new >= old
        X[:, active[better]] = Xn[:, better]
        est[active[better]] = new[better]
        stop = (new - old <= tol * np.maximum(1.0, old)) | zero
        done[active[stop]] = True
        active = active[~stop]
    k = int(np.argmax(est))
    return float(est[k]), X[:, k], bool(done[k]), it


# basis-vector starts cost one column each; beyond this size only random starts are used
BASIS_START_LIMIT = 256


def _unweighted_norm(A, p, cfg: NormConfig, extra):
    m, n = A.shape
    if n == 0 or m == 0 or not np.any(A):
        w = np.zeros(n, dtype=complex)
        if n:
            w[0] = 1.0
        return 0.0, w, True, 0
    best = (-1.0, None, False, 0)
    rng = np.random.default_rng(cfg.seed)
    iters = 0
    for rows, cols in _components(A):
        B = A[np.ix_(rows, cols)]
        k = len(cols)
        if p == 2.0:
            _, sv, vh = np.linalg.svd(B)
            if sv[0] > best[0]:
                w = np.zeros(n, dtype=complex)
                w[cols] = vh[0].conj()
                best = (float(sv[0]), w, True, 0)
            continue
        starts = [np.ones((k, 1), dtype=complex)]
        if k <= BASIS_START_LIMIT:
            starts.append(np.eye(k, dtype=complex))
        if cfg.restarts > 0:
            starts.append(rng.standard_normal((k, cfg.restarts)) + 1j * rng.standard_normal((k, cfg.restarts)))
        if extra is not None:
            E = extra[cols]
            E = E[:, np.any(E != 0, axis=0)]
            if E.size:
                starts.append(E)
        val, x, conv, it = _power_method(B, p, np.hstack(starts), cfg.tol, cfg.max_iter)
        iters = max(iters, it)
        if val > best[0]:
            w = np.zeros(n, dtype=complex)
            w[cols] = x
            best = (val, w, conv, iters)
    return best[0], best[1], best[2], iters


def op_norm(T: LpOperator, cfg: NormConfig | None = None, starts=None) -> NormEstimate:
    """Estimate ``|T|_{p -> p}``; exact for p = 2.

    ``starts`` are optional extra start vectors (columns, in the coordinates of
    ``T.dom``); the estimate is then at least their Rayleigh-type ratios.
    """
    cfg = cfg or NormConfig()
    p = T.p
    wd = T.dom.weights ** (1.0 / p)
    wc = T.cod.weights ** (1.0 / p)
    A = wc[:, None] * T.matrix / wd[None, :]
    extra = None
    if starts is not None:
        extra = np.asarray(starts, dtype=complex).reshape(T.dom.dim, -1) * wd[:, None]
    _, x, conv, it = _unweighted_norm(A, p, cfg, extra)
    xi = x / wd
    nx = T.dom.norm(xi)
    if nx > 0:
        xi = xi / nx
    value = T.cod.norm(T.matrix @ xi)
    return NormEstimate(value, xi, conv, cfg.restarts, iterations=it)


def limit_norm(T: LpOperator, p: float) -> NormEstimate:
    """Exact norm at the endpoints ``p = 1`` or ``p = inf`` (weights taken from ``T``'s spaces)."""
    M = T.matrix
    if p == 1:
        A = np.abs(M) * T.cod.weights[:, None] / T.dom.weights[None, :]
        col = A.sum(axis=0)
        j = int(np.argmax(col))
        w = np.zeros(M.shape[1], dtype=complex)
        w[j] = 1.0 / T.dom.weights[j]
        return NormEstimate(float(col[j]), w, True, 0)
    if p == np.inf:
        row = np.abs(M).sum(axis=1)
        i = int(np.argmax(row))
        return NormEstimate(float(row[i]), np.conj(_phase(M[i])), True, 0)
    raise InvalidParams("limit_norm handles p = 1 or p = inf only")


# -- matrix exponential and hermitian tests --------------------------------------

def expm(A, order: int = 12) -> np.ndarray:
    """Matrix exponential by Taylor series with scaling and squaring."""
    A = np.asarray(A, dtype=complex)
    nrm = np.abs(A).sum(axis=0).max(initial=0.0)
    s = 0 if nrm < 0.5 else int(np.ceil(np.log2(nrm / 0.5)))
    B = A / (2.0 ** s)
    E = np.eye(len(A), dtype=complex)
    term = np.eye(len(A), dtype=complex)
    for k in range(1, order + 1):
        term = term @ B / k
        E = E + term
    for _ in range(s):
        E = E @ E
    return E


HERMITIAN_RADII = (1e-3, 1e-2, 0.1, 1.0)


def is_hermitian(T: LpOperator, tol: float = 1e-9, cfg: NormConfig | None = None) -> bool:
    """True iff ``|exp(i r T)| <= 1 + tol`` for the sampled ``r``."""
    M = T.matrix
    if M.shape[0] != M.shape[1]:
        raise ShapeMismatch("hermitian test needs a square operator")
    off = M - np.diag(np.diag(M))
    if not np.any(off) and np.all(np.diag(M).imag == 0):
        return True
    cfg = cfg or NormConfig(restarts=8)
    for r in HERMITIAN_RADII:
        for sgn in (1.0, -1.0):
            E = LpOperator(expm(1j * sgn * r * M), T.dom, T.cod)
            if op_norm(E, cfg).value > 1.0 + tol:
                return False
    return True


def is_hermitian_idempotent(M, tol: float = 1e-12) -> bool:
    """Diagonal 0/1 test (the hermitian idempotents of ``l^p``, p != 2)."""
    M = np.asarray(M)
    off = M - np.diag(np.diag(M))
    d = np.diag(M)
    return bool(np.all(np.abs(off) <= tol) and np.all(np.minimum(np.abs(d), np.abs(d - 1)) <= tol))
