"""Representations of finite groupoids on bundles of finite L^p spaces.

A representation is a quasi-invariant measure ``mu`` on the objects, a fibre
space over each object and an invertible isometry ``T_g`` from the fibre at
``s(g)`` to the fibre at ``r(g)`` for every arrow.  Everything that would hold
"almost everywhere" is checked on the support of ``mu``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .convolution import AlgebraElement, MatrixElement, involute
from .errors import InvalidParams, LpgpdError, ShapeMismatch
from .groupoid import FiniteGroupoid, amplify, label
from .lpspace import (
    LpOperator,
    NormConfig,
    NormEstimate,
    WeightedLpSpace,
    conjugate_exponent,
    dual_operator,
    op_norm,
)
from .measure import ObjectMeasure, cocycle, induce, measure_from_json
from .spatial import lamperti_decompose


class BundleRepresentation:
    def __init__(self, groupoid: FiniteGroupoid, mu: ObjectMeasure, fibers: dict, T: dict):
        self.groupoid = groupoid
        self.mu = mu
        self.fibers = dict(fibers)
        self.T = {a: np.asarray(M, dtype=complex) for a, M in T.items()}
        ps = {F.p for F in self.fibers.values()}
        if len(ps) != 1:
            raise InvalidParams("all fibres must share one exponent")
        self.p = ps.pop()
        self._layout = None

    def support(self) -> list:
        return self.mu.support()

    def supported_arrows(self) -> list:
        G = self.groupoid
        m = self.mu.support_mask
        return [a for i, a in enumerate(G.arrows) if m[G.src[i]] and m[G.rng[i]]]

    def layout(self):
        """``(offsets, space)`` of the direct sum over ``supp mu`` with weights ``mu(x) lambda_x``."""
        if self._layout is None:
            offsets, weights, labels = {}, [], []
            pos = 0
            for x in self.support():
                F = self.fibers[x]
                offsets[x] = pos
                pos += F.dim
                weights.append(self.mu(x) * F.weights)
                labels += [(x, k) for k in range(F.dim)]
            w = np.concatenate(weights) if weights else np.zeros(0)
            self._layout = (offsets, WeightedLpSpace(w, self.p, labels) if len(w) else None)
        return self._layout

    def to_json(self) -> dict:
        def mat(M):
            return [[[float(z.real), float(z.imag)] for z in row] for row in M]

        return {
            "p": self.p,
            "mu": self.mu.to_json()["mu"],
            "fibers": {label(x): {"weights": F.weights.tolist()} for x, F in self.fibers.items()},
            "T": {label(a): mat(M) for a, M in self.T.items()},
        }


def _matrix(m):
    M = np.asarray(m, dtype=float)
    return M[..., 0] + 1j * M[..., 1] if M.ndim == 3 else M.astype(complex)


def rep_from_json(doc, G: FiniteGroupoid, p: float | None = None) -> BundleRepresentation:
    """Explicit format, or ``{"kind": "regular", "mu": ...}`` for the left regular representation."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    p = float(doc.get("p", p if p is not None else 2.0)) if p is None else float(p)
    mu = measure_from_json({"mu": doc["mu"]}, G) if "mu" in doc else ObjectMeasure(
        G, np.full(G.n_objects, 1.0 / G.n_objects))
    if doc.get("kind") == "regular":
        return regular_rep(G, mu, p)
    objs = {label(x): x for x in G.objects}
    arrows = {label(a): a for a in G.arrows}
    try:
        fibers = {objs[k]: WeightedLpSpace(v["weights"], p) for k, v in doc["fibers"].items()}
        T = {arrows[k]: _matrix(v) for k, v in doc["T"].items()}
    except KeyError as exc:
        raise InvalidParams(f"unknown id {exc.args[0]!r} in representation document") from None
    return BundleRepresentation(G, mu, fibers, T)


def validate_rep(R: BundleRepresentation, tol: float = 1e-10) -> list[str]:
    G = R.groupoid
    out = []
    if not induce(G, R.mu).quasi_invariant:
        out.append("measure is not quasi-invariant")
    supp = set(R.support())
    for x in supp:
        if x not in R.fibers:
            out.append(f"no fibre over {label(x)}")
    if out:
        return out
    arrows = R.supported_arrows()
    for a in arrows:
        s, r = G.source(a), G.range(a)
        M = R.T.get(a)
        if M is None:
            out.append(f"T missing for arrow {label(a)}")
            continue
        if M.shape != (R.fibers[r].dim, R.fibers[s].dim):
            out.append(f"T_{label(a)} has shape {M.shape}")
            continue
        try:
            sp = lamperti_decompose(LpOperator(M, R.fibers[s], R.fibers[r]))
            if len(sp.phi) != R.fibers[s].dim or len(sp.phi) != R.fibers[r].dim:
                out.append(f"T_{label(a)} is not invertible")
        except LpgpdError as exc:
            out.append(f"T_{label(a)} is not an invertible isometry: {exc}")
    for x in supp:
        u = G.unit_of(x)
        if u in R.T and R.T[u].shape[0] == R.T[u].shape[1]:
            if np.max(np.abs(R.T[u] - np.eye(len(R.T[u]))), initial=0.0) > tol:
                out.append(f"T at the unit of {label(x)} is not the identity")
    if out:
        return out
    keep = set(arrows)
    for i, j, k in zip(*G.composable_pairs()):
        a, b, c = G.arrows[i], G.arrows[j], G.arrows[k]
        if a in keep and b in keep:
            if np.max(np.abs(R.T[a] @ R.T[b] - R.T[c]), initial=0.0) > tol:
                out.append(f"homomorphism fails on ({label(a)}, {label(b)})")
    return out


class IntegratedOperator(LpOperator):
    """An operator on the direct sum of the fibres over ``supp mu``; ``index[k] = (x, fibre coordinate)``."""

    def __init__(self, matrix, space, offsets):
        super().__init__(matrix, space, space)
        self.offsets = offsets
        self.index = space.labels


def _block_plan(R: BundleRepresentation):
    G = R.groupoid
    D = cocycle(G, R.mu)
    offsets, space = R.layout()
    plan = []
    for a in R.supported_arrows():
        i = G.arrow_index(a)
        s, r = G.source(a), G.range(a)
        scale = D.values[i] ** (-1.0 / R.p)
        plan.append((i, offsets[r], offsets[s], scale * R.T[a]))
    return plan, offsets, space


def integrate(R: BundleRepresentation, f: AlgebraElement) -> IntegratedOperator:
    """``(pi_T(f) xi)_x = sum_{g in xG} f(g) D(g)^{-1/p} T_g xi_{s(g)}``."""
    if f.groupoid is not R.groupoid:
        raise InvalidParams("element and representation live on different groupoids")
    plan, offsets, space = _block_plan(R)
    if space is None:
        raise InvalidParams("measure has empty support")
    M = np.zeros((space.dim, space.dim), dtype=complex)
    c = f.coeffs
    for i, ro, so, B in plan:
        if c[i] != 0:
            M[ro:ro + B.shape[0], so:so + B.shape[1]] += c[i] * B
    return IntegratedOperator(M, space, offsets)


def integrate_matrix(R: BundleRepresentation, F: MatrixElement) -> LpOperator:
    """The block operator ``[pi_T(f_ij)]`` on ``l^p(n, L^p(mu, Z))``."""
    n = F.n
    blocks = [[integrate(R, F.entry(i, j)).matrix for j in range(n)] for i in range(n)]
    _, space = R.layout()
    big = WeightedLpSpace(np.tile(space.weights, n), R.p,
                          [(i, lab) for i in range(n) for lab in space.labels])
    return LpOperator(np.block(blocks), big)


def regular_rep(G: FiniteGroupoid, mu: ObjectMeasure, p: float) -> BundleRepresentation:
    """Fibres ``l^p(xG)`` and ``(T_g xi)(h) = xi(g^-1 h)``."""
    cocycle(G, mu)  # raises when mu is not quasi-invariant
    fib = {x: G.range_fiber(x) for x in G.objects}
    pos = {x: {a: k for k, a in enumerate(fib[x])} for x in G.objects}
    fibers = {x: WeightedLpSpace(np.ones(len(fib[x])), p, fib[x]) for x in G.objects}
    T = {}
    for g in G.arrows:
        s, r = G.source(g), G.range(g)
        M = np.zeros((len(fib[r]), len(fib[s])))
        gi = G.inverse(g)
        for h in fib[r]:
            M[pos[r][h], pos[s][G.compose(gi, h)]] = 1.0
        T[g] = M
    return BundleRepresentation(G, mu, fibers, T)


def ind_matrix(G: FiniteGroupoid, f: AlgebraElement, p: float, x=None, mu: ObjectMeasure | None = None) -> LpOperator:
    """Left convolution by ``f`` on ``l^p(Gx)``, or on ``L^p(nu^-1)`` when ``mu`` is given."""
    if (x is None) == (mu is None):
        raise InvalidParams("give exactly one of a base point or a measure")
    if mu is None:
        basis = G.source_fiber(x)
        weights = np.ones(len(basis))
    else:
        m = mu.support_mask
        basis = [a for i, a in enumerate(G.arrows) if m[G.src[i]]]
        weights = np.array([mu(G.source(a)) for a in basis])
    pos = {a: k for k, a in enumerate(basis)}
    M = np.zeros((len(basis), len(basis)), dtype=complex)
    for sigma in basis:
        for g in G.source_fiber(G.range(sigma)):
            c = f(g)
            if c != 0:
                M[pos[G.compose(g, sigma)], pos[sigma]] += c
    return LpOperator(M, WeightedLpSpace(weights, p, basis))


def reduced_norm(G: FiniteGroupoid, f: AlgebraElement, p: float, cfg: NormConfig | None = None) -> NormEstimate:
    """``max_x |Ind(x) f|``, reported with the achieving base point.

    Right translation by an arrow ``x -> y`` conjugates ``Ind(x)`` onto
    ``Ind(y)`` isometrically, so one base point per orbit suffices.
    """
    best = None
    for orb in G.orbits():
        x = orb[0]
        est = op_norm(ind_matrix(G, f, p, x=x), cfg)
        if best is None or est.value > best.value:
            best = est
            best.argmax = x
    return best


def kernel_support_check(G: FiniteGroupoid, mu: ObjectMeasure, f: AlgebraElement, p: float = 2.0,
                         tol: float = 1e-12) -> bool:
    """True iff ``f`` vanishes on ``supp nu``; cross-checked against ``Ind(mu) f = 0``."""
    nu = induce(G, mu).nu
    vanishes = bool(np.all(np.abs(f.coeffs[nu > 0]) <= tol))
    if mu.support():
        zero = bool(np.max(np.abs(ind_matrix(G, f, p, mu=mu).matrix), initial=0.0) <= tol)
    else:
        zero = True
    if zero != vanishes:
        raise RuntimeError("support test and Ind(mu) disagree")
    return vanishes


def dual_rep(R: BundleRepresentation) -> BundleRepresentation:
    """Fibres carry ``p'`` and ``T'_g = (T_{g^-1})'``."""
    G = R.groupoid
    fibers = {x: F.dual() for x, F in R.fibers.items()}
    T = {}
    for a in R.T:
        b = G.inverse(a)
        if b not in R.T:
            continue
        s, r = G.source(a), G.range(a)
        # T_b maps fibre r -> fibre s; its dual maps fibre s' -> fibre r'
        T[a] = dual_operator(LpOperator(R.T[b], R.fibers[r], R.fibers[s])).matrix
    return BundleRepresentation(G, R.mu, fibers, T)


def verify_equivalence(R: BundleRepresentation, S: BundleRepresentation, v: dict,
                       tol: float = 1e-10, samples: int = 3, seed: int = 0) -> bool:
    """Check ``S_g v_{s(g)} = v_{r(g)} T_g`` on ``supp mu`` and the induced intertwiner of integrated forms."""
    G = R.groupoid
    for x in R.support():
        V = np.asarray(v[x])
        if V.shape != (S.fibers[x].dim, R.fibers[x].dim):
            raise ShapeMismatch(f"v at {label(x)} has shape {V.shape}")
    for a in R.supported_arrows():
        s, r = G.source(a), G.range(a)
        if np.max(np.abs(S.T[a] @ np.asarray(v[s]) - np.asarray(v[r]) @ R.T[a]), initial=0.0) > tol:
            return False
    offs_R, sp_R = R.layout()
    offs_S, sp_S = S.layout()
    U = np.zeros((sp_S.dim, sp_R.dim), dtype=complex)
    for x in R.support():
        V = np.asarray(v[x]) * (R.mu(x) / S.mu(x)) ** (1.0 / R.p)
        U[offs_S[x]:offs_S[x] + V.shape[0], offs_R[x]:offs_R[x] + V.shape[1]] = V
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        f = AlgebraElement(G, rng.standard_normal(G.n_arrows) + 1j * rng.standard_normal(G.n_arrows))
        lhs = U @ integrate(R, f).matrix
        rhs = integrate(S, f).matrix @ U
        if np.max(np.abs(lhs - rhs), initial=0.0) > tol * max(1.0, np.abs(lhs).max(initial=0.0)):
            return False
    return True


def amplify_rep(R: BundleRepresentation, n: int, Gn: FiniteGroupoid | None = None) -> BundleRepresentation:
    """``T^(n)_(i,g,j) = T_g`` over ``amplify(G, n)`` with ``mu^(n)(x, i) = mu(x)``."""
    G = R.groupoid
    Gn = amplify(G, n) if Gn is None else Gn
    mu = ObjectMeasure(Gn, {(x, i): R.mu(x) for x, i in Gn.objects})
    fibers = {(x, i): R.fibers[x] for x, i in Gn.objects if x in R.fibers}
    T = {(i, g, j): R.T[g] for (i, g, j) in Gn.arrows if g in R.T}
    return BundleRepresentation(Gn, mu, fibers, T)


# -- invariant means ----------------------------------------------------------------

def invariant_mean(G: FiniteGroupoid) -> np.ndarray:
    """``f(g) = 1 / |r(g)G|``: an exactly invariant mean of a finite groupoid."""
    sizes = np.bincount(G.rng, minlength=G.n_objects)
    return 1.0 / sizes[np.asarray(G.rng)]


@dataclass
class PMeanCheck:
    g_bound: float        # max_x sum_{xG} g^p
    h_bound: float        # max_x sum_{xG} h^p'
    pairing_error: float  # max_x |sum_{xG} g h - 1|
    g_variation: float    # max_g sum_{r(g)G} |g(g^-1 h) - g(h)|^p
    h_variation: float
    product_error: float  # max |h * g - 1|

    def ok(self, tol=1e-12) -> bool:
        return (self.g_bound <= 1 + tol and self.h_bound <= 1 + tol and self.pairing_error <= tol
                and self.g_variation <= tol and self.h_variation <= tol and self.product_error <= tol)


def p_mean(G: FiniteGroupoid, p: float):
    """``(f^{1/p}, f^{1/p'})`` for the invariant mean ``f``."""
    f = invariant_mean(G)
    q = conjugate_exponent(p)
    return AlgebraElement(G, f ** (1.0 / p)), AlgebraElement(G, f ** (1.0 / q))


def check_p_mean(g: AlgebraElement, h: AlgebraElement, p: float) -> PMeanCheck:
    from .convolution import convolve

    G = g.groupoid
    q = conjugate_exponent(p)
    gv, hv = g.coeffs.real, h.coeffs.real
    by_obj = lambda w: np.bincount(G.rng, weights=w, minlength=G.n_objects)
    var_g = var_h = 0.0
    for a in G.arrows:
        ai = G.inverse(a)
        dg = dh = 0.0
        for rho in G.range_fiber(G.range(a)):
            k = G.arrow_index(G.compose(ai, rho))
            j = G.arrow_index(rho)
            dg += abs(gv[k] - gv[j]) ** p
            dh += abs(hv[k] - hv[j]) ** q
        var_g, var_h = max(var_g, dg), max(var_h, dh)
    hg = convolve(h, g).coeffs
    return PMeanCheck(
        float(by_obj(gv ** p).max()),
        float(by_obj(hv ** q).max()),
        float(np.abs(by_obj(gv * hv) - 1).max()),
        var_g,
        var_h,
        float(np.abs(hg - 1).max()),
    )
