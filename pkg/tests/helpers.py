"""Random generators and independent oracles shared by the test modules."""

import itertools

import numpy as np
from scipy.optimize import minimize

from lpgpd.convolution import AlgebraElement
from lpgpd.groupoid import (
    FiniteGroupoid,
    amplify,
    cyclic_group,
    disjoint_union,
    finite_group,
    transitive,
)
from lpgpd.lpspace import LpOperator, WeightedLpSpace
from lpgpd.measure import ObjectMeasure
from lpgpd.representation import BundleRepresentation
from lpgpd.spatial import SpatialPartialIsometry

TRIVIAL = finite_group([[0]])


def random_groupoid(rng, max_arrows=12, max_objects=None) -> FiniteGroupoid:
    """Disjoint union of amplified cyclic groups, at most ``max_arrows`` arrows."""
    pieces, budget, objs = [], max_arrows, 0
    while True:
        k = int(rng.integers(1, 4))
        n = int(rng.integers(1, 4))
        size = k * n * n
        if size > budget or (max_objects and objs + n > max_objects):
            if pieces:
                break
            continue
        base = TRIVIAL if k == 1 else cyclic_group(k)
        pieces.append(amplify(base, n))
        budget -= size
        objs += n
        if rng.random() < 0.4:
            break
    return pieces[0] if len(pieces) == 1 else disjoint_union(pieces)


def random_element(G, rng, real=False) -> AlgebraElement:
    c = rng.standard_normal(G.n_arrows)
    if not real:
        c = c + 1j * rng.standard_normal(G.n_arrows)
    return AlgebraElement(G, c)


def random_measure(G, rng, full=False) -> ObjectMeasure:
    """Quasi-invariant: positive on a nonempty union of orbits, zero elsewhere."""
    orbits = G.orbits()
    keep = [o for o in orbits if full or rng.random() < 0.7] or [orbits[int(rng.integers(len(orbits)))]]
    w = {x: float(rng.uniform(0.1, 1.0)) for o in keep for x in o}
    tot = sum(w.values())
    return ObjectMeasure(G, {x: v / tot for x, v in w.items()})


def random_isometry(src_w, dst_w, p, rng):
    """A weighted permutation matrix isometric from ``l^p(src_w)`` onto ``l^p(dst_w)``."""
    n = len(src_w)
    perm = rng.permutation(n)
    M = np.zeros((n, n), dtype=complex)
    for k in range(n):
        mag = (src_w[k] / dst_w[perm[k]]) ** (1.0 / p)
        M[perm[k], k] = mag * np.exp(2j * np.pi * rng.random())
    return M


def _cyclic_character(G, loops, rng):
    """A random circle-valued character of the isotropy group ``loops`` (trivial unless cyclic)."""
    unit = [a for a in loops if G.compose(a, a) == a][0]
    for g in loops:
        powers = [unit]
        while True:
            nxt = G.compose(g, powers[-1])
            if nxt == unit:
                break
            powers.append(nxt)
        if len(powers) == len(loops):
            t = int(rng.integers(len(loops)))
            return {h: np.exp(2j * np.pi * t * m / len(loops)) for m, h in enumerate(powers)}
    return {h: 1.0 for h in loops}


def random_rep(G, mu, p, rng, copies=None) -> BundleRepresentation:
    """A valid representation induced from random isotropy characters and random fibre isometries."""
    fibers, T = {}, {}
    for orb in G.orbits():
        x0 = orb[0]
        loops = [a for a in G.source_fiber(x0) if G.range(a) == x0]
        pos = {h: i for i, h in enumerate(loops)}
        H = len(loops)
        m = copies or int(rng.integers(1, 3))
        chars = [_cyclic_character(G, loops, rng) for _ in range(m)]
        w0 = np.repeat(rng.uniform(0.5, 2.0, m), H)
        # T_h on the base fibre: copy-wise chi_j(h) L_h
        Th = {}
        for h in loops:
            M = np.zeros((m * H, m * H), dtype=complex)
            for j in range(m):
                for k in loops:
                    M[j * H + pos[G.compose(h, k)], j * H + pos[k]] = chars[j][h]
            Th[h] = M
        delta, V = {}, {}
        for y in orb:
            delta[y] = next(a for a in G.source_fiber(x0) if G.range(a) == y)
            if y == x0:
                delta[y] = G.unit_of(x0)
                wy = w0
                V[y] = np.eye(m * H, dtype=complex)
            else:
                wy = rng.uniform(0.5, 2.0, m * H)
                V[y] = random_isometry(w0, wy, p, rng)
            fibers[y] = WeightedLpSpace(wy, p)
        for y in orb:
            for x in orb:
                for g in G.source_fiber(x):
                    if G.range(g) != y:
                        continue
                    h = G.compose(G.inverse(delta[y]), G.compose(g, delta[x]))
                    T[g] = V[y] @ Th[h] @ np.linalg.inv(V[x])
    return BundleRepresentation(G, mu, fibers, T)


def random_spatial(rng, p, n_max=8, square=False):
    n = int(rng.integers(1, n_max + 1))
    m = n if square else int(rng.integers(1, n_max + 1))
    dom = WeightedLpSpace(rng.uniform(0.2, 3.0, n), p)
    cod = WeightedLpSpace(rng.uniform(0.2, 3.0, m), p)
    k = int(rng.integers(0, min(n, m) + 1))
    E = rng.choice(n, size=k, replace=False)
    F = rng.choice(m, size=k, replace=False)
    phi = {int(x): int(y) for x, y in zip(E, F)}
    g = {y: (dom.weights[x] / cod.weights[y]) ** (1.0 / p) * np.exp(2j * np.pi * rng.random())
         for x, y in phi.items()}
    return SpatialPartialIsometry(dom, cod, phi, g)


def standard_groupoids():
    yield transitive(1)
    yield transitive(2)
    yield transitive(3)
    yield cyclic_group(2)
    yield cyclic_group(3)
    yield disjoint_union([transitive(2), cyclic_group(2)])
    yield amplify(cyclic_group(2), 2)


def all_abelian_small():
    """Finite abelian groups of order <= 6 as one-object groupoids."""
    yield cyclic_group(2)
    yield cyclic_group(3)
    yield cyclic_group(4)
    # Klein four-group
    yield finite_group([[a ^ b for b in range(4)] for a in range(4)])
    yield cyclic_group(5)
    yield cyclic_group(6)


# -- grid-search norm oracle ----------------------------------------------------------

def _ratio(A, x, p):
    y = A @ x
    return np.sum(np.abs(y) ** p, axis=0) ** (1 / p) / np.sum(np.abs(x) ** p, axis=0) ** (1 / p)


def grid_norm(A, p, steps=16, refine=20):
    """Brute-force ``max |Ax|_p / |x|_p`` over a grid of the unit sphere (modulo a global phase) plus local refinement.

    Written for 3x3 (or smaller) matrices; independent of the power method.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[1]
    ang = np.linspace(0, np.pi / 2, steps)
    ph = np.linspace(0, 2 * np.pi, steps, endpoint=False)
    if n == 1:
        return float(_ratio(A, np.ones((1, 1)), p)[0])
    mags, grid_angles = [], []
    for angles in itertools.product(ang, repeat=n - 1):
        grid_angles.append(np.array(angles))
        v = np.ones(n)
        for i, t in enumerate(angles):
            v[i] *= np.cos(t)
            v[i + 1:] *= np.sin(t)
        mags.append(v)
    mags = np.array(mags)
    phases = np.array(list(itertools.product(ph, repeat=n - 1)))
    X = (mags[:, None, :] * np.exp(1j * np.concatenate([np.zeros((len(phases), 1)), phases], axis=1))[None]).reshape(-1, n).T
    idx = [(m, t) for m in range(len(mags)) for t in range(len(phases))]
    vals = _ratio(A, X, p)
    vals = np.nan_to_num(vals)
    top = np.argsort(vals)[-refine:]

    def unpack(z):
        # spherical angles for the magnitudes (no scale direction), then relative phases
        v = np.ones(n)
        for i, t in enumerate(z[:n - 1]):
            v[i] *= np.cos(t)
            v[i + 1:] *= np.sin(t)
        return v * np.exp(1j * np.concatenate([[0.0], z[n - 1:]]))

    def neg(z):
        return -_ratio(A, unpack(z)[:, None], p)[0]

    best = float(vals.max())
    opts = {"xatol": 1e-12, "fatol": 1e-15, "maxiter": 3000, "maxfev": 3000}
    for j in top:
        m, t = idx[j]
        z = np.concatenate([grid_angles[m], phases[t]])
        for _ in range(3):
            res = minimize(neg, z, method="Nelder-Mead", options=opts)
            z = res.x
        best = max(best, -res.fun)
    return best


def brute_force_tight(E, rep):
    """Tightness straight from the definition: all X, Y subsets and all covers Z of E^{X,Y}."""
    n = len(E)
    full = (1 << rep.universe) - 1
    beta = rep.beta
    elems = range(n)
    subsets = [s for k in range(n + 1) for s in itertools.combinations(elems, k)]
    for X in subsets:
        for Y in subsets:
            EXY = [z for z in elems
                   if all(E.leq(z, x) for x in X) and all(E.orthogonal(z, y) for y in Y)]
            nonzero = [z for z in EXY if z != E.zero]
            rhs = full
            for x in X:
                rhs &= beta[x]
            for y in Y:
                rhs &= ~beta[y]
            rhs &= full
            for k in range(len(EXY) + 1):
                for Z in itertools.combinations(EXY, k):
                    if all(any(E.meet[z, w] != E.zero for z in Z) for w in nonzero):
                        lhs = 0
                        for z in Z:
                            lhs |= beta[z]
                        if lhs != rhs:
                            return False
    return True
