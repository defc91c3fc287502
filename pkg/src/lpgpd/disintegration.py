"""Recover a bundle representation from a tight spatial representation of slices.

Given ``rho`` on a slice semigroup acting on ``L^p(Z, lambda)``:

* idempotent slices ``U`` give supports ``Phi(U)``; the fibre over ``x`` is the
  atom cut out by the idempotents containing ``x`` and the complements of
  those that do not;
* ``mu = q_* lambda`` and ``lambda_x = lambda / mu(x)`` on the fibre;
* ``T_g = D(g)^{1/p} rho(A)|_{Z_s(g) -> Z_r(g)}`` for any slice ``A`` holding ``g``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convolution import chi
from .errors import FibrationFailure, InconsistentSlices, NotTight
from .groupoid import label
from .lpspace import LpOperator, WeightedLpSpace
from .measure import ObjectMeasure
from .representation import BundleRepresentation, integrate
from .semigroup import SpatialSemigroupRep, is_tight_spatial
from .spatial import lamperti_decompose


@dataclass
class DisintegrationResult:
    q: dict            # index in Z -> object
    mu: ObjectMeasure
    Phi: dict          # idempotent slice (frozenset of arrows) -> frozenset of indices
    rep: BundleRepresentation
    residual: float
    order: list        # Z indices in the block order of the integrated space


def disintegrate(rho: SpatialSemigroupRep, tol: float = 1e-8) -> DisintegrationResult:
    S = rho.semigroup
    G = S.groupoid
    tight = is_tight_spatial(rho)
    if not tight:
        raise NotTight(f"representation is not tight: {tight.counterexample}")
    space = rho.space
    lam = space.weights
    p = space.p
    nZ = space.dim
    allZ = frozenset(range(nZ))

    Phi = {}
    for i, A in enumerate(S.slices):
        if A.is_idempotent():
            Phi[A.arrows] = frozenset(int(z) for z in np.flatnonzero(np.abs(np.diag(rho.matrices[i])) > 0.5))

    units = {x: G.unit_of(x) for x in G.objects}
    atoms = {}
    for x in G.objects:
        cell = allZ
        for U, supp in Phi.items():
            cell = cell & supp if units[x] in U else cell - supp
        atoms[x] = cell
    q = {}
    for x, cell in atoms.items():
        for z in cell:
            if z in q:
                raise FibrationFailure(f"objects {label(q[z])} and {label(x)} are not separated by idempotents")
            q[z] = x
    missing = allZ - set(q)
    if missing:
        raise FibrationFailure(f"index {min(missing)} lies in no fibre")

    fibre_idx = {x: sorted(atoms[x]) for x in G.objects}
    mu = ObjectMeasure(G, {x: float(sum(lam[z] for z in fibre_idx[x])) for x in G.objects})
    supp = set(mu.support())
    fibers = {x: WeightedLpSpace(lam[fibre_idx[x]] / mu(x), p) for x in supp}

    T = {}
    for i, A in enumerate(S.slices):
        M = rho.matrices[i]
        sp = lamperti_decompose(LpOperator(M, space))
        for g in A.arrows:
            s, r = G.source(g), G.range(g)
            if s not in supp and r not in supp:
                continue
            Zs, Zr = fibre_idx[s], fibre_idx[r]
            if {sp.phi.get(z) for z in Zs} != set(Zr):
                raise InconsistentSlices(f"rho of the slice holding {label(g)} does not map fibre "
                                         f"{label(s)} onto fibre {label(r)}")
            Tg = (mu(r) / mu(s)) ** (1.0 / p) * M[np.ix_(Zr, Zs)]
            if g in T:
                if np.max(np.abs(T[g] - Tg)) > tol:
                    raise InconsistentSlices(f"slices disagree on the arrow {label(g)}")
            else:
                T[g] = Tg
    for g in G.arrows:
        if G.source(g) in supp and G.range(g) in supp and g not in T:
            raise FibrationFailure(f"arrow {label(g)} is not covered by any slice")

    rep = BundleRepresentation(G, mu, fibers, T)
    offsets, _ = rep.layout()
    order = [z for x in rep.support() for z in fibre_idx[x]]
    P = np.ix_(order, order)
    residual = 0.0
    for i, A in enumerate(S.slices):
        diff = integrate(rep, chi(A)).matrix - rho.matrices[i][P]
        residual = max(residual, float(np.max(np.abs(diff), initial=0.0)))
    if residual > tol:
        raise InconsistentSlices(f"reconstruction residual {residual:.3g} exceeds {tol:g}")
    return DisintegrationResult(q, mu, Phi, rep, residual, order)
