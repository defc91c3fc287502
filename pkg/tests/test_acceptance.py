"""Exit criteria, each at its stated tolerance. Seeds are fixed so the suite is reproducible."""

import itertools

import numpy as np
import pytest

from helpers import (
    all_abelian_small,
    grid_norm,
    random_element,
    random_groupoid,
    random_isometry,
    random_measure,
    random_rep,
    random_spatial,
)
from lpgpd.bratteli import af_norm, embed, fibonacci_diagram, multiplicities, tower_element, uhf_diagram
from lpgpd.convolution import chi, convolve, i_norm, involute
from lpgpd.cuntz import (
    CuntzWord,
    LeavittPolynomial,
    cuntz_semilattice,
    leavitt_norm_bounds,
    parse_point,
    tight_identity_check,
)
from lpgpd.disintegration import disintegrate
from lpgpd.errors import NotSpatial
from lpgpd.groupoid import all_slices, singleton_slice_semigroup, slice_product, transitive
from lpgpd.lpspace import LpOperator, NormConfig, WeightedLpSpace, dual_operator, op_norm
from lpgpd.representation import dual_rep, ind_matrix, integrate, reduced_norm, validate_rep
from lpgpd.semigroup import Semilattice, SemilatticeRep, is_boolean_hom, is_tight_semilattice, rho_from_pi
from lpgpd.spatial import lamperti_decompose

pytestmark = pytest.mark.acceptance


def maxdiff(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0))


def test_c01_algebra_laws(report):
    rng = np.random.default_rng(101)
    worst = {"assoc": 0.0, "invol": 0.0, "inorm": -np.inf, "chi": 0.0}
    for _ in range(50):
        G = random_groupoid(rng, max_arrows=12)
        f, g, h = (random_element(G, rng) for _ in range(3))
        c = complex(*rng.standard_normal(2))
        worst["assoc"] = max(worst["assoc"], maxdiff(convolve(convolve(f, g), h).coeffs,
                                                     convolve(f, convolve(g, h)).coeffs))
        invol = [
            maxdiff(involute(involute(f)).coeffs, f.coeffs),
            maxdiff(involute(convolve(f, g)).coeffs, convolve(involute(g), involute(f)).coeffs),
            maxdiff(involute(c * f + g).coeffs, (np.conj(c) * involute(f) + involute(g)).coeffs),
        ]
        worst["invol"] = max(worst["invol"], *invol)
        worst["inorm"] = max(worst["inorm"], i_norm(convolve(f, g)) - i_norm(f) * i_norm(g))
        slices = all_slices(G)
        for _ in range(5):
            A, B = (slices[int(rng.integers(len(slices)))] for _ in range(2))
            worst["chi"] = max(worst["chi"], maxdiff(convolve(chi(A), chi(B)).coeffs, chi(slice_product(A, B)).coeffs))
    ok = worst["assoc"] <= 1e-12 and worst["invol"] <= 1e-12 and worst["inorm"] <= 1e-12 and worst["chi"] <= 1e-12
    report(1, ok, "50 groupoids: " + ", ".join(f"{k}={v:.2e}" for k, v in worst.items()))
    assert ok


def _unitary_spread(rng, n):
    """A p=2 unitary with at least two nonzero entries in every row."""
    if rng.random() < 0.5 or n % 2:
        Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        Q, R = np.linalg.qr(Z)
        return Q * (np.diag(R) / np.abs(np.diag(R)))
    # direct sum of 2x2 rotations, conjugated by permutations
    U = np.zeros((n, n), dtype=complex)
    for k in range(0, n, 2):
        t = rng.uniform(0.2, np.pi / 2 - 0.2)
        U[k:k + 2, k:k + 2] = [[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]]
    P1, P2 = np.eye(n)[rng.permutation(n)], np.eye(n)[rng.permutation(n)]
    return P1 @ U @ P2


def test_c02_lamperti(report):
    rng = np.random.default_rng(102)
    worst = 0.0
    exact = True
    for k in range(200):
        p = 1.5 if k % 2 else 3.0
        s = random_spatial(rng, p, n_max=8)
        t = lamperti_decompose(s.operator())
        exact &= t.phi == s.phi
        worst = max(worst, maxdiff(t.matrix(), s.matrix()), max((abs(t.g[y] - s.g[y]) for y in s.g), default=0.0))
    rejected = 0
    for _ in range(50):
        n = int(rng.integers(2, 9))
        U = _unitary_spread(rng, n)
        assert np.all(np.count_nonzero(np.abs(U) > 1e-12, axis=1) >= 2)
        try:
            lamperti_decompose(LpOperator(U, WeightedLpSpace.unweighted(n, 3.0)))
        except NotSpatial:
            rejected += 1
    ok = exact and worst <= 1e-12 and rejected == 50
    report(2, ok, f"round-trip max err {worst:.2e}, phi exact={exact}; {rejected}/50 unitaries rejected")
    assert ok


def test_c03_norm_engine(report):
    rng = np.random.default_rng(103)
    mats = [rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) for _ in range(50)]
    worst_grid, worst_svd = 0.0, 0.0
    for A in mats:
        for p in [1.5, 2.5]:
            est = op_norm(LpOperator(A, WeightedLpSpace.unweighted(3, p))).value
            worst_grid = max(worst_grid, abs(est - grid_norm(A, p, steps=10, refine=4)))
        est = op_norm(LpOperator(A, WeightedLpSpace.unweighted(3, 2.0))).value
        worst_svd = max(worst_svd, abs(est - np.linalg.svd(A, compute_uv=False)[0]))
    ok = worst_grid <= 1e-4 and worst_svd <= 1e-10
    report(3, ok, f"grid oracle max diff {worst_grid:.2e} (tol 1e-4), SVD max diff {worst_svd:.2e} (tol 1e-10)")
    assert ok


def test_c04_integrated_form(report):
    rng = np.random.default_rng(104)
    cfg = NormConfig(restarts=8)
    excess, mult = -np.inf, 0.0
    for _ in range(100):
        G = random_groupoid(rng)
        mu = random_measure(G, rng)
        p = float(rng.choice([1.5, 2.0, 3.0]))
        R = random_rep(G, mu, p, rng)
        f, g = random_element(G, rng), random_element(G, rng)
        excess = max(excess, op_norm(integrate(R, f), cfg).value - i_norm(f))
        lhs = integrate(R, convolve(f, g)).matrix
        rhs = integrate(R, f).matrix @ integrate(R, g).matrix
        mult = max(mult, maxdiff(lhs, rhs))
    ok = excess <= 1e-6 and mult <= 1e-10
    report(4, ok, f"max(|pi(f)| - |f|_I) = {excess:.2e} (tol 1e-6), multiplicativity err {mult:.2e}")
    assert ok


def test_c05_induced_sup(report):
    rng = np.random.default_rng(105)
    worst = 0.0
    for _ in range(30):
        G = random_groupoid(rng)
        mu = random_measure(G, rng)
        p = float(rng.choice([1.5, 2.5, 3.0]))
        f = random_element(G, rng)
        whole = op_norm(ind_matrix(G, f, p, mu=mu)).value
        pointwise = max(op_norm(ind_matrix(G, f, p, x=x)).value for x in mu.support())
        worst = max(worst, abs(whole - pointwise))
    ok = worst <= 2e-4
    report(5, ok, f"30 cases: max |Ind(mu) - max_x Ind(x)| = {worst:.2e} (tol 2e-4)")
    assert ok


def test_c06_disintegration(report):
    rng = np.random.default_rng(106)
    worst, recon, mu_exact, valid = 0.0, 0.0, True, True
    for _ in range(30):
        G = random_groupoid(rng, max_objects=8)
        mu = random_measure(G, rng)
        p = float(rng.choice([1.5, 2.0, 3.0]))
        R = random_rep(G, mu, p, rng)
        rho = rho_from_pi(lambda f: integrate(R, f), singleton_slice_semigroup(G))
        res = disintegrate(rho)
        worst = max(worst, res.residual)
        valid &= validate_rep(res.rep) == []
        P = np.ix_(res.order, res.order)
        for _ in range(3):
            f = random_element(G, rng)
            recon = max(recon, maxdiff(integrate(res.rep, f).matrix, integrate(R, f).matrix[P]))
        lam = rho.space.weights
        for x in G.objects:
            mu_exact &= res.mu(x) == sum(lam[z] for z, y in res.q.items() if y == x)
    ok = worst < 1e-8 and recon < 1e-8 and mu_exact and valid
    report(6, ok, f"30 round-trips: residual {worst:.2e}, operator err {recon:.2e}, mu = q_*lambda exact={mu_exact}")
    assert ok


def _boolean_reps(k, rng):
    """Every representation on 1 or 2 points, then random ones on up to 5 points.

    A meet-preserving map into subsets of a point set is determined per point by the
    least element containing it (or none).
    """
    full = (1 << k) - 1
    choices = [None] + list(range(1, full + 1))

    def build(t):
        beta = [sum(1 << w for w, tw in enumerate(t) if tw is not None and s & tw == tw) for s in range(full + 1)]
        return SemilatticeRep(Semilattice.boolean(k), len(t), beta), all(tw is not None and bin(tw).count("1") == 1 for tw in t)

    for m in (1, 2):
        for t in itertools.product(choices, repeat=m):
            yield build(t)
    for _ in range(40):
        m = int(rng.integers(3, 6))
        t = [choices[int(rng.integers(len(choices)))] if rng.random() < 0.5 else 1 << int(rng.integers(k))
             for _ in range(m)]
        yield build(t)


def test_c07_tightness(report):
    rng = np.random.default_rng(107)
    checked = agree = 0
    for k in range(1, 5):   # Boolean algebras with 2, 4, 8, 16 elements
        for rep, atoms_only in _boolean_reps(k, rng):
            hom = is_boolean_hom(rep, k)
            tight = is_tight_semilattice(rep).tight
            checked += 1
            agree += tight == hom == atoms_only
    cuntz = all(is_tight_semilattice(cuntz_semilattice(2, N)[1]).tight for N in (1, 2, 3))
    passed = 0
    for _ in range(40):
        d = int(rng.integers(2, 5))
        n = int(rng.integers(1, 7))
        w = rng.uniform(0.3, 3.0, n)
        p = float(rng.choice([1.5, 2.0, 3.0]))
        gens = [random_isometry(w, w, p, rng) for _ in range(d)]
        passed += tight_identity_check(gens, WeightedLpSpace(w, p)) is not False
    ok = agree == checked and cuntz and passed == 0
    report(7, ok, f"Boolean: {agree}/{checked} agree; Cuntz d=2 N<=3 tight={cuntz}; isometric tuples passing: {passed}/40")
    assert ok


def test_c08_amenable(report):
    rng = np.random.default_rng(108)
    groupoids = [transitive(n) for n in range(1, 5)] + list(all_abelian_small())
    worst = -np.inf
    for k in range(50):
        G = groupoids[k % len(groupoids)]
        mu = random_measure(G, rng, full=True)
        p = float(rng.choice([1.5, 2.0, 3.0]))
        R = random_rep(G, mu, p, rng)
        f = random_element(G, rng)
        worst = max(worst, op_norm(integrate(R, f)).value - reduced_norm(G, f, p).value)
    ok = worst <= 1e-5
    report(8, ok, f"50 reps: max(|pi_T(f)| - |f|_red) = {worst:.2e} (tol 1e-5)")
    assert ok


def test_c09_cuntz_bounds(report):
    s = LeavittPolynomial(2, {CuntzWord((0,), ()): 1, CuntzWord((1,), ()): 1})
    b = leavitt_norm_bounds(s, 2, 2.0, 8, [parse_point("(0)")])
    reach = b.values[-1]
    rng = np.random.default_rng(109)
    cfg = NormConfig(restarts=4)
    monotone = 0
    for _ in range(20):
        terms = {}
        for _ in range(int(rng.integers(1, 4))):
            a = tuple(int(v) for v in rng.integers(0, 2, int(rng.integers(0, 3))))
            c = tuple(int(v) for v in rng.integers(0, 2, int(rng.integers(0, 3))))
            terms[CuntzWord(a, c)] = complex(*rng.standard_normal(2))
        f = LeavittPolynomial(2, terms)
        p = float(rng.choice([1.5, 2.0, 3.0]))
        vals = leavitt_norm_bounds(f, 2, p, 5, [parse_point("(0)"), parse_point("(01)")], cfg).values
        monotone += all(v2 >= v1 for v1, v2 in zip(vals, vals[1:]))
    ok = reach >= 1.40 and monotone == 20
    report(9, ok, f"s0+s1 at N=8: {reach:.6f} (target >= 1.40, sqrt2 = {2 ** 0.5:.6f}); nondecreasing {monotone}/20")
    assert ok


def test_c10_af_tower(report):
    D = fibonacci_diagram(12)
    a, b = 1, 0
    fib_ok = True
    for k in range(1, 12):
        a, b = a + b, a
        fib_ok &= multiplicities(D, k).tolist() == [a, b]
    U = uhf_diagram(2, 10)
    uhf_ok = all(multiplicities(U, k).tolist() == [2 ** k] for k in range(10))
    rng = np.random.default_rng(110)
    cfg = NormConfig(restarts=8)
    worst = 0.0
    for i in range(100):
        D = fibonacci_diagram(6) if i % 2 else uhf_diagram(2, 4)
        k = int(rng.integers(0, D.depth - 1))
        n = multiplicities(D, k)
        x = tower_element(D, k, [rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)) for m in n])
        p = [1.5, 2.0, 3.0][i % 3]
        worst = max(worst, abs(af_norm(x, p, cfg) - af_norm(embed(D, k, x), p, cfg)))
    ok = fib_ok and uhf_ok and worst <= 1e-8
    report(10, ok, f"Fibonacci exact={fib_ok}, 2^inf exact={uhf_ok}; embed invariance max diff {worst:.2e} (tol 1e-8)")
    assert ok


def test_c11_duality(report):
    rng = np.random.default_rng(111)
    worst_norm = 0.0
    for _ in range(50):
        n, m = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        p = float(rng.uniform(1.2, 4.0))
        T = LpOperator(rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)),
                       WeightedLpSpace(rng.uniform(0.2, 3.0, n), p), WeightedLpSpace(rng.uniform(0.2, 3.0, m), p))
        worst_norm = max(worst_norm, abs(op_norm(T).value - op_norm(dual_operator(T)).value))
    worst_rep = 0.0
    for _ in range(30):
        G = random_groupoid(rng)
        mu = random_measure(G, rng)
        p = float(rng.choice([1.5, 2.5, 3.0]))
        R = random_rep(G, mu, p, rng)
        f = random_element(G, rng)
        worst_rep = max(worst_rep, maxdiff(dual_operator(integrate(R, f)).matrix, integrate(dual_rep(R), involute(f)).matrix))
    ok = worst_norm <= 1e-5 and worst_rep <= 1e-10
    report(11, ok, f"|T| vs |T'| max diff {worst_norm:.2e} (tol 1e-5); dual rep identity err {worst_rep:.2e} (tol 1e-10)")
    assert ok
