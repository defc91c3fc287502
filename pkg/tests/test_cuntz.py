import itertools

import numpy as np
import pytest

from helpers import random_isometry
from lpgpd.cuntz import (
    CuntzWord,
    EPoint,
    LeavittPolynomial,
    cuntz_semilattice,
    leavitt_norm_bounds,
    parse_point,
    tight_identity_check,
    truncated_ind,
    truncated_shift_generators,
    truncation_index,
    word_mul,
    word_star,
)
from lpgpd.errors import BudgetTooSmall, InvalidParams, RelationsViolated
from lpgpd.lpspace import NormConfig, WeightedLpSpace, op_norm
from lpgpd.semigroup import is_tight_semilattice

W = CuntzWord


def elements(d, max_total):
    out = [W.zero()]
    for L in range(max_total + 1):
        for la in range(L + 1):
            for a in itertools.product(range(d), repeat=la):
                for b in itertools.product(range(d), repeat=L - la):
                    out.append(W(a, b))
    return out


def poly(d, terms):
    return LeavittPolynomial(d, {W(tuple(a), tuple(b)): c for (a, b), c in terms.items()})


def test_word_mul_examples():
    assert word_mul(W.gen(0, star=True), W.gen(1)).is_zero
    assert word_mul(W.gen(0, star=True), W.gen(0)) == W.one()
    assert word_mul(W((0,), (0, 1)), W((0, 1, 1), (1,))) == W((0, 1), (1,))
    assert word_mul(W.gen(0), W.gen(1)) == W((0, 1), ())


@pytest.mark.parametrize("d,max_total", [(2, 3), (3, 2)])
def test_word_mul_associative(d, max_total):
    els = elements(d, max_total)
    for u, v, w in itertools.product(els, repeat=3):
        assert word_mul(word_mul(u, v), w) == word_mul(u, word_mul(v, w))


def test_star_is_involutive_anti_homomorphism():
    els = elements(2, 3)
    for u in els:
        assert word_star(word_star(u)) == u
    for u, v in itertools.product(els, repeat=2):
        assert word_star(word_mul(u, v)) == word_mul(word_star(v), word_star(u))


def test_idempotents_are_range_projections():
    for d in [2, 3]:
        for u in elements(d, 6 if d == 2 else 4):
            if u.is_zero or len(u.a) > 3 or len(u.b) > 3:
                continue
            assert (word_mul(u, u) == u) == (u.a == u.b)


def test_polynomial_simplification():
    s0 = poly(2, {((0,), ()): 1})
    assert (s0 - s0).terms == {}
    s0s = s0.star()
    assert (s0s * s0) == LeavittPolynomial.scalar(2, 1)
    s1 = poly(2, {((1,), ()): 1})
    assert (s0s * s1).terms == {}
    f = s0 * s0s + s1 * s1.star()
    assert set(f.terms) == {W((0,), (0,)), W((1,), (1,))}
    assert f.max_word_length() == 1 and f.coefficient_sum() == 2.0
    with pytest.raises(InvalidParams):
        poly(2, {((2,), ()): 1})


def test_epoint_canonical():
    assert parse_point("01(10)") == EPoint((0, 1), (1, 0))
    assert parse_point("0(10)") == EPoint((), (0, 1))
    assert parse_point("(00)") == EPoint((), (0,))
    assert parse_point("0") == EPoint((), (0,))
    x = parse_point("1(01)")
    assert x.take(5) == (1, 0, 1, 0, 1)
    assert x.shift(1) == parse_point("(01)")
    assert x.prepend((1, 1)).take(4) == (1, 1, 1, 0)


def test_truncation_index():
    x = parse_point("(0)")
    idx = truncation_index(2, x, 1)
    # (x, 0), (0x, 1) = (x, 1), (1x, 1), (Tx, -1) = (x, -1), (0Tx, 0) = (x, 0) dup, (1Tx, 0)
    assert len(idx) == len(set(idx)) == 5


def test_cuntz_semilattice():
    E, beta = cuntz_semilattice(2, 2)
    pos = {e: i for i, e in enumerate(E.elements)}
    assert beta.beta[pos[()]] == 0b1111
    assert beta.beta[pos[(0,)]] == 0b0011
    for a in E.elements[1:]:
        if len(a) < 2:
            assert beta.beta[pos[a]] == beta.beta[pos[a + (0,)]] | beta.beta[pos[a + (1,)]]
    assert beta.validate() == []
    for N in [1, 2, 3]:
        assert is_tight_semilattice(cuntz_semilattice(2, N)[1]).tight


def test_tight_identity_rejects_isometric_tuples():
    rng = np.random.default_rng(0)
    for _ in range(20):
        d = int(rng.integers(2, 4))
        n = int(rng.integers(1, 6))
        w = rng.uniform(0.5, 2, n)
        sp = WeightedLpSpace(w, 3.0)
        gens = [random_isometry(w, w, 3.0, rng) for _ in range(d)]
        assert tight_identity_check(gens, sp) is False


def test_truncated_shift_raises_with_witness():
    sp = WeightedLpSpace.unweighted(3, 2.0)
    with pytest.raises(RelationsViolated) as exc:
        tight_identity_check(truncated_shift_generators(2, 3), sp)
    assert np.array_equal(exc.value.witness, [0, 0, 1])


def test_non_spatial_generator_raises():
    sp = WeightedLpSpace.unweighted(3, 3.0)
    H = np.eye(3)
    H[:2, :2] = [[1, 1], [1, -1]]
    with pytest.raises(RelationsViolated):
        tight_identity_check([np.eye(3), H], sp)


def test_truncated_ind_examples():
    x = parse_point("(0)")
    one = LeavittPolynomial.scalar(2, 1)
    T = truncated_ind(2, x, 3, one, 2.0)
    assert np.allclose(T.matrix, np.eye(T.dom.dim))
    s0, s1 = poly(2, {((0,), ()): 1}), poly(2, {((1,), ()): 1})
    P = s0 * s0.star() + s1 * s1.star()
    T = truncated_ind(2, x, 3, P, 3.0)
    assert np.allclose(T.matrix, np.eye(T.dom.dim))
    T = truncated_ind(2, x, 6, s0 + s1, 2.0)
    assert op_norm(T).value >= 1.41
    with pytest.raises(BudgetTooSmall):
        truncated_ind(2, x, 1, poly(2, {((0, 1), ()): 1}), 2.0)


def test_bounds_examples():
    x = [parse_point("(0)")]
    b = leavitt_norm_bounds(poly(2, {((0, 1), (1,)): 1}), 2, 3.0, 4, x)
    assert b.Ns[0] == 2 and b.values[0] == pytest.approx(1.0, abs=1e-10)
    b = leavitt_norm_bounds(LeavittPolynomial.scalar(2, 1), 2, 2.5, 4, x)
    assert np.allclose(b.values, 1.0)
    s = poly(2, {((0,), ()): 1, ((1,), ()): 1})
    b = leavitt_norm_bounds(s, 2, 2.0, 8, x)
    assert b.values[-1] >= 1.40
    assert abs(b.values[-1] - 2 ** 0.5) < 0.05
    assert b.upper == 2.0


def test_bounds_nondecreasing_random():
    rng = np.random.default_rng(1)
    cfg = NormConfig(restarts=4)
    for _ in range(5):
        terms = {}
        for _ in range(int(rng.integers(1, 4))):
            a = tuple(rng.integers(0, 2, int(rng.integers(0, 3))))
            b = tuple(rng.integers(0, 2, int(rng.integers(0, 3))))
            terms[(a, b)] = complex(*rng.standard_normal(2))
        f = poly(2, terms)
        b = leavitt_norm_bounds(f, 2, float(rng.choice([1.5, 2.0, 3.0])), 5, [parse_point("(0)"), parse_point("(01)")], cfg)
        assert all(v2 >= v1 - 1e-12 for v1, v2 in zip(b.values, b.values[1:]))
        assert b.values[-1] <= b.upper + 1e-9
