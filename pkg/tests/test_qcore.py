"""Tests for the numeric tower and q-special-function primitives."""

import math
import random

import pytest

from coloredvertex.qcore import (
    DimensionError,
    NComposition,
    PoleError,
    QQ,
    UnsupportedEvaluationError,
    as_float,
    block_sum,
    hypergeometric_terminating,
    is_exact,
    iter_compositions,
    iter_vectors_below,
    multiplicity,
    phi_form,
    q_pochhammer,
    unit,
    vec_add,
    vec_ge,
    vec_sub,
    vec_total,
)


class TestScalars:
    def test_qq_exact(self):
        assert QQ(1, 3) + QQ(2, 3) == 1
        assert is_exact(QQ(1, 3))
        assert is_exact(7)
        assert not is_exact(0.5)
        assert as_float(QQ(1, 4)) == 0.25


class TestQPochhammer:
    def test_frozen_value(self):
        # (1/2; 1/2)_2 = (1 - 1/2)(1 - 1/4) = 3/8
        assert q_pochhammer(QQ(1, 2), QQ(1, 2), 2) == QQ(3, 8)

    def test_empty_product(self):
        assert q_pochhammer(QQ(5, 7), QQ(1, 3), 0) == 1

    def test_recurrence(self):
        rng = random.Random(1)
        for _ in range(25):
            a = QQ(rng.randint(-9, 9), rng.randint(1, 9))
            q = QQ(rng.randint(-9, 9), rng.randint(1, 9))
            k = rng.randint(1, 6)
            assert q_pochhammer(a, q, k) == (
                q_pochhammer(a, q, k - 1) * (1 - a * q ** (k - 1)))

    def test_negative_index_reciprocal(self):
        a, q = QQ(1, 3), QQ(1, 2)
        # (a; q)_{-1} = 1 / (a/q; q)_1 = 1 / (1 - 2/3) = 3
        assert q_pochhammer(a, q, -1) == 3
        # consistency: (a; q)_{-m} (a q^{-m}; q)_m = 1
        for m in (1, 2, 3):
            assert (q_pochhammer(a, q, -m)
                    * q_pochhammer(a / q ** m, q, m)) == 1

    def test_negative_index_literal(self):
        a, q = QQ(1, 3), QQ(1, 2)
        # prod_{j=1}^{2} (1 - a q^{-j}) = (1 - 2/3)(1 - 4/3) = -1/9
        assert q_pochhammer(a, q, -2, convention="literal") == QQ(-1, 9)

    def test_infinite_float(self):
        val = q_pochhammer(0.5, 0.5, math.inf)
        # Euler function style product, cross-checked independently
        ref = 1.0
        for j in range(200):
            ref *= 1.0 - 0.5 ** (j + 1)
        assert val == pytest.approx(ref, rel=1e-13)

    def test_infinite_requires_float(self):
        with pytest.raises(UnsupportedEvaluationError):
            q_pochhammer(QQ(1, 2), QQ(1, 2), math.inf)
        with pytest.raises(UnsupportedEvaluationError):
            q_pochhammer(0.5, 1.5, math.inf)

    def test_float_mode(self):
        assert q_pochhammer(0.5, 0.5, 2) == pytest.approx(0.375)


class TestPhiForm:
    def test_frozen_value(self):
        # 2*(1+1) + 3*1 + 1*0 = 7
        assert phi_form((2, 3, 1), (1, 1, 1)) == 7

    def test_bilinearity(self):
        rng = random.Random(2)
        for _ in range(25):
            n = rng.randint(1, 5)
            X = tuple(rng.randint(-3, 3) for _ in range(n))
            Y = tuple(rng.randint(-3, 3) for _ in range(n))
            Z = tuple(rng.randint(-3, 3) for _ in range(n))
            assert phi_form(X, vec_add(Y, Z)) == (
                phi_form(X, Y) + phi_form(X, Z))
            brute = sum(X[i] * Y[j] for i in range(n) for j in range(n)
                        if i < j)
            assert phi_form(X, Y) == brute

    def test_dimension_error(self):
        with pytest.raises(DimensionError):
            phi_form((1, 2), (1,))


class TestHypergeometric:
    def test_two_term(self):
        # 1 + (1 - q^{-1})/(1 - q) * (1-a)/(1-b) at a = b: equals 1 - 1/q
        q = QQ(1, 2)
        val = hypergeometric_terminating(1, [q], [q], q, QQ(1))
        assert val == -1

    def test_terminating_sum_reference(self):
        # brute-force the defining sum at a random rational point
        rng = random.Random(3)
        for _ in range(10):
            q = QQ(rng.randint(1, 5), rng.randint(6, 9))
            z = QQ(rng.randint(-4, 4), rng.randint(1, 5))
            m = rng.randint(0, 4)
            a_list = [QQ(rng.randint(-3, 3), rng.randint(1, 4))
                      for _ in range(2)]
            b_list = [QQ(rng.randint(2, 5), 1) for _ in range(2)]
            ref = sum(
                z ** i
                * q_pochhammer(q ** (-m), q, i) / q_pochhammer(q, q, i)
                * q_pochhammer(a_list[0], q, i) * q_pochhammer(a_list[1], q, i)
                / (q_pochhammer(b_list[0], q, i)
                   * q_pochhammer(b_list[1], q, i))
                for i in range(m + 1))
            got = hypergeometric_terminating(m, a_list, b_list, q, z)
            assert got == ref

    def test_pole_reported(self):
        q = QQ(1, 2)
        with pytest.raises(PoleError):
            hypergeometric_terminating(2, [], [1 / q], q, QQ(1))


class TestVectors:
    def test_unit(self):
        assert unit(3, 0) == (0, 0, 0)
        assert unit(3, 2) == (0, 1, 0)
        with pytest.raises(DimensionError):
            unit(3, 4)

    def test_arithmetic(self):
        assert vec_add((1, 2), (3, 4)) == (4, 6)
        assert vec_sub((1, 2), (3, 4)) == (-2, -2)
        assert vec_ge((2, 2), (1, 2))
        assert not vec_ge((2, 2), (3, 0))
        assert vec_total((1, 2, 3)) == 6

    def test_block_sum(self):
        X = (5, 7, 11)
        assert block_sum(X, 1, 3) == 23
        assert block_sum(X, 2, 3) == 18
        assert block_sum(X, 3, 2) == 0

    def test_iter_vectors_below(self):
        got = list(iter_vectors_below((1, 2)))
        assert len(got) == 6
        assert (0, 0) in got and (1, 2) in got


class TestNComposition:
    def test_validation(self):
        with pytest.raises(ValueError):
            NComposition(((1, 2),))

    def test_counters(self):
        mu = NComposition(((3, 1, 1), (2,)))
        assert mu.n == 2
        assert mu.length == 4
        assert mu.lengths() == (3, 1)
        assert mu.max_part == 3
        assert mu.m(1, 1) == 2
        assert mu.m_le(2, 1) == 2
        assert mu.m_ge_color(1, 1) == 2
        assert mu.column_vector(2) == (0, 1)
        assert multiplicity(mu, 1) == 2
        assert multiplicity(mu, 2, mode="le") == 3
        assert multiplicity(mu, 2, c=("ge", 2)) == 1

    def test_columns_roundtrip(self):
        mu = NComposition(((2, 0), (1, 1, 0)))
        cols = [mu.column_vector(k) for k in range(mu.max_part + 1)]
        assert NComposition.from_columns(cols) == mu

    def test_add_part(self):
        mu = NComposition.empty(2).add_part(1, 3).add_part(1, 5)
        assert mu.blocks == ((5, 3), ())

    def test_iter_compositions_count(self):
        # one color, length 2, parts <= 2: pairs a >= b in [0,2]: 6
        assert sum(1 for _ in iter_compositions(1, 2, 2)) == 6
        # all enumerated compositions are distinct and valid
        seen = set(iter_compositions(2, 2, 1))
        assert len(seen) == sum(1 for _ in iter_compositions(2, 2, 1))
