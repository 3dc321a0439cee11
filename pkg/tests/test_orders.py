import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracid.exceptions import ValidationError
from fracid.orders import RationalOrder, order_gcd, respace_factor


class TestRationalOrder:
    def test_reduces_to_lowest_terms(self):
        q = RationalOrder(2, 4)
        assert (q.numerator, q.denominator) == (1, 2)

    def test_integer_denominator_defaults_to_one(self):
        q = RationalOrder(3)
        assert (q.numerator, q.denominator) == (3, 1)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValidationError):
            RationalOrder(0, 4)
        with pytest.raises(ValidationError):
            RationalOrder(-1, 4)
        with pytest.raises(ValidationError):
            RationalOrder(1, 0)
        with pytest.raises(ValidationError):
            RationalOrder(1, -2)

    def test_rejects_non_integer_fields(self):
        with pytest.raises(ValidationError):
            RationalOrder(0.5, 2)

    def test_frozen(self):
        q = RationalOrder(1, 4)
        with pytest.raises(AttributeError):
            q.numerator = 3

    def test_float_and_fraction_views(self):
        q = RationalOrder(1, 4)
        assert float(q) == 0.25
        assert q.as_fraction() == Fraction(1, 4)

    def test_str(self):
        assert str(RationalOrder(1, 4)) == "1/4"
        assert str(RationalOrder(1, 1)) == "1"
        assert str(RationalOrder(2)) == "2"

    def test_equality_and_hash(self):
        assert RationalOrder(1, 4) == RationalOrder(2, 8)
        assert hash(RationalOrder(1, 4)) == hash(RationalOrder(2, 8))


class TestParse:
    @pytest.mark.parametrize(
        "value,expected",
        [
            ("1/4", (1, 4)),
            (" 1/4 ", (1, 4)),
            ("0.25", (1, 4)),
            ("1", (1, 1)),
            (0.25, (1, 4)),
            (0.1, (1, 10)),
            (1, (1, 1)),
            (Fraction(3, 6), (1, 2)),
            (RationalOrder(1, 4), (1, 4)),
        ],
    )
    def test_accepted_forms(self, value, expected):
        q = RationalOrder.parse(value)
        assert (q.numerator, q.denominator) == expected

    @pytest.mark.parametrize("value", [True, False, "abc", "1/0", "", None, [1, 4], 0, -0.5, "0"])
    def test_rejected_forms(self, value):
        with pytest.raises(ValidationError):
            RationalOrder.parse(value)

    def test_float_uses_shortest_repr(self):
        # 0.1 must become 1/10, not the 3602879701896397/36028797018963968
        # binary expansion
        q = RationalOrder.parse(0.1)
        assert (q.numerator, q.denominator) == (1, 10)


class TestCommensurateBase:
    def test_accepts_unit_and_below(self):
        RationalOrder(1, 1).check_commensurate_base()
        RationalOrder(1, 4).check_commensurate_base()

    def test_rejects_above_one(self):
        with pytest.raises(ValidationError):
            RationalOrder(5, 4).check_commensurate_base()


class TestOrderGcd:
    @pytest.mark.parametrize(
        "a,b,expected",
        [
            ((1, 2), (1, 4), (1, 4)),
            ((1, 2), (1, 3), (1, 6)),
            ((3, 4), (1, 2), (1, 4)),
            ((2, 1), (3, 1), (1, 1)),
            ((1, 4), (1, 4), (1, 4)),
        ],
    )
    def test_values(self, a, b, expected):
        g = order_gcd(RationalOrder(*a), RationalOrder(*b))
        assert (g.numerator, g.denominator) == expected

    @given(
        st.integers(min_value=1, max_value=40),
        st.integers(min_value=1, max_value=40),
        st.integers(min_value=1, max_value=40),
        st.integers(min_value=1, max_value=40),
    )
    def test_gcd_divides_both(self, p1, r1, p2, r2):
        a, b = RationalOrder(p1, r1), RationalOrder(p2, r2)
        g = order_gcd(a, b)
        assert respace_factor(a, g) >= 1
        assert respace_factor(b, g) >= 1
        # g is the greatest such order: doubling it must fail to divide one
        g2 = Fraction(2 * g.numerator, g.denominator)
        assert (a.as_fraction() / g2).denominator != 1 or (
            b.as_fraction() / g2
        ).denominator != 1


class TestRespaceFactor:
    def test_exact_multiple(self):
        assert respace_factor(RationalOrder(1, 2), RationalOrder(1, 4)) == 2
        assert respace_factor(RationalOrder(1, 1), RationalOrder(1, 4)) == 4
        assert respace_factor(RationalOrder(1, 4), RationalOrder(1, 4)) == 1

    def test_non_divisor_rejected(self):
        with pytest.raises(ValidationError, match="does not divide"):
            respace_factor(RationalOrder(1, 4), RationalOrder(1, 3))

    @given(st.integers(min_value=1, max_value=20), st.integers(min_value=1, max_value=12))
    def test_round_trip(self, num, k):
        new = RationalOrder(num, 24)
        old = RationalOrder(num * k, 24)
        factor = respace_factor(old, new)
        assert factor * new.as_fraction() == old.as_fraction()


def test_parse_str_round_trip():
    for num in range(1, 13):
        for den in range(1, 13):
            q = RationalOrder(num, den)
            assert RationalOrder.parse(str(q)) == q


def test_gcd_matches_math_gcd_on_integers():
    for a in range(1, 9):
        for b in range(1, 9):
            g = order_gcd(RationalOrder(a), RationalOrder(b))
            assert g == RationalOrder(math.gcd(a, b))
