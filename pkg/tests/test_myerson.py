from fractions import Fraction

import pytest

from tfm_lab.core import BidVector
from tfm_lab.mechanisms import (BurningSecondPrice, FirstPrice,
                                PostedPriceBurnAll, SecondPrice, Trivial)
from tfm_lab.money import GAMMA_ONE, Money, ZERO
from tfm_lab.myerson import (AllocationCurve, allocation_curve, check_monotone,
                             check_payment_rule, critical_bid,
                             zero_revenue_scan)

BURN11 = BurningSecondPrice(4, 2, 2, GAMMA_ONE, 1)


def money_grid(*values):
    return [Money.of(v) for v in values]


class TestAllocationCurve:
    def test_burning_with_context(self):
        curve = allocation_curve(BURN11, BidVector.of(8, 5, 3), 0,
                                 money_grid(0, 4, 5, 6, 9))
        probs = tuple(q for _, q in curve.points)
        # the probe wins the tie at 5 by holding the lower slot index
        assert probs == (0, 0, 1, 1, 1)

    def test_trivial_all_zero(self):
        curve = allocation_curve(Trivial(), BidVector.of(7), 0,
                                 money_grid(0, 1, 2))
        assert all(q == 0 for _, q in curve.points)

    def test_posted_price_threshold(self):
        curve = allocation_curve(PostedPriceBurnAll(Money.of(10)),
                                 BidVector.of(), 0, money_grid(9, 10, 11))
        assert tuple(q for _, q in curve.points) == (0, 1, 1)


class TestCheckMonotone:
    def test_monotone_none(self):
        curve = AllocationCurve(0, BidVector.of(), (
            (Money.of(0), Fraction(0)), (Money.of(1), Fraction(0)),
            (Money.of(2), Fraction(1)), (Money.of(3), Fraction(1))))
        assert check_monotone(curve) is None

    def test_decreasing_pair_reported(self):
        curve = AllocationCurve(0, BidVector.of(), (
            (Money.of(0), Fraction(0)), (Money.of(1), Fraction(1)),
            (Money.of(2), Fraction(0))))
        assert check_monotone(curve) == (Money.of(1), Money.of(2))

    def test_builtins_monotone_on_small_grid(self):
        grid = money_grid(0, "0.5", 1, "2.5", 3, 5)
        for m in (FirstPrice(4), SecondPrice(3), BURN11,
                  PostedPriceBurnAll(Money.of("2.5")), Trivial()):
            curve = allocation_curve(m, BidVector.of(3, 1), 1, grid)
            assert check_monotone(curve) is None


class TestCriticalBid:
    def test_burning_tie_winner(self):
        assert critical_bid(BURN11, BidVector.of(8, 5, 3), 0,
                            Money.of(20)) == Money.of(5)

    def test_trivial_unconfirmable(self):
        assert critical_bid(Trivial(), BidVector.of(), 0, Money.of(20)) is None

    def test_posted_price_threshold(self):
        assert critical_bid(PostedPriceBurnAll(Money.of(10)), BidVector.of(),
                            0, Money.of(20)) == Money.of(10)

    def test_randomized_mechanism_rejected(self):
        m = BurningSecondPrice(3, 2, 1, GAMMA_ONE, 2)
        with pytest.raises(ValueError):
            critical_bid(m, BidVector.of(), 0, Money.of(1))


class TestPaymentRule:
    def test_second_price_matches(self):
        report = check_payment_rule(SecondPrice(3), BidVector.of(10, 8, 5))
        assert report.matches

    def test_first_price_mismatch(self):
        report = check_payment_rule(FirstPrice(4), BidVector.of(10, 8))
        assert not report.matches
        mm = report.mismatches[0]
        assert mm.payment == Money.of(10)
        assert mm.critical == ZERO  # uncongested: any bid is confirmed

    def test_trivial_vacuous(self):
        assert check_payment_rule(Trivial(), BidVector.of(5, 1)).matches


class TestZeroRevenueScan:
    def test_trivial(self):
        vectors = [BidVector.of(5, 3), BidVector.of(1)]
        assert zero_revenue_scan(Trivial(), vectors).max_revenue == 0

    def test_burn_all(self):
        vectors = [BidVector.of(5, 3), BidVector.of(1)]
        m = PostedPriceBurnAll(Money.of("2.5"))
        assert zero_revenue_scan(m, vectors).max_revenue == 0

    def test_burning_positive_revenue(self):
        rep = zero_revenue_scan(BURN11, [BidVector.of(10, 8, 5, 3)])
        assert rep.max_revenue == 8
        assert rep.attained_on == (BidVector.of(10, 8, 5, 3),)
