from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tfm_lab.core import BidVector, Scenario
from tfm_lab.mechanisms import (BurningSecondPrice, FirstPrice, PostedPriceNoBurn,
                                SecondPrice, IncludedBlock, BlockEntry)
from tfm_lab.money import GAMMA_ONE, GAMMA_ZERO, Gamma, Money
from tfm_lab.utility import (FAKE, HONEST, StrategyProfile, expected_utility,
                             honest_profile, resolve_block, utility_of)

BURN11 = BurningSecondPrice(4, 2, 2, GAMMA_ONE, 1)


class TestWorkedExamples:
    def test_confirmed_user_pays_second_price(self):
        # v=10, confirmed at q=1, pays 5 -> utility 5, any gamma
        m = SecondPrice(3)
        sc = Scenario.truthful((10, 8, 5), coalition_users=[0])
        assert utility_of(m, sc, honest_profile(sc), GAMMA_ONE) == 5

    def test_coalition_of_miner_and_top_user(self):
        sc = Scenario.truthful((10, 8, 5, 3), coalition_users=[0],
                               miner_in_coalition=True)
        # miner revenue 8 plus user's 10 - 5
        assert utility_of(BURN11, sc, honest_profile(sc), GAMMA_ONE) == 13

    def test_unconfirmed_overbid_costs_gamma_times_overbid(self):
        sc = Scenario.truthful((10, 8, 0, 0), coalition_users=[2])
        profile = StrategyProfile(BidVector.of(10, 8, "3.5", 0))
        assert utility_of(BURN11, sc, profile, GAMMA_ONE) == Fraction(-7, 2)
        assert utility_of(BURN11, sc, profile, GAMMA_ZERO) == 0

    def test_unplaced_overbid_is_free(self):
        # not included in the block at all: no penalty at any gamma
        m = PostedPriceNoBurn(Money.of("2.5"))
        sc = Scenario.truthful((0,), coalition_users=[0])
        profile = StrategyProfile(BidVector.of(2))  # below reserve, excluded
        assert utility_of(m, sc, profile, GAMMA_ONE) == 0


class TestProfileValidation:
    def test_block_fakes_must_match(self):
        block = IncludedBlock((BlockEntry(Money.of(1), FAKE),))
        with pytest.raises(ValueError):
            StrategyProfile(BidVector.of(5), (), block)

    def test_noncoalition_slots_must_be_truthful(self):
        sc = Scenario.truthful((10, 8), coalition_users=[0])
        profile = StrategyProfile(BidVector.of(10, 7))
        with pytest.raises(ValueError):
            profile.check_against(sc)

    def test_honest_profile_shape(self):
        sc = Scenario.truthful((10, 8), coalition_users=[1],
                               miner_in_coalition=True)
        p = honest_profile(sc)
        assert p.bids == sc.bids
        assert p.fake_bids == ()
        assert p.miner_inclusion == HONEST

    def test_honest_profile_empty_scenario(self):
        p = honest_profile(Scenario.truthful(()))
        assert len(p.bids) == 0


class TestResolveBlock:
    def test_fakes_enter_the_mempool(self):
        m = SecondPrice(3)
        profile = StrategyProfile(BidVector.of(10, 8),
                                  (Money.of(9),), HONEST)
        block = resolve_block(m, profile)
        assert [e.owner for e in block.entries if not e.is_padding] == \
            [0, FAKE, 1]

    def test_fakes_lose_ties_to_real_bids(self):
        m = FirstPrice(4)
        profile = StrategyProfile(BidVector.of(5), (Money.of(5),), HONEST)
        block = resolve_block(m, profile)
        assert [e.owner for e in block.entries] == [0, FAKE]


# -- invariants ------------------------------------------------------------

scenario_values = st.lists(
    st.integers(0, 12).map(Money.of), min_size=1, max_size=4)


@given(scenario_values, st.data())
def test_gamma_zero_degenerates_to_classical_utility(values, data):
    m = BURN11
    n = len(values)
    user = data.draw(st.integers(0, n - 1))
    bid = data.draw(st.integers(0, 12).map(Money.of))
    sc = Scenario.truthful(values, coalition_users=[user],
                           miner_in_coalition=data.draw(st.booleans()))
    bids = BidVector(tuple(values[:user] + [bid] + values[user + 1:]))
    profile = StrategyProfile(bids)
    block = resolve_block(m, profile)
    out = m.evaluate(block)
    u0 = expected_utility(sc, profile, out, GAMMA_ZERO, block)
    classical = out.miner_revenue if sc.miner_in_coalition else Fraction(0)
    for entry, slot in zip(block.entries, out.per_slot):
        if entry.owner == user:
            classical += slot.confirm_prob * (
                values[user].as_fraction()
                - slot.conditional_payment.as_fraction())
    assert u0 == classical


@given(scenario_values, st.data())
def test_utility_non_increasing_in_gamma(values, data):
    m = BURN11
    user = data.draw(st.integers(0, len(values) - 1))
    bid = data.draw(st.integers(0, 12).map(Money.of))
    sc = Scenario.truthful(values, coalition_users=[user])
    bids = BidVector(tuple(values[:user] + [bid] + values[user + 1:]))
    profile = StrategyProfile(bids)
    gammas = [GAMMA_ZERO, Gamma(1, 4), Gamma(1, 2), Gamma(3, 4), GAMMA_ONE]
    utilities = [utility_of(m, sc, profile, g) for g in gammas]
    assert utilities == sorted(utilities, reverse=True)


@given(scenario_values)
def test_truthful_profiles_never_pay_the_penalty(values):
    m = BURN11
    sc = Scenario.truthful(values, coalition_users=[0], miner_in_coalition=True)
    p = honest_profile(sc)
    assert utility_of(m, sc, p, GAMMA_ZERO) == utility_of(m, sc, p, GAMMA_ONE)


@given(scenario_values)
def test_coalition_utility_is_linear_in_members(values):
    if len(values) < 2:
        return
    m = BURN11
    p = honest_profile(Scenario.truthful(values))
    joint = Scenario.truthful(values, coalition_users=[0, 1],
                              miner_in_coalition=True)
    solo0 = Scenario.truthful(values, coalition_users=[0])
    solo1 = Scenario.truthful(values, coalition_users=[1])
    miner = Scenario.truthful(values, miner_in_coalition=True)
    assert utility_of(m, joint, p, GAMMA_ONE) == (
        utility_of(m, solo0, p, GAMMA_ONE)
        + utility_of(m, solo1, p, GAMMA_ONE)
        + utility_of(m, miner, p, GAMMA_ONE))
