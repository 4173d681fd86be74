"""Compiled integer engine behind the auditor.

Everything here is exact int64 arithmetic on micro-units.  Utilities are
scaled by D = qden * agd * mgd (qden = k for the burning auction, agd/agd the
audit discount fraction denominator, mgd the mechanism's own discount
denominator) so that every utility of interest is an integer; comparisons are
therefore bit-exact and agree with the Fraction reference path.

Block entries travel as sort keys: key = bid_micro * 16 + (15 - prio) where
prio is the owning real slot (0..5) or 8/9 for the first/second fake.
Sorting keys descending realizes the canonical (bid desc, owner asc) order
with reals winning ties against fakes.

Witnesses found here are decoded and re-verified through the exact path by
the wrappers at the bottom before they reach a report.
"""
from __future__ import annotations

from dataclasses import replace
from fractions import Fraction

import numpy as np
from numba import njit

from .auditor import (AuditConfig, AuditReport, FAIL, PASS, Witness,
                      scenario_candidates)
from .core import BidVector, Scenario, replace_slot
from .mechanisms import (BlockEntry, BurningSecondPrice, FirstPrice,
                         FirstPriceOrFree, IncludedBlock, Mechanism,
                         PostedPriceBurnAll, PostedPriceNoBurn, SecondPrice,
                         Solitary, SolitaryOrPostedPrice, Trivial)
from .money import MICRO, Money
from .utility import FAKE, HONEST, StrategyProfile, honest_profile, utility_of

K_TRIVIAL, K_FIRST, K_SECOND, K_PP, K_PPBURN, K_FPOF, K_BURN, K_SOL, K_SOLPP = \
    range(9)


def encode_mechanism(m: Mechanism) -> tuple[int, np.ndarray]:
    p = np.zeros(8, np.int64)
    if isinstance(m, Trivial):
        return K_TRIVIAL, p
    if isinstance(m, FirstPrice):
        p[0] = -1 if m.block_size is None else m.block_size
        return K_FIRST, p
    if isinstance(m, SecondPrice):
        p[0] = m.block_size
        return K_SECOND, p
    if isinstance(m, PostedPriceNoBurn):
        p[0] = m.reserve.micro
        return K_PP, p
    if isinstance(m, PostedPriceBurnAll):
        p[0] = m.reserve.micro
        p[1] = -1 if m.block_size is None else m.block_size
        return K_PPBURN, p
    if isinstance(m, FirstPriceOrFree):
        return K_FPOF, p
    if isinstance(m, BurningSecondPrice):
        p[0] = m.block_size
        p[1] = m.k
        p[2] = m.k_prime
        p[3] = m.confirm_count
        p[4] = m.gamma.numerator
        p[5] = m.gamma.denominator
        return K_BURN, p
    if isinstance(m, Solitary):
        return K_SOL, p
    if isinstance(m, SolitaryOrPostedPrice):
        p[0] = m.reserve.micro
        return K_SOLPP, p
    raise TypeError(f"no kernel encoding for {type(m).__name__}")


def scale_denominator(m: Mechanism, cfg: AuditConfig) -> int:
    qd = m.k if isinstance(m, BurningSecondPrice) else 1
    mgd = m.gamma.denominator if isinstance(m, BurningSecondPrice) else 1
    return qd * cfg.gamma.denominator * mgd


def supports(m: Mechanism, cfg: AuditConfig) -> bool:
    if cfg.max_fake_bids > 2 or cfg.max_vector_len > 6:
        return False
    try:
        encode_mechanism(m)
    except TypeError:
        return False
    return True


@njit(cache=True)
def _sort_desc(keys, n):
    for i in range(1, n):
        k = keys[i]
        j = i - 1
        while j >= 0 and keys[j] < k:
            keys[j + 1] = keys[j]
            j -= 1
        keys[j + 1] = k


@njit(cache=True)
def _incl_count(kind, params, keys, n):
    """Honest inclusion is a prefix of the descending-sorted mempool."""
    if kind == 0:
        return 0
    if kind == 1 or kind == 6:
        b = params[0] if kind == 1 else params[0]
        if b < 0 or n < b:
            return n
        return b
    if kind == 2:
        return n if n < params[0] else params[0]
    if kind == 3:
        cnt = 0
        for j in range(n):
            if keys[j] >> 4 >= params[0]:
                cnt += 1
        return cnt
    if kind == 4:
        cnt = 0
        for j in range(n):
            if keys[j] >> 4 >= params[0]:
                cnt += 1
        if params[1] >= 0 and cnt > params[1]:
            cnt = params[1]
        return cnt
    if kind == 5:
        return n
    if kind == 7:
        return n if n < 2 else 2
    # kind 8: top two plus everything at or above the reserve
    cnt = 0
    for j in range(n):
        if keys[j] >> 4 >= params[0]:
            cnt += 1
    two = n if n < 2 else 2
    return cnt if cnt > two else two


@njit(cache=True)
def _scaled_u(kind, params, keys, n, vals, miner, agn, agd):
    """Coalition utility of an explicit block, scaled by qd*agd*mgd."""
    u = np.int64(0)
    if n == 0:
        return u
    if kind == 0:
        # nothing ever confirms; included overbids still pay the penalty
        for j in range(n):
            b = keys[j] >> 4
            v = vals[15 - (keys[j] & 15)]
            if v >= 0 and b > v:
                u -= agn * (b - v)
        return u
    if kind == 1:  # pay-your-bid, everything confirmed
        mu = np.int64(0)
        for j in range(n):
            b = keys[j] >> 4
            mu += b
            v = vals[15 - (keys[j] & 15)]
            if v >= 0:
                u += agd * (v - b)
        if miner:
            u += agd * mu
        return u
    if kind == 2:  # top B-1 confirmed at the B-th price
        bsz = params[0]
        price = keys[bsz - 1] >> 4 if bsz - 1 < n else 0
        mu = np.int64(0)
        for j in range(n):
            b = keys[j] >> 4
            v = vals[15 - (keys[j] & 15)]
            if j < bsz - 1:
                mu += price
                if v >= 0:
                    u += agd * (v - price)
            elif v >= 0 and b > v:
                u -= agn * (b - v)
        if miner:
            u += agd * mu
        return u
    if kind == 3 or kind == 4:  # posted price, kept vs burnt
        r = params[0]
        mu = np.int64(0)
        for j in range(n):
            b = keys[j] >> 4
            v = vals[15 - (keys[j] & 15)]
            if b >= r:
                mu += r
                if v >= 0:
                    u += agd * (v - r)
            elif v >= 0 and b > v:
                u -= agn * (b - v)
        if miner and kind == 3:
            u += agd * mu
        return u
    if kind == 5:  # only the top bid confirms; free when alone
        price = 0 if n == 1 else keys[0] >> 4
        for j in range(n):
            b = keys[j] >> 4
            v = vals[15 - (keys[j] & 15)]
            if j == 0:
                if v >= 0:
                    u += agd * (v - price)
            elif v >= 0 and b > v:
                u -= agn * (b - v)
        if miner:
            u += agd * price
        return u
    if kind == 6:  # burning second price
        k = params[1]
        kp = params[2]
        mconf = params[3]
        mgn = params[4]
        mgd = params[5]
        price = keys[k] >> 4 if k < n else 0
        for j in range(n):
            b = keys[j] >> 4
            v = vals[15 - (keys[j] & 15)]
            if v < 0:
                continue
            if j < k:
                u += mconf * agd * mgd * (v - price)
                if b > v:
                    u -= (k - mconf) * agn * mgd * (b - v)
            elif b > v:
                u -= k * agn * mgd * (b - v)
        if miner:
            s = np.int64(0)
            for j in range(k, k + kp):
                if j < n:
                    s += keys[j] >> 4
            u += mgn * s * k * agd
        return u
    if kind == 7:  # highest pays the second highest to the miner
        price = keys[1] >> 4 if n >= 2 else 0
        for j in range(n):
            b = keys[j] >> 4
            v = vals[15 - (keys[j] & 15)]
            if j == 0:
                if v >= 0:
                    u += agd * (v - price)
            elif v >= 0 and b > v:
                u -= agn * (b - v)
        if miner:
            u += agd * price
        return u
    # kind 8: top bid and everything at or above r pay min(second bid, r)
    r = params[0]
    b2 = keys[1] >> 4 if n >= 2 else 0
    price = b2 if b2 < r else r
    for j in range(n):
        b = keys[j] >> 4
        v = vals[15 - (keys[j] & 15)]
        if j == 0 or b >= r:
            if v >= 0:
                u += agd * (v - price)
        elif v >= 0 and b > v:
            u -= agn * (b - v)
    if miner:
        u += agd * price
    return u


@njit(cache=True)
def _honest_u(kind, params, bids, vals, miner, agn, agd, keys):
    n = bids.shape[0]
    for i in range(n):
        keys[i] = bids[i] * 16 + 15 - i
    _sort_desc(keys, n)
    ninc = _incl_count(kind, params, keys, n)
    return _scaled_u(kind, params, keys, ninc, vals, miner, agn, agd)


@njit(cache=True)
def scan_user(kind, params, bids, values, user, cands, max_fakes, agn, agd):
    """First profitable (bid, fakes) deviation of a lone user under honest
    mining.  Returns (gain, packed deviation code, deviations evaluated)."""
    n = bids.shape[0]
    vals = np.full(16, -1, np.int64)
    vals[user] = values[user]
    vals[8] = 0
    vals[9] = 0
    keys = np.empty(16, np.int64)
    u0 = _honest_u(kind, params, bids, vals, False, agn, agd, keys)
    ncand = cands.shape[0]
    checked = np.int64(0)
    for bi in range(ncand):
        for nf in range(max_fakes + 1):
            if nf == 0:
                lo1, hi1 = -1, 0
            else:
                lo1, hi1 = 0, ncand
            for f1 in range(lo1, hi1):
                if nf < 2:
                    lo2, hi2 = -1, 0
                else:
                    lo2, hi2 = f1, ncand
                for f2 in range(lo2, hi2):
                    for i in range(n):
                        b = cands[bi] if i == user else bids[i]
                        keys[i] = b * 16 + 15 - i
                    ntot = n
                    if nf >= 1:
                        keys[ntot] = cands[f1] * 16 + (15 - 8)
                        ntot += 1
                    if nf >= 2:
                        keys[ntot] = cands[f2] * 16 + (15 - 9)
                        ntot += 1
                    _sort_desc(keys, ntot)
                    ninc = _incl_count(kind, params, keys, ntot)
                    u = _scaled_u(kind, params, keys, ninc, vals, False,
                                  agn, agd)
                    checked += 1
                    if u > u0:
                        code = (np.int64(bi) | np.int64(nf) << 8
                                | np.int64(max(f1, 0)) << 16
                                | np.int64(max(f2, 0)) << 24)
                        return u - u0, code, checked
    return np.int64(0), np.int64(-1), checked


@njit(cache=True)
def _insert_desc(keys, n, k):
    j = n
    while j > 0 and keys[j - 1] < k:
        keys[j] = keys[j - 1]
        j -= 1
    keys[j] = k


@njit(cache=True)
def _block_u(kind, params, keybase, base, f1v, f2v, nf, vals, agn, agd, keys):
    # keybase arrives sorted; fakes are merged in, keeping descending order
    for i in range(base):
        keys[i] = keybase[i]
    ntot = base
    if nf >= 1:
        _insert_desc(keys, ntot, f1v * 16 + (15 - 8))
        ntot += 1
    if nf >= 2:
        _insert_desc(keys, ntot, f2v * 16 + (15 - 9))
        ntot += 1
    return _scaled_u(kind, params, keys, ntot, vals, True, agn, agd)


@njit(cache=True)
def scan_blocks(kind, params, bids, values, coal_mask, cands, max_fakes, cap,
                agn, agd):
    """First block (real subset x coalition bids x fakes) that beats honest
    inclusion for the miner + coal_mask coalition."""
    n = bids.shape[0]
    vals = np.full(16, -1, np.int64)
    for i in range(n):
        if coal_mask >> i & 1:
            vals[i] = values[i]
    vals[8] = 0
    vals[9] = 0
    keys = np.empty(16, np.int64)
    u0 = _honest_u(kind, params, bids, vals, True, agn, agd, keys)
    nc = np.empty(8, np.int64)
    cm = np.empty(8, np.int64)
    nnc = 0
    m = 0
    for i in range(n):
        if coal_mask >> i & 1:
            cm[m] = i
            m += 1
        else:
            nc[nnc] = i
            nnc += 1
    ncand = cands.shape[0]
    checked = np.int64(0)
    keybase = np.empty(16, np.int64)
    l0 = ncand if m >= 1 else 0
    l1 = ncand if m >= 2 else 0
    l2 = ncand if m >= 3 else 0
    for ncmask in range(1 << nnc):
        ncsize = 0
        for j in range(nnc):
            if ncmask >> j & 1:
                ncsize += 1
        for o0 in range(-1, l0):
            for o1 in range(-1, l1):
                for o2 in range(-1, l2):
                    base = ncsize
                    idx = 0
                    for j in range(nnc):
                        if ncmask >> j & 1:
                            s = nc[j]
                            keybase[idx] = bids[s] * 16 + 15 - s
                            idx += 1
                    if o0 >= 0:
                        keybase[idx] = cands[o0] * 16 + 15 - cm[0]
                        idx += 1
                        base += 1
                    if o1 >= 0:
                        keybase[idx] = cands[o1] * 16 + 15 - cm[1]
                        idx += 1
                        base += 1
                    if o2 >= 0:
                        keybase[idx] = cands[o2] * 16 + 15 - cm[2]
                        idx += 1
                        base += 1
                    _sort_desc(keybase, base)
                    for nf in range(max_fakes + 1):
                        if cap >= 0 and base + nf > cap:
                            break
                        if nf == 0:
                            lo1, hi1 = -1, 0
                        else:
                            lo1, hi1 = 0, ncand
                        for f1 in range(lo1, hi1):
                            if nf < 2:
                                lo2, hi2 = -1, 0
                            else:
                                lo2, hi2 = f1, ncand
                            for f2 in range(lo2, hi2):
                                u = _block_u(kind, params, keybase, base,
                                             cands[max(f1, 0)],
                                             cands[max(f2, 0)],
                                             nf, vals, agn, agd, keys)
                                checked += 1
                                if u > u0:
                                    code = (np.int64(ncmask)
                                            | np.int64(o0 + 1) << 8
                                            | np.int64(o1 + 1) << 16
                                            | np.int64(o2 + 1) << 24
                                            | np.int64(nf) << 32
                                            | np.int64(max(f1, 0)) << 36
                                            | np.int64(max(f2, 0)) << 44)
                                    return u - u0, code, checked
    return np.int64(0), np.int64(-1), checked


# -- python wrappers -------------------------------------------------------

def _arrays(scenario: Scenario):
    bids = np.array([b.micro for b in scenario.bids.slots], np.int64)
    values = np.array([v.micro for v in scenario.true_values], np.int64)
    return bids, values


def _cand_array(cands: tuple[Money, ...]) -> np.ndarray:
    return np.array([c.micro for c in cands], np.int64)


def _verify(m, sc, profile, cfg, scaled_gain, denom) -> Witness:
    honest = utility_of(m, sc, honest_profile(sc), cfg.gamma)
    deviated = utility_of(m, sc, profile, cfg.gamma)
    gain = deviated - honest
    if gain != Fraction(int(scaled_gain), denom * MICRO):
        raise AssertionError("fast-engine witness failed exact replay")
    return Witness(sc, profile, honest, deviated, gain)


def audit_uic(m: Mechanism, scenarios: list[Scenario],
              cfg: AuditConfig) -> AuditReport:
    kind, params = encode_mechanism(m)
    denom = scale_denominator(m, cfg)
    agn, agd = cfg.gamma.numerator, cfg.gamma.denominator
    witnesses: list[Witness] = []
    n_scen = n_dev = 0
    for base in scenarios:
        if len(witnesses) >= cfg.max_witnesses:
            break
        n_scen += 1
        cands = scenario_candidates(m, base, cfg)
        carr = _cand_array(cands)
        bids, values = _arrays(base)
        for i in range(len(base.bids)):
            gain, code, checked = scan_user(
                kind, params, bids, values, i, carr, cfg.max_fake_bids,
                agn, agd)
            n_dev += int(checked)
            if gain > 0:
                bi = int(code) & 0xFF
                nf = int(code) >> 8 & 0xFF
                f1 = int(code) >> 16 & 0xFF
                f2 = int(code) >> 24 & 0xFF
                fakes = tuple(cands[j] for j in (f1, f2)[:nf])
                profile = StrategyProfile(
                    replace_slot(base.bids, i, cands[bi]), fakes, HONEST)
                sc = replace(base, coalition_users=frozenset({i}),
                             miner_in_coalition=False)
                witnesses.append(_verify(m, sc, profile, cfg, gain, denom))
                if len(witnesses) >= cfg.max_witnesses:
                    break
    verdict = FAIL if witnesses else PASS
    return AuditReport("UIC", cfg.gamma, verdict, tuple(witnesses),
                       n_scen, n_dev)


def _decode_block(base: Scenario, coal: tuple[int, ...],
                  cands: tuple[Money, ...], code: int
                  ) -> StrategyProfile:
    n = len(base.bids)
    noncoal = [i for i in range(n) if i not in coal]
    ncmask = code & 0xFF
    opts = [(code >> (8 * (j + 1))) & 0xFF for j in range(3)]
    nf = code >> 32 & 0xF
    f1 = code >> 36 & 0xFF
    f2 = code >> 44 & 0xFF
    bids = base.bids
    entries = [BlockEntry(base.bids[s], s)
               for j, s in enumerate(noncoal) if ncmask >> j & 1]
    for j, member in enumerate(coal):
        if opts[j] > 0:
            bid = cands[opts[j] - 1]
            bids = replace_slot(bids, member, bid)
            entries.append(BlockEntry(bid, member))
    fakes = tuple(cands[j] for j in (f1, f2)[:nf])
    entries += [BlockEntry(f, FAKE) for f in fakes]
    return StrategyProfile(bids, fakes, IncludedBlock(tuple(entries)))


def _audit_blocks(m: Mechanism, scenarios: list[Scenario], cfg: AuditConfig,
                  prop: str, c: int | None) -> AuditReport:
    kind, params = encode_mechanism(m)
    denom = scale_denominator(m, cfg)
    agn, agd = cfg.gamma.numerator, cfg.gamma.denominator
    cap = -1 if m.capacity is None else m.capacity
    witnesses: list[Witness] = []
    n_scen = n_dev = 0
    for base in scenarios:
        if len(witnesses) >= cfg.max_witnesses:
            break
        n_scen += 1
        cands = scenario_candidates(m, base, cfg)
        carr = _cand_array(cands)
        bids, values = _arrays(base)
        n = len(base.bids)
        if prop == "MIC":
            coalitions: list[tuple[int, ...]] = [()]
        else:
            coalitions = []
            import itertools
            for size in range(1, min(c, n) + 1):
                if size > 3:
                    raise ValueError("fast engine supports coalitions of <= 3 users")
                coalitions.extend(itertools.combinations(range(n), size))
        for coal in coalitions:
            mask = sum(1 << i for i in coal)
            gain, code, checked = scan_blocks(
                kind, params, bids, values, mask, carr, cfg.max_fake_bids,
                cap, agn, agd)
            n_dev += int(checked)
            if gain > 0:
                profile = _decode_block(base, coal, cands, int(code))
                sc = replace(base, coalition_users=frozenset(coal),
                             miner_in_coalition=True)
                witnesses.append(_verify(m, sc, profile, cfg, gain, denom))
                if len(witnesses) >= cfg.max_witnesses:
                    break
    verdict = FAIL if witnesses else PASS
    return AuditReport(prop, cfg.gamma, verdict, tuple(witnesses),
                       n_scen, n_dev, c)


def audit_mic(m, scenarios, cfg) -> AuditReport:
    return _audit_blocks(m, scenarios, cfg, "MIC", None)


def audit_scp(m, c, scenarios, cfg) -> AuditReport:
    return _audit_blocks(m, scenarios, cfg, "SCP", c)
