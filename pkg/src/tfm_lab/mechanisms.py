"""The nine concrete transaction-fee mechanisms.

Each mechanism is a pure rule set: an honest inclusion rule (what a
rule-following miner puts in the block) and a blockchain-side evaluation
(confirmation probabilities, payments, miner revenue, burn) over any block,
honest or adversarial.  Randomized confirmation is represented by exact
per-slot marginals; payments and miner revenue are deterministic given the
block, so the marginals are a lossless summary.

Block entries are canonically ordered by (bid descending, owner key
ascending): real slots in ascending slot order first, then fakes, then
padding.  Exact bid ties are therefore resolved deterministically in favour
of the lower real slot index; the block, as a multiset of owned bids, fully
determines the outcome.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import ClassVar

from .core import (FAKE, BidVector, ExpectedOutcome, RealizedOutcome,
                   SlotOutcome, ranked)
from .money import Gamma, Money, ZERO


class MechanismError(ValueError):
    """Invalid mechanism parameters or an invalid block for a mechanism."""


@dataclass(frozen=True)
class BlockEntry:
    bid: Money
    owner: int | str | None  # slot index, FAKE, or None for a padding zero
    is_padding: bool = False

    def __post_init__(self) -> None:
        if self.bid.is_negative:
            raise MechanismError("block entries must bid >= 0")
        if self.is_padding and self.bid != ZERO:
            raise MechanismError("padding entries must bid 0")


@dataclass(frozen=True)
class IncludedBlock:
    """An ordered list of included bids with their owners."""

    entries: tuple[BlockEntry, ...]
    source: BidVector | None = None

    @property
    def real_entries(self) -> tuple[BlockEntry, ...]:
        return tuple(e for e in self.entries if not e.is_padding)


def _canonical_perm(entries: tuple[BlockEntry, ...]) -> list[int]:
    def key(idx: int):
        e = entries[idx]
        if e.is_padding:
            prio = (2, idx)
        elif e.owner == FAKE:
            prio = (1, idx)
        else:
            prio = (0, e.owner)
        return (-e.bid.micro, prio)

    return sorted(range(len(entries)), key=key)


def _canonical(entries: tuple[BlockEntry, ...]) -> list[BlockEntry]:
    return [entries[i] for i in _canonical_perm(entries)]


def _bid_at(entries: list[BlockEntry], index: int) -> Money:
    """Bid at a rank, treating slots beyond the block as zero bids."""
    return entries[index].bid if index < len(entries) else ZERO


@dataclass(frozen=True)
class Mechanism:
    """Base class; concrete mechanisms are frozen dataclasses below."""

    kind: ClassVar[str] = ""

    @property
    def capacity(self) -> int | None:
        """Maximum number of transactions in a block; None means unbounded."""
        return None

    @property
    def is_deterministic(self) -> bool:
        return True

    # -- honest inclusion -------------------------------------------------
    def include_honest(self, bids: BidVector) -> IncludedBlock:
        entries = tuple(BlockEntry(bids[i], i) for i in ranked(bids).permutation)
        block = self.include_mempool(entries)
        return IncludedBlock(block.entries, source=bids)

    def include_mempool(self, entries) -> IncludedBlock:
        """Apply the honest inclusion rule to an arbitrary mempool.

        The mempool may contain fake entries (owner FAKE); the rule itself is
        identity-blind apart from deterministic tie-breaking.
        """
        kept = self._honest_filter(_canonical(tuple(entries)))
        pads = self._pad_count(len(kept))
        padding = (BlockEntry(ZERO, None, is_padding=True),) * pads
        return IncludedBlock(tuple(kept) + padding)

    def _honest_filter(self, ranked_entries: list[BlockEntry]) -> list[BlockEntry]:
        cap = self.capacity
        return ranked_entries if cap is None else ranked_entries[:cap]

    def _pad_count(self, n_included: int) -> int:
        return 0

    # -- evaluation -------------------------------------------------------
    def evaluate(self, block: IncludedBlock) -> ExpectedOutcome:
        reals = block.real_entries
        cap = self.capacity
        if cap is not None and len(reals) > cap:
            raise MechanismError(
                f"{self.kind}: block holds {len(reals)} transactions, capacity {cap}"
            )
        perm = _canonical_perm(block.entries)
        order = [block.entries[i] for i in perm]
        probs, pays, mu = self._outcome(order)
        by_pos: dict[int, tuple[Fraction, Money]] = {}
        for rank, orig in enumerate(perm):
            by_pos[orig] = (probs[rank], pays[rank])
        slots = tuple(
            SlotOutcome(
                included=True,
                confirm_prob=by_pos[i][0],
                conditional_payment=by_pos[i][1],
                is_fake=e.owner == FAKE,
                owner=None if e.is_padding else e.owner,
            )
            for i, e in enumerate(block.entries)
        )
        paid = sum((q * p.as_fraction() for q, p in zip(probs, pays)), Fraction(0))
        outcome = ExpectedOutcome(slots, mu, paid - mu)
        for slot, entry in zip(slots, block.entries):
            if slot.conditional_payment > entry.bid:
                raise MechanismError("payment exceeds bid")  # pragma: no cover
        return outcome

    def _outcome(self, order: list[BlockEntry]):
        """Per canonical-rank (confirm_prob, payment) lists plus miner revenue."""
        raise NotImplementedError

    # -- sampling ---------------------------------------------------------
    def sample(self, block: IncludedBlock, seed: int) -> RealizedOutcome:
        """Draw one confirmation set (Mersenne Twister seeded by `seed`).

        The returned sets and payment map are keyed by position in the
        block's canonical ranking.  Deterministic mechanisms return their
        single support point for every seed.
        """
        order = _canonical(block.entries)
        probs, pays, mu = self._outcome(order)
        confirmed = frozenset(
            i for i, q in enumerate(probs) if q == 1 and not order[i].is_padding
        )
        payments = {i: pays[i] for i in confirmed}
        total = sum((payments[i] for i in confirmed), ZERO)
        mu_money = Money(int(mu * 10 ** 6)) if mu.denominator == 1 or (mu * 10 ** 6).denominator == 1 else None
        if mu_money is None:  # pragma: no cover - all built-ins have exact micro mu
            raise MechanismError("miner revenue not representable in micro-units")
        return RealizedOutcome(confirmed, payments, mu_money, total - mu_money, seed)

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_json(data: dict | str) -> "Mechanism":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            kind = data["kind"]
        except (KeyError, TypeError):
            raise MechanismError("mechanism spec needs a 'kind' field")
        try:
            factory = _KINDS[kind]
        except KeyError:
            raise MechanismError(f"unknown mechanism kind {kind!r}")
        return factory(data)


def _block_size(data: dict) -> int | None:
    size = data.get("block_size")
    if size is None:
        return None
    if not isinstance(size, int) or size < 1:
        raise MechanismError(f"block_size must be a positive integer or null, got {size!r}")
    return size


def _reserve(data: dict) -> Money:
    r = Money.of(data["reserve"])
    if r.is_negative:
        raise MechanismError("reserve must be >= 0")
    return r


@dataclass(frozen=True)
class FirstPrice(Mechanism):
    """Top-B bids included and confirmed; everyone pays their bid to the miner."""

    block_size: int | None = None
    kind: ClassVar[str] = "first_price"

    @property
    def capacity(self) -> int | None:
        return self.block_size

    def _outcome(self, order):
        probs, pays = [], []
        for e in order:
            conf = not e.is_padding
            probs.append(Fraction(int(conf)))
            pays.append(e.bid if conf else ZERO)
        mu = sum((p.as_fraction() for p in pays), Fraction(0))
        return probs, pays, mu

    def to_json(self) -> dict:
        return {"kind": self.kind, "block_size": self.block_size}


@dataclass(frozen=True)
class SecondPrice(Mechanism):
    """Vickrey-style: top B included, top B-1 confirmed paying the B-th price."""

    block_size: int
    kind: ClassVar[str] = "second_price"

    def __post_init__(self) -> None:
        if self.block_size < 2:
            raise MechanismError("second_price needs block_size >= 2")

    @property
    def capacity(self) -> int:
        return self.block_size

    def _pad_count(self, n_included: int) -> int:
        return self.block_size - n_included

    def _outcome(self, order):
        price = _bid_at(order, self.block_size - 1)
        probs, pays = [], []
        for i, e in enumerate(order):
            conf = i <= self.block_size - 2 and not e.is_padding
            probs.append(Fraction(int(conf)))
            pays.append(price if conf else ZERO)
        mu = sum((p.as_fraction() for p in pays), Fraction(0))
        return probs, pays, mu

    def to_json(self) -> dict:
        return {"kind": self.kind, "block_size": self.block_size}


@dataclass(frozen=True)
class PostedPriceNoBurn(Mechanism):
    """Every bid >= r is included and confirmed at price r; miner keeps all."""

    reserve: Money
    kind: ClassVar[str] = "posted_price_no_burn"

    def _honest_filter(self, ranked_entries):
        return [e for e in ranked_entries if e.bid >= self.reserve]

    def _outcome(self, order):
        probs, pays = [], []
        for e in order:
            conf = not e.is_padding and e.bid >= self.reserve
            probs.append(Fraction(int(conf)))
            pays.append(self.reserve if conf else ZERO)
        mu = sum((p.as_fraction() for p in pays), Fraction(0))
        return probs, pays, mu

    def to_json(self) -> dict:
        return {"kind": self.kind, "reserve": str(self.reserve)}


@dataclass(frozen=True)
class PostedPriceBurnAll(Mechanism):
    """Posted price r with the entire payment burnt; the miner gets nothing.

    With a finite block size the top-B ranked bids among those >= r are
    included (the congested regime).
    """

    reserve: Money
    block_size: int | None = None
    kind: ClassVar[str] = "posted_price_burn_all"

    @property
    def capacity(self) -> int | None:
        return self.block_size

    def _honest_filter(self, ranked_entries):
        eligible = [e for e in ranked_entries if e.bid >= self.reserve]
        return eligible if self.block_size is None else eligible[: self.block_size]

    def _outcome(self, order):
        probs, pays = [], []
        for e in order:
            conf = not e.is_padding and e.bid >= self.reserve
            probs.append(Fraction(int(conf)))
            pays.append(self.reserve if conf else ZERO)
        return probs, pays, Fraction(0)

    def to_json(self) -> dict:
        return {"kind": self.kind, "reserve": str(self.reserve),
                "block_size": self.block_size}


@dataclass(frozen=True)
class FirstPriceOrFree(Mechanism):
    """All bids included; only the top bid confirms, free when it is alone."""

    kind: ClassVar[str] = "first_price_or_free"

    def _outcome(self, order):
        n = len([e for e in order if not e.is_padding])
        probs = [Fraction(0)] * len(order)
        pays = [ZERO] * len(order)
        if n >= 1:
            probs[0] = Fraction(1)
            pays[0] = ZERO if n == 1 else order[0].bid
        mu = pays[0].as_fraction() if n >= 1 else Fraction(0)
        return probs, pays, mu

    def to_json(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class BurningSecondPrice(Mechanism):
    """Top B included; a random floor(gamma*k/c) of the top k confirm and pay
    the (k+1)-th price; the miner is paid gamma times the sum of the (k+1)-th
    through (k+k')-th prices and the rest of the payment is burnt.
    """

    block_size: int
    k: int
    k_prime: int
    gamma: Gamma
    c: int
    kind: ClassVar[str] = "burning_second_price"

    def __post_init__(self) -> None:
        if self.c < 1:
            raise MechanismError("coalition parameter c must be >= 1")
        if self.k < 1 or self.k_prime < 1:
            raise MechanismError("k and k' must be >= 1")
        if self.k + self.k_prime != self.block_size:
            raise MechanismError("k + k' must equal the block size")
        if self.k_prime > self.confirm_count:
            raise MechanismError(
                f"k'={self.k_prime} exceeds floor(gamma*k/c)={self.confirm_count}"
            )

    @property
    def confirm_count(self) -> int:
        """floor(gamma * k / c): how many of the top k bids confirm."""
        return (self.gamma.numerator * self.k) // (self.gamma.denominator * self.c)

    @property
    def capacity(self) -> int:
        return self.block_size

    @property
    def is_deterministic(self) -> bool:
        return self.confirm_count == self.k

    def _pad_count(self, n_included: int) -> int:
        return self.block_size - n_included

    def _outcome(self, order):
        k, kp = self.k, self.k_prime
        price = _bid_at(order, k)
        q_top = Fraction(self.confirm_count, k)
        probs, pays = [], []
        for i, e in enumerate(order):
            eligible = i < k and not e.is_padding
            probs.append(q_top if eligible else Fraction(0))
            pays.append(price if eligible else ZERO)
        mu = self.gamma.as_fraction() * sum(
            (_bid_at(order, j).as_fraction() for j in range(k, k + kp)), Fraction(0)
        )
        return probs, pays, mu

    def sample(self, block: IncludedBlock, seed: int) -> RealizedOutcome:
        if self.is_deterministic:
            return super().sample(block, seed)
        order = _canonical(block.entries)
        price = _bid_at(order, self.k)
        rng = random.Random(seed)
        drawn = rng.sample(range(self.k), self.confirm_count)
        confirmed = frozenset(
            i for i in drawn if i < len(order) and not order[i].is_padding
        )
        payments = {i: price for i in confirmed}
        total = sum((payments[i] for i in confirmed), ZERO)
        _, _, mu = self._outcome(order)
        mu_money = Money(int(mu * 10 ** 6))
        return RealizedOutcome(confirmed, payments, mu_money, total - mu_money, seed)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "block_size": self.block_size,
            "k": self.k,
            "k_prime": self.k_prime,
            "gamma": str(self.gamma),
            "c": self.c,
        }


@dataclass(frozen=True)
class Solitary(Mechanism):
    """Include the top two bids; the highest confirms and pays the second
    highest, which goes to the miner in full."""

    kind: ClassVar[str] = "solitary"

    @property
    def capacity(self) -> int:
        return 2

    def _pad_count(self, n_included: int) -> int:
        return 2 - n_included

    def _outcome(self, order):
        probs = [Fraction(0)] * len(order)
        pays = [ZERO] * len(order)
        mu = Fraction(0)
        if order and not order[0].is_padding:
            price = _bid_at(order, 1)
            probs[0] = Fraction(1)
            pays[0] = price
            mu = price.as_fraction()
        return probs, pays, mu

    def to_json(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class SolitaryOrPostedPrice(Mechanism):
    """Include the top two bids and every bid >= r; the top bid and every bid
    >= r confirm, all paying min(second price, r); the miner is paid that same
    amount once and the rest is burnt.  Defined for infinite block size."""

    reserve: Money
    kind: ClassVar[str] = "solitary_or_posted_price"

    def _honest_filter(self, ranked_entries):
        keep = max(2, sum(1 for e in ranked_entries if e.bid >= self.reserve))
        return ranked_entries[:keep]

    def _outcome(self, order):
        n = len([e for e in order if not e.is_padding])
        probs = [Fraction(0)] * len(order)
        pays = [ZERO] * len(order)
        if n == 0:
            return probs, pays, Fraction(0)
        price = min(_bid_at(order, 1), self.reserve)
        for i, e in enumerate(order):
            if e.is_padding:
                continue
            if i == 0 or e.bid >= self.reserve:
                probs[i] = Fraction(1)
                pays[i] = price
        return probs, pays, price.as_fraction()

    def to_json(self) -> dict:
        return {"kind": self.kind, "reserve": str(self.reserve)}


@dataclass(frozen=True)
class Trivial(Mechanism):
    """Includes nothing, confirms nothing, pays the miner nothing."""

    kind: ClassVar[str] = "trivial"

    def _honest_filter(self, ranked_entries):
        return []

    def _outcome(self, order):
        return [Fraction(0)] * len(order), [ZERO] * len(order), Fraction(0)

    def to_json(self) -> dict:
        return {"kind": self.kind}


_KINDS = {
    "first_price": lambda d: FirstPrice(_block_size(d)),
    "second_price": lambda d: SecondPrice(d["block_size"]),
    "posted_price_no_burn": lambda d: PostedPriceNoBurn(_reserve(d)),
    "posted_price_burn_all": lambda d: PostedPriceBurnAll(_reserve(d), _block_size(d)),
    "first_price_or_free": lambda d: FirstPriceOrFree(),
    "burning_second_price": lambda d: BurningSecondPrice(
        d["block_size"], d["k"], d["k_prime"], Gamma.parse(d["gamma"]), d["c"]
    ),
    "solitary": lambda d: Solitary(),
    "solitary_or_posted_price": lambda d: SolitaryOrPostedPrice(_reserve(d)),
    "trivial": lambda d: Trivial(),
}


def include_honest(m: Mechanism, bids: BidVector) -> IncludedBlock:
    return m.include_honest(bids)


def evaluate(m: Mechanism, block: IncludedBlock) -> ExpectedOutcome:
    return m.evaluate(block)


def sample(m: Mechanism, block: IncludedBlock, seed: int) -> RealizedOutcome:
    return m.sample(block, seed)
