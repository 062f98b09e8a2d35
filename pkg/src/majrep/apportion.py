"""Seat apportionment and comparator election rules.

Gives parliament seats for assigned-ballot counts (largest remainder with
the Hare quota), plus the two systems used as points of comparison: a pure
proportional rule over single-vote ballots and the Italian bonus rule
(entry threshold, majority bonus, runoff between the top two).
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from .core import RankedBallot, SingleVoteBallot

DEFAULT_THRESHOLD = 0.03
DEFAULT_MAJORITY_TRIGGER = 0.40
DEFAULT_BONUS_SHARE = 0.54


class ApportionError(ValueError):
    """Raised when seats cannot be apportioned as requested."""


@dataclass(frozen=True)
class SeatVector:
    """Seats per party; always sums to house_size."""

    seats: tuple[int, ...]
    house_size: int

    def __post_init__(self):
        object.__setattr__(self, "seats", tuple(self.seats))
        if any(s < 0 for s in self.seats):
            raise ApportionError("negative seat count")
        if sum(self.seats) != self.house_size:
            raise ApportionError(
                f"seats sum to {sum(self.seats)}, house size is {self.house_size}"
            )

    def __getitem__(self, party: int) -> int:
        return self.seats[party]

    def __len__(self) -> int:
        return len(self.seats)


@dataclass(frozen=True)
class ItalicumConfig:
    """Entry threshold, bonus trigger, and bonus share of the house."""

    threshold: float = DEFAULT_THRESHOLD
    majority_trigger: float = DEFAULT_MAJORITY_TRIGGER
    bonus_share: float = DEFAULT_BONUS_SHARE

    def __post_init__(self):
        if not 0 <= self.threshold < self.majority_trigger < self.bonus_share <= 1:
            raise ApportionError(
                "need 0 <= threshold < majority_trigger < bonus_share <= 1"
            )


@dataclass(frozen=True)
class RunoffReport:
    """Second round between the two leading parties, decided by rankings."""

    finalists: tuple[int, int]
    votes: tuple[int, int]
    abstained: int  # rankings naming neither finalist
    winner: int


@dataclass(frozen=True)
class ItalicumReport:
    """How the bonus rule played out: threshold, trigger or runoff, bonus."""

    vote_counts: tuple[int, ...]
    eligible: tuple[int, ...]  # parties at or above the threshold
    winner: int
    winner_share: float
    bonus_seats: int
    triggered: bool  # True: share above trigger; False: runoff held
    runoff: RunoffReport | None = None
    notes: tuple[str, ...] = ()


def seats_largest_remainder(counts: Sequence[int], house_size: int) -> SeatVector:
    """Hare-quota largest remainder, remainder ties broken by list order.

    Exact integer arithmetic: party i's floor is counts[i]*house_size //
    total and its remainder counts[i]*house_size % total, so no float ever
    decides a seat.
    """
    if house_size <= 0:
        raise ApportionError(f"house size must be positive, got {house_size}")
    counts = list(counts)
    if any(c < 0 for c in counts):
        raise ApportionError("negative vote count")
    total = sum(counts)
    if total <= 0:
        raise ApportionError("no votes to apportion")
    floors = [c * house_size // total for c in counts]
    remainders = [c * house_size % total for c in counts]
    leftover = house_size - sum(floors)
    by_remainder = sorted(range(len(counts)), key=lambda i: (-remainders[i], i))
    seats = list(floors)
    for i in by_remainder[:leftover]:
        seats[i] += 1
    return SeatVector(tuple(seats), house_size)


def single_vote_counts(ballots: Sequence[SingleVoteBallot], num_parties: int) -> tuple[int, ...]:
    """Tally single-choice ballots into a per-party count vector."""
    counts = [0] * num_parties
    for b in ballots:
        if not 0 <= b.choice < num_parties:
            raise ApportionError(f"single vote names unknown party {b.choice}")
        counts[b.choice] += 1
    return tuple(counts)


def pure_proportional(
    ballots: Sequence[SingleVoteBallot], num_parties: int, house_size: int
) -> SeatVector:
    """Largest-remainder seats straight from single votes, no threshold."""
    if not ballots:
        raise ApportionError("no single-vote ballots")
    return seats_largest_remainder(single_vote_counts(ballots, num_parties), house_size)


def _runoff(
    finalists: tuple[int, int], ranked_ballots: Sequence[RankedBallot]
) -> RunoffReport:
    """Count each ranking for whichever finalist it places higher."""
    a, b = finalists
    votes_a = votes_b = abstained = 0
    for ballot in ranked_ballots:
        try:
            higher = ballot.prefers(a, b)
        except ValueError:
            abstained += 1  # truncated ranking naming neither finalist
            continue
        if higher == a:
            votes_a += 1
        else:
            votes_b += 1
    # A tied runoff falls to the party earlier in list order.
    winner = a if votes_a >= votes_b else b
    return RunoffReport(finalists, (votes_a, votes_b), abstained, winner)


def italicum(
    single_votes: Sequence[SingleVoteBallot],
    ranked_ballots: Sequence[RankedBallot],
    num_parties: int,
    house_size: int,
    config: ItalicumConfig = ItalicumConfig(),
) -> tuple[SeatVector, ItalicumReport]:
    """Majority-bonus rule: threshold, 54%-style bonus, runoff if needed.

    Parties below the entry threshold are dropped.  If the leading party's
    vote share strictly exceeds the trigger it takes the bonus outright;
    otherwise the top two meet in a runoff decided by the ranked ballots.
    The bonus is round-half-up of bonus_share * house_size and acts as a
    floor: a winner already entitled to more keeps the larger figure.
    Remaining seats go to the other eligible parties by largest remainder.
    """
    counts = single_vote_counts(single_votes, num_parties)
    total = sum(counts)
    if total == 0:
        raise ApportionError("no single-vote ballots")
    threshold = Fraction(str(config.threshold))
    trigger = Fraction(str(config.majority_trigger))
    eligible = tuple(
        i for i in range(num_parties) if Fraction(counts[i], total) >= threshold
    )
    if len(eligible) < 2:
        raise ApportionError(
            f"{len(eligible)} party(ies) above the {config.threshold:.0%} threshold; "
            "need at least 2"
        )
    notes: list[str] = []
    top = max(eligible, key=lambda i: (counts[i], -i))
    top_share = Fraction(counts[top], total)
    runoff = None
    if top_share > trigger:
        winner = top
        triggered = True
    else:
        if not ranked_ballots:
            raise ApportionError("runoff needed but no ranked ballots supplied")
        second = max(
            (i for i in eligible if i != top), key=lambda i: (counts[i], -i)
        )
        runoff = _runoff((min(top, second), max(top, second)), ranked_ballots)
        winner = runoff.winner
        triggered = False
        if runoff.abstained:
            notes.append(
                f"{runoff.abstained} ranking(s) named neither finalist and were set aside"
            )

    bonus = int(config.bonus_share * house_size + 0.5)
    proportional = seats_largest_remainder(
        [counts[i] if i in eligible else 0 for i in range(num_parties)], house_size
    )
    if proportional[winner] > bonus:
        bonus = proportional[winner]
        notes.append(
            "winner's proportional entitlement exceeds the bonus; bonus acts as a floor"
        )
    seats = [0] * num_parties
    seats[winner] = bonus
    others = [i for i in eligible if i != winner]  # non-empty: eligible >= 2
    rest = house_size - bonus
    if rest < 0:
        raise ApportionError("bonus exceeds the house size")
    if rest > 0:
        sub = seats_largest_remainder([counts[i] for i in others], rest)
        for i, s in zip(others, sub.seats):
            seats[i] = s
    report = ItalicumReport(
        vote_counts=counts,
        eligible=eligible,
        winner=winner,
        winner_share=float(top_share if triggered else Fraction(counts[winner], total)),
        bonus_seats=seats[winner],
        triggered=triggered,
        runoff=runoff,
        notes=tuple(notes),
    )
    return SeatVector(tuple(seats), house_size), report
