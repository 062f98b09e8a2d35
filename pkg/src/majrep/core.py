"""Ballot and election data model, validation, and tallying primitives.

Parties are identified positionally: a party id is an index into the
election's ordered party-name list.  Voters who approved exactly the same
set of parties are merged into a single :class:`BallotType` carrying a
count; per-voter identity is never retained past validation.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

PartyId = int


class ElectionError(ValueError):
    """Raised when ballot input cannot form a valid election."""


@dataclass(frozen=True)
class BallotType:
    """A group of identical approval ballots.

    approvals is the (non-empty) set of approved party ids, count the
    number of voters who cast exactly this set.  preferences optionally
    names a candidate per approved party; keys must lie in approvals.
    """

    approvals: frozenset[PartyId]
    count: int
    preferences: Mapping[PartyId, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.approvals:
            raise ElectionError("ballot type with empty approval set")
        if self.count < 0:
            raise ElectionError(f"negative ballot count {self.count}")
        if not set(self.preferences) <= self.approvals:
            raise ElectionError("candidate preference for a party not approved")
        object.__setattr__(self, "approvals", frozenset(self.approvals))
        object.__setattr__(self, "preferences", dict(self.preferences))


@dataclass(frozen=True)
class Election:
    """An ordered party list plus a multiset of ballot types.

    total_voters equals the sum of ballot-type counts; invalid (empty)
    ballots dropped during validation are reported in invalid_ballots and
    excluded from total_voters.
    """

    parties: tuple[str, ...]
    ballot_types: tuple[BallotType, ...]
    total_voters: int
    invalid_ballots: int = 0

    def __post_init__(self):
        if len(set(self.parties)) != len(self.parties):
            raise ElectionError("duplicate party names")
        seen: set[frozenset[PartyId]] = set()
        for bt in self.ballot_types:
            if not all(0 <= p < len(self.parties) for p in bt.approvals):
                raise ElectionError(f"party index out of range in {sorted(bt.approvals)}")
            if bt.approvals in seen:
                raise ElectionError(f"duplicate approval set {sorted(bt.approvals)}")
            seen.add(bt.approvals)
        if self.total_voters != sum(bt.count for bt in self.ballot_types):
            raise ElectionError("total_voters does not match ballot counts")

    @property
    def num_parties(self) -> int:
        return len(self.parties)

    def party_index(self, name: str) -> PartyId:
        try:
            return self.parties.index(name)
        except ValueError:
            raise ElectionError(f"unknown party name {name!r}") from None


@dataclass(frozen=True)
class Tally:
    """Per-party approval counts, aligned with the election's party list."""

    counts: tuple[int, ...]

    def __getitem__(self, party: PartyId) -> int:
        return self.counts[party]

    def __len__(self) -> int:
        return len(self.counts)

    def max_parties(self) -> list[PartyId]:
        """Ids of the parties sharing the maximum count."""
        top = max(self.counts)
        return [i for i, c in enumerate(self.counts) if c == top]


@dataclass(frozen=True)
class RankedBallot:
    """A total order over all parties, most preferred first."""

    ranking: tuple[PartyId, ...]

    def prefers(self, a: PartyId, b: PartyId) -> PartyId:
        """Return whichever of a, b is ranked higher."""
        for p in self.ranking:
            if p == a or p == b:
                return p
        raise ValueError(f"ranking covers neither {a} nor {b}")


@dataclass(frozen=True)
class SingleVoteBallot:
    """A classic one-party ballot, used by the comparator systems."""

    choice: PartyId


def validate_election(
    parties: Sequence[str],
    raw_ballots: Iterable[Iterable[PartyId] | BallotType],
) -> Election:
    """Normalize raw approval ballots into an Election.

    Accepts either per-voter approval sets or pre-grouped BallotTypes;
    identical approval sets are merged with summed counts.  Empty-approval
    ballots are dropped, counted in Election.invalid_ballots, and excluded
    from total_voters.  Raises ElectionError on out-of-range party ids,
    duplicate party names, or conflicting candidate preferences for one
    approval set.
    """
    parties = tuple(parties)
    merged: dict[frozenset[PartyId], int] = {}
    prefs: dict[frozenset[PartyId], dict[PartyId, str]] = {}
    invalid = 0
    for raw in raw_ballots:
        if isinstance(raw, BallotType):
            approvals, count, pref = raw.approvals, raw.count, raw.preferences
        else:
            approvals, count, pref = frozenset(raw), 1, {}
        if not approvals:
            invalid += count
            continue
        if not all(0 <= p < len(parties) for p in approvals):
            raise ElectionError(f"party index out of range in {sorted(approvals)}")
        merged[approvals] = merged.get(approvals, 0) + count
        for p, name in pref.items():
            existing = prefs.setdefault(approvals, {}).get(p)
            if existing is not None and existing != name:
                raise ElectionError(
                    f"conflicting candidate preferences {existing!r} vs {name!r} "
                    f"for party {parties[p]}"
                )
            prefs.setdefault(approvals, {})[p] = name
    types = tuple(
        BallotType(approvals, count, prefs.get(approvals, {}))
        for approvals, count in merged.items()
    )
    return Election(parties, types, sum(t.count for t in types), invalid)


def tally_remaining(election: Election, removed: Iterable[PartyId] = ()) -> Tally:
    """Count approvals among ballot types disjoint from the removed parties.

    Removed parties tally 0, as do parties appearing only alongside them.
    """
    removed = frozenset(removed)
    counts = [0] * election.num_parties
    for bt in election.ballot_types:
        if bt.approvals & removed:
            continue
        for p in bt.approvals:
            counts[p] += bt.count
    return Tally(tuple(counts))


def only_voted_count(election: Election, party: PartyId) -> int:
    """Number of ballots whose approval set is exactly {party}."""
    if not 0 <= party < election.num_parties:
        raise ElectionError(f"party index {party} out of range")
    singleton = frozenset((party,))
    return sum(bt.count for bt in election.ballot_types if bt.approvals == singleton)


def total_approvals(election: Election, party: PartyId) -> int:
    """Total count of ballots approving the party (alone or with others)."""
    return sum(bt.count for bt in election.ballot_types if party in bt.approvals)
