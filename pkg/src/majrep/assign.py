"""Ballot-to-party assignment procedures.

Every procedure here takes an election whose voters approved one or more
parties and assigns each ballot to exactly one approved party, returning
an :class:`Assignment` with a full round-by-round trace.  Variants: greedy
(most-approved party absorbs first), fixed order, capped greedy, and the
two-house minimum rule.  Ties are resolved by a :class:`TiePolicy`
declared up front.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .core import Election, PartyId, only_voted_count

SPLIT = "split"
AUTHORITY = "authority"
SKIP = "skip"

SPLIT_CONVENTION_NOTE = (
    "split convention: ballots approving only one tied party stay with it; "
    "only ballots approving both are divided, odd remainder to the earlier party"
)


class AssignmentError(ValueError):
    """Raised when an assignment procedure cannot run as requested."""


class TieUnresolvedError(AssignmentError):
    """Raised when the configured tie policy cannot break a tie."""


@dataclass(frozen=True)
class TiePolicy:
    """Declared-in-advance tie rule: split, authority order, or skip."""

    kind: str
    order: tuple[PartyId, ...] | None = None

    def __post_init__(self):
        if self.kind not in (SPLIT, AUTHORITY, SKIP):
            raise AssignmentError(f"unknown tie policy {self.kind!r}")
        if self.order is not None:
            object.__setattr__(self, "order", tuple(self.order))

    @classmethod
    def split(cls) -> TiePolicy:
        return cls(SPLIT)

    @classmethod
    def authority(cls, order: Sequence[PartyId] | None = None) -> TiePolicy:
        return cls(AUTHORITY, tuple(order) if order is not None else None)

    @classmethod
    def skip(cls) -> TiePolicy:
        return cls(SKIP)


@dataclass(frozen=True)
class CapConfig:
    """Cap on any single party's share of assigned ballots."""

    threshold: float
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 < self.threshold <= 1:
            raise AssignmentError(f"cap threshold {self.threshold} outside (0, 1]")


@dataclass(frozen=True)
class TieResolution:
    """Outcome of resolve_tie: a single selection or a split instruction."""

    kind: str  # "select" or "split"
    parties: tuple[PartyId, ...]
    via: str  # "authority" or "skip" for selections, "split" otherwise


@dataclass(frozen=True)
class Round:
    """One absorption round: the remaining tallies seen before selecting.

    selected holds one party normally, two when a tie was split; absorbed
    is aligned with selected.
    """

    tally_before: tuple[int, ...]
    selected: tuple[PartyId, ...]
    absorbed: tuple[int, ...]
    note: str = ""


@dataclass(frozen=True)
class Assignment:
    """Result of assigning every ballot to one approved party.

    assigned is the per-party ballot count (sums to the election's voter
    total); per_type[j] maps party id -> portion of ballot type j it
    received; order lists parties in selection order; rounds is the full
    trace.
    """

    assigned: tuple[int, ...]
    order: tuple[PartyId, ...]
    rounds: tuple[Round, ...]
    per_type: tuple[dict[PartyId, int], ...]
    diagnostics: tuple[str, ...] = ()
    seed: int | None = None


class _Entry:
    """A live pool entry: ballots of one original type, possibly with an
    effective approval set reduced by cap declines."""

    __slots__ = ("approvals", "count", "type_index", "alive")

    def __init__(self, approvals: frozenset[PartyId], count: int, type_index: int):
        self.approvals = approvals
        self.count = count
        self.type_index = type_index
        self.alive = True


class AssignmentEngine:
    """Mutable round-by-round driver shared by all assignment procedures.

    Maintains incremental remaining tallies (each pool entry touches them
    exactly twice: on insertion and on removal), so a full run costs
    O(total approvals) regardless of round count.
    """

    def __init__(
        self,
        election: Election,
        cap_count: int | None = None,
        rng: np.random.Generator | None = None,
    ):
        self.election = election
        self.cap_count = cap_count
        self.rng = rng
        p = election.num_parties
        self.tally = [0] * p
        self.buckets: list[list[_Entry]] = [[] for _ in range(p)]
        self.remaining = 0
        self.selected: set[PartyId] = set()
        self.order: list[PartyId] = []
        self.rounds: list[Round] = []
        self.per_type: list[dict[PartyId, int]] = [{} for _ in election.ballot_types]
        self.assigned = [0] * p
        self.diagnostics: list[str] = []
        for j, bt in enumerate(election.ballot_types):
            self._add_entry(_Entry(bt.approvals, bt.count, j))

    def _add_entry(self, entry: _Entry) -> None:
        if entry.count == 0:
            return
        self.remaining += entry.count
        for p in entry.approvals:
            self.tally[p] += entry.count
            self.buckets[p].append(entry)

    def _kill_entry(self, entry: _Entry) -> None:
        entry.alive = False
        self.remaining -= entry.count
        for p in entry.approvals:
            self.tally[p] -= entry.count

    @property
    def finished(self) -> bool:
        return self.remaining == 0

    def current_tally(self) -> tuple[int, ...]:
        return tuple(self.tally)

    def leaders(self) -> list[PartyId]:
        """Unselected parties sharing the maximum remaining tally."""
        best = max(
            (self.tally[i] for i in range(len(self.tally)) if i not in self.selected),
            default=0,
        )
        return [
            i
            for i in range(len(self.tally))
            if i not in self.selected and self.tally[i] == best
        ]

    def _containing(self, party: PartyId) -> list[_Entry]:
        live = [e for e in self.buckets[party] if e.alive]
        self.buckets[party] = live
        return live

    def _credit(self, party: PartyId, entry: _Entry, count: int) -> None:
        if count:
            pt = self.per_type[entry.type_index]
            pt[party] = pt.get(party, 0) + count
            self.assigned[party] += count

    def _absorb(self, party: PartyId, entries: list[_Entry]) -> int:
        """Give `party` the listed entries, honoring the cap if configured.

        Returns the number of ballots absorbed.  Declined ballots re-enter
        the pool with `party` removed from their effective approval set.
        """
        if self.cap_count is None:
            taken = 0
            for e in entries:
                self._kill_entry(e)
                self._credit(party, e, e.count)
                taken += e.count
            return taken

        singles = [e for e in entries if e.approvals == frozenset((party,))]
        multis = [e for e in entries if e.approvals != frozenset((party,))]
        single_total = sum(e.count for e in singles)
        budget = self.cap_count - self.assigned[party] - single_total
        if budget < 0:
            self.diagnostics.append(
                f"cap violation: party {self.election.parties[party]} holds "
                f"{single_total} sole-approval ballots, above the cap of {self.cap_count}"
            )
            budget = 0
        multi_total = sum(e.count for e in multis)
        if multi_total <= budget:
            takes = [e.count for e in multis]
        elif self.rng is None:
            raise AssignmentError("cap binds but no random generator configured")
        else:
            takes = [
                int(t)
                for t in self.rng.multivariate_hypergeometric(
                    [e.count for e in multis], budget
                )
            ]
        taken = 0
        for e in singles:
            self._kill_entry(e)
            self._credit(party, e, e.count)
            taken += e.count
        for e, t in zip(multis, takes):
            leftover = e.count - t
            self._kill_entry(e)
            self._credit(party, e, t)
            taken += t
            if leftover:
                self._add_entry(
                    _Entry(e.approvals - {party}, leftover, e.type_index)
                )
        return taken

    def select(self, party: PartyId, note: str = "") -> int:
        """Absorb all remaining ballots approving `party` (subject to cap)."""
        if party in self.selected:
            raise AssignmentError(
                f"party {self.election.parties[party]} already selected"
            )
        tally_before = self.current_tally()
        self.selected.add(party)
        self.order.append(party)
        taken = self._absorb(party, self._containing(party))
        self.rounds.append(Round(tally_before, (party,), (taken,), note))
        return taken

    def select_split(self, first: PartyId, second: PartyId, note: str = "") -> tuple[int, int]:
        """Select two tied parties at once, dividing their shared ballots.

        Ballots approving only one of the pair stay with it; ballots
        approving both are divided as evenly as possible, any odd
        remainder favoring the party earlier in list order.
        """
        x, y = sorted((first, second))
        for p in (x, y):
            if p in self.selected:
                raise AssignmentError(
                    f"party {self.election.parties[p]} already selected"
                )
        tally_before = self.current_tally()
        self.selected.update((x, y))
        self.order.extend((x, y))

        containing_x = self._containing(x)
        only_x = [e for e in containing_x if y not in e.approvals]
        shared = [e for e in containing_x if y in e.approvals]

        # Divide each shared entry, keeping the running totals balanced so
        # the overall difference never exceeds one ballot and any odd
        # remainder lands on the earlier party.
        shared_x = shared_y = 0
        splits: list[tuple[_Entry, int]] = []
        for e in shared:
            half, odd = divmod(e.count, 2)
            cx = half
            if odd and shared_x <= shared_y:
                cx += 1
            shared_x += cx
            shared_y += e.count - cx
            splits.append((e, cx))

        taken_x = self._absorb(x, only_x)
        for e, cx in splits:
            if cx == 0:
                continue
            # Carve x's half into its own live entry, then absorb it.
            e.count -= cx
            self.remaining -= cx
            for p in e.approvals:
                self.tally[p] -= cx
            if e.count == 0:
                e.alive = False
            view = _Entry(e.approvals, cx, e.type_index)
            self._add_entry(view)
            taken_x += self._absorb(x, [view])
        # y's live bucket now holds its sole ballots, its half of the
        # shared ones, and anything x's cap declined that still names y.
        taken_y = self._absorb(y, self._containing(y))

        self.rounds.append(Round(tally_before, (x, y), (taken_x, taken_y), note))
        return taken_x, taken_y

    def result(self) -> Assignment:
        if not self.finished:
            raise AssignmentError("assignment still has unabsorbed ballots")
        return Assignment(
            assigned=tuple(self.assigned),
            order=tuple(self.order),
            rounds=tuple(self.rounds),
            per_type=tuple(dict(d) for d in self.per_type),
            diagnostics=tuple(self.diagnostics),
            seed=None,
        )


def default_tie_policy(election: Election) -> TiePolicy:
    """Authority policy following the input party-list order."""
    return TiePolicy.authority(range(election.num_parties))


def resolve_tie(
    tallies: Sequence[int], tied: Sequence[PartyId], policy: TiePolicy
) -> TieResolution:
    """Resolve a tie for the maximum remaining tally.

    Authority picks the tied party earliest in the declared order; skip
    picks the best strictly-lower untied party, falling through further
    tied groups; split instructs a two-way division of the pair's ballots.
    """
    tied = sorted(tied)
    if len(tied) < 2:
        raise AssignmentError("resolve_tie called without a tie")
    if policy.kind == AUTHORITY:
        if policy.order is None:
            raise TieUnresolvedError(
                "authority tie policy has no declared order"
            )
        if sorted(policy.order) != list(range(len(tallies))):
            raise AssignmentError("authority order is not a permutation of all parties")
        rank = {p: i for i, p in enumerate(policy.order)}
        return TieResolution("select", (min(tied, key=rank.__getitem__),), AUTHORITY)
    if policy.kind == SKIP:
        masked = set(tied)
        while True:
            candidates = [
                i
                for i in range(len(tallies))
                if i not in masked and tallies[i] > 0
            ]
            if not candidates:
                raise TieUnresolvedError(
                    "skip policy found no untied party left to select"
                )
            best = max(tallies[i] for i in candidates)
            group = [i for i in candidates if tallies[i] == best]
            if len(group) == 1:
                return TieResolution("select", (group[0],), SKIP)
            masked.update(group)
    # split
    if len(tied) != 2:
        raise TieUnresolvedError(
            f"split policy supports exactly 2 tied parties, got {len(tied)}"
        )
    return TieResolution("split", tuple(tied), SPLIT)


def _run_greedy(engine: AssignmentEngine, policy: TiePolicy) -> None:
    parties = engine.election.parties
    while not engine.finished:
        tied = engine.leaders()
        if len(tied) == 1:
            engine.select(tied[0])
            continue
        res = resolve_tie(engine.current_tally(), tied, policy)
        tied_names = ", ".join(parties[p] for p in tied)
        if res.kind == "split":
            if SPLIT_CONVENTION_NOTE not in engine.diagnostics:
                engine.diagnostics.append(SPLIT_CONVENTION_NOTE)
            engine.select_split(*res.parties, note=f"tie ({tied_names}): split")
        elif res.via == SKIP:
            engine.select(
                res.parties[0],
                note=f"tie ({tied_names}): skipped, {parties[res.parties[0]]} next in line",
            )
        else:
            engine.select(
                res.parties[0],
                note=f"tie ({tied_names}): authority chose {parties[res.parties[0]]}",
            )


def assign_greedy(election: Election, tie_policy: TiePolicy | None = None) -> Assignment:
    """Repeatedly give the most-approved remaining party all its ballots.

    Each round tallies the unassigned ballots, selects the party with the
    largest remaining tally (ties per tie_policy, default: authority in
    party-list order), and hands it every remaining ballot approving it.
    """
    policy = tie_policy or default_tie_policy(election)
    engine = AssignmentEngine(election)
    _run_greedy(engine, policy)
    return engine.result()


def assign_by_order(election: Election, party_order: Sequence[PartyId]) -> Assignment:
    """Assign ballots by a fixed party ordering, no tallies consulted."""
    order = tuple(party_order)
    if sorted(order) != list(range(election.num_parties)):
        raise AssignmentError("party_order is not a permutation of all parties")
    engine = AssignmentEngine(election)
    for p in order:
        if engine.finished:
            break
        engine.select(p)
    return engine.result()


def assign_prefix_then_greedy(
    election: Election,
    prefix: Sequence[PartyId],
    tie_policy: TiePolicy | None = None,
) -> Assignment:
    """Force an initial selection order, then finish greedily.

    With an empty prefix this is plain assign_greedy; with a full
    permutation it matches assign_by_order.
    """
    prefix = tuple(prefix)
    if len(set(prefix)) != len(prefix):
        raise AssignmentError("order prefix contains duplicates")
    if not all(0 <= p < election.num_parties for p in prefix):
        raise AssignmentError("order prefix names an unknown party")
    policy = tie_policy or default_tie_policy(election)
    engine = AssignmentEngine(election)
    for p in prefix:
        if engine.finished:
            break
        engine.select(p, note="forced by declared order")
    _run_greedy(engine, policy)
    return engine.result()


def assign_with_cap(
    election: Election,
    cap: CapConfig,
    tie_policy: TiePolicy | None = None,
) -> Assignment:
    """Greedy assignment with a ceiling on any one party's share.

    A selected party first takes the ballots that can go nowhere else,
    then a seeded uniformly random subset of its remaining ballots up to
    floor(threshold * voters).  Declined ballots stay in the pool with
    that party struck from their approval set.  A party whose
    sole-approval ballots alone exceed the cap keeps them, and the breach
    is reported in diagnostics.
    """
    policy = tie_policy or default_tie_policy(election)
    cap_count = int(cap.threshold * election.total_voters)
    rng = np.random.default_rng(cap.rng_seed)
    engine = AssignmentEngine(election, cap_count=cap_count, rng=rng)
    _run_greedy(engine, policy)
    result = engine.result()
    return Assignment(
        assigned=result.assigned,
        order=result.order,
        rounds=result.rounds,
        per_type=result.per_type,
        diagnostics=result.diagnostics,
        seed=cap.rng_seed,
    )


def assign_two_house(
    commons: Election,
    senate: Election,
    tie_policy: TiePolicy | None = None,
) -> tuple[tuple[PartyId, ...], Assignment, Assignment]:
    """Assign two houses in one shared party order.

    Each round scores every unselected party by the minimum of its
    remaining tallies in the two houses; the top scorer absorbs its
    remaining ballots in both.  Ties on the minimum score follow the same
    tie policy as single-house greedy.
    """
    if commons.parties != senate.parties:
        raise AssignmentError("the two houses list different parties")
    policy = tie_policy or default_tie_policy(commons)
    eng_c = AssignmentEngine(commons)
    eng_s = AssignmentEngine(senate)
    parties = commons.parties
    while not (eng_c.finished and eng_s.finished):
        unselected = [i for i in range(len(parties)) if i not in eng_c.selected]
        scores = [min(eng_c.tally[i], eng_s.tally[i]) for i in range(len(parties))]
        best = max(scores[i] for i in unselected)
        tied = [i for i in unselected if scores[i] == best]
        if len(tied) == 1:
            for eng in (eng_c, eng_s):
                eng.select(tied[0], note=f"two-house score {best}")
            continue
        res = resolve_tie(scores, tied, policy)
        tied_names = ", ".join(parties[p] for p in tied)
        if res.kind == "split":
            for eng in (eng_c, eng_s):
                eng.select_split(
                    *res.parties, note=f"two-house tie ({tied_names}): split"
                )
        else:
            for eng in (eng_c, eng_s):
                eng.select(
                    res.parties[0],
                    note=f"two-house tie ({tied_names}): {res.via}",
                )
    return tuple(eng_c.order), eng_c.result(), eng_s.result()


def candidate_tallies(election: Election, assignment: Assignment) -> list[dict[str, int]]:
    """Count candidate-name preferences, one dict per party.

    A ballot's named candidate for a party counts only on the portion of
    its type actually assigned to that party; split types contribute
    proportionally to the split.
    """
    if len(assignment.per_type) != len(election.ballot_types):
        raise AssignmentError("assignment does not match this election")
    out: list[dict[str, int]] = [{} for _ in election.parties]
    for bt, portions in zip(election.ballot_types, assignment.per_type):
        for party, name in bt.preferences.items():
            got = portions.get(party, 0)
            if got:
                out[party][name] = out[party].get(name, 0) + got
    return out


def full_order(assignment: Assignment, num_parties: int) -> tuple[PartyId, ...]:
    """Extend a selection order to a full permutation (leftovers by list order)."""
    rest = [i for i in range(num_parties) if i not in set(assignment.order)]
    return tuple(assignment.order) + tuple(rest)


def check_representative(election: Election, assignment: Assignment) -> None:
    """Assert the defining invariants of a representative assignment.

    Raises AssignmentError if any ballot portion sits outside its approval
    set, any type over- or under-assigns its count, the total mismatches
    the voter count, or any party falls outside the
    [sole-approvals, total-approvals] band.
    """
    total = 0
    for bt, portions in zip(election.ballot_types, assignment.per_type):
        if sum(portions.values()) != bt.count:
            raise AssignmentError(
                f"type {sorted(bt.approvals)} assigned {sum(portions.values())} of {bt.count}"
            )
        for party, got in portions.items():
            if got < 0 or (got > 0 and party not in bt.approvals):
                raise AssignmentError(
                    f"{got} ballots of type {sorted(bt.approvals)} assigned to "
                    f"non-approved party {election.parties[party]}"
                )
        total += bt.count
    if total != election.total_voters or sum(assignment.assigned) != total:
        raise AssignmentError("assigned ballots do not sum to the voter total")
    for i in range(election.num_parties):
        lo = only_voted_count(election, i)
        hi = sum(bt.count for bt in election.ballot_types if i in bt.approvals)
        if not lo <= assignment.assigned[i] <= hi:
            raise AssignmentError(
                f"party {election.parties[i]} assigned {assignment.assigned[i]}, "
                f"outside [{lo}, {hi}]"
            )
