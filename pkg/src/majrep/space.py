"""The space of parliaments attainable by legal ballot assignments.

For a fixed vote outcome, the attainable parliaments form a convex body
whose vertices come from fixed party orderings.  This module enumerates
those vertices, decides whether an arbitrary target parliament is
attainable (subset condition for few parties, max-flow with an explicit
per-type certificate in general), provides a brute-force oracle for small
instances, and audits the convexity claim empirically.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from itertools import combinations_with_replacement, permutations, product

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from .assign import assign_by_order, assign_greedy, full_order
from .core import Election, PartyId

HALL_PARTY_LIMIT = 20  # subset enumeration above this switches to max-flow
BRUTE_FORCE_LIMIT = 10**7


class SpaceError(ValueError):
    """Raised for malformed targets or malformed ordering weights."""


class TooLargeError(SpaceError):
    """Raised when an exhaustive sweep would exceed its size guard."""


@dataclass(frozen=True)
class AchievableSet:
    """Deduplicated vertex parliaments, optionally with the full point set."""

    election: Election
    vertices: frozenset[tuple[int, ...]]
    exhaustive: bool
    orderings_tried: int
    exhaustive_points: frozenset[tuple[int, ...]] | None = None

    def __post_init__(self):
        if self.exhaustive_points is not None and not self.vertices <= self.exhaustive_points:
            raise SpaceError("vertices outside the exhaustive point set")


@dataclass(frozen=True)
class FeasibilityResult:
    """Yes/no answer with evidence: a per-type split, or a violated subset.

    When feasible, per_type[j] maps party id -> ballots of type j to give
    it (entries sum to the type's count).  When infeasible,
    violated_subset T satisfies: ballots confined to T exceed the seats T
    was offered.
    """

    feasible: bool
    per_type: tuple[dict[PartyId, int], ...] | None = None
    violated_subset: tuple[PartyId, ...] | None = None

    def __bool__(self) -> bool:
        return self.feasible


@dataclass(frozen=True)
class ConvexityReport:
    """Outcome of the empirical convexity audit on one small instance."""

    ok: bool
    num_vertices: int
    num_achievable: int
    num_hull_points: int
    segment_checks: int
    counterexample: tuple[int, ...] | None = None


def _validate_target(election: Election, target: Sequence[int]) -> tuple[int, ...]:
    target = tuple(int(t) for t in target)
    if len(target) != election.num_parties:
        raise SpaceError(
            f"target has {len(target)} entries for {election.num_parties} parties"
        )
    if any(t < 0 for t in target):
        raise SpaceError("target contains a negative count")
    if sum(target) != election.total_voters:
        raise SpaceError(
            f"target sums to {sum(target)}, election has {election.total_voters} voters"
        )
    return target


def _type_mask(approvals: Iterable[PartyId]) -> int:
    mask = 0
    for i in approvals:
        mask |= 1 << i
    return mask


def _hall_violation(election: Election, target: Sequence[int]) -> tuple[PartyId, ...] | None:
    """Find a party subset T whose captive ballots exceed T's target sum.

    Captive ballots of T are those whose whole approval set lies inside T;
    the target is attainable iff no such T exists.  Subset sums for all
    2^p sets come from one zeta transform each over counts and targets.
    """
    p = election.num_parties
    size = 1 << p
    captive = np.zeros(size, dtype=np.int64)
    for bt in election.ballot_types:
        captive[_type_mask(bt.approvals)] += bt.count
    offered = np.zeros(size, dtype=np.int64)
    for i in range(p):
        offered[1 << i] = target[i]
    idx = np.arange(size)
    for b in range(p):
        bit = 1 << b
        sel = idx[(idx & bit) != 0]
        captive[sel] += captive[sel ^ bit]
        offered[sel] += offered[sel ^ bit]
    excess = captive - offered
    bad = np.nonzero(excess > 0)[0]
    if bad.size == 0:
        return None
    worst = int(bad[np.argmax(excess[bad])])
    return tuple(i for i in range(p) if worst >> i & 1)


def _build_flow_graph(election: Election, target: Sequence[int]):
    """Source -> ballot types -> approved parties -> sink, integer capacities."""
    n = len(election.ballot_types)
    p = election.num_parties
    size = 2 + n + p
    src, sink = 0, size - 1
    rows, cols, caps = [], [], []
    for j, bt in enumerate(election.ballot_types):
        rows.append(src)
        cols.append(1 + j)
        caps.append(bt.count)
        for i in bt.approvals:
            rows.append(1 + j)
            cols.append(1 + n + i)
            caps.append(bt.count)
    for i in range(p):
        rows.append(1 + n + i)
        cols.append(sink)
        caps.append(int(target[i]))
    graph = csr_matrix((caps, (rows, cols)), shape=(size, size), dtype=np.int32)
    return graph, src, sink


def _residual_party_set(
    election: Election, graph: csr_matrix, flow: csr_matrix, src: int
) -> tuple[PartyId, ...]:
    """Parties reachable from the source in the residual graph.

    With a saturating flow impossible, these parties form a subset whose
    captive ballots exceed their combined target (max-flow/min-cut).
    """
    n = len(election.ballot_types)
    # Residual capacity = capacity - flow; the flow matrix is antisymmetric,
    # so usable reverse arcs show up as positive entries too.
    residual = (graph - flow).tocsr()
    reach = {src}
    stack = [src]
    while stack:
        u = stack.pop()
        row = slice(residual.indptr[u], residual.indptr[u + 1])
        for w, cap in zip(residual.indices[row], residual.data[row]):
            if cap > 0 and int(w) not in reach:
                reach.add(int(w))
                stack.append(int(w))
    return tuple(i for i in range(election.num_parties) if (1 + n + i) in reach)


def is_representative(election: Election, target: Sequence[int]) -> FeasibilityResult:
    """Decide whether ballots can be assigned to hit `target` exactly.

    Each ballot must land on a party it approves and party i must end up
    with exactly target[i] ballots.  For up to 20 parties the subset
    condition is checked directly; the max-flow construction then builds
    the per-type certificate (and decides feasibility outright for larger
    elections).
    """
    target = _validate_target(election, target)
    p = election.num_parties
    if p <= HALL_PARTY_LIMIT:
        violated = _hall_violation(election, target)
        if violated is not None:
            return FeasibilityResult(False, violated_subset=violated)
    graph, src, sink = _build_flow_graph(election, target)
    result = maximum_flow(graph, src, sink)
    if result.flow_value != election.total_voters:
        violated = _residual_party_set(election, graph, result.flow, src)
        return FeasibilityResult(False, violated_subset=violated)
    n = len(election.ballot_types)
    flow = result.flow
    per_type: list[dict[PartyId, int]] = []
    for j, bt in enumerate(election.ballot_types):
        split = {}
        for i in bt.approvals:
            got = int(flow[1 + j, 1 + n + i])
            if got:
                split[i] = got
        if sum(split.values()) != bt.count:
            raise SpaceError("internal error: flow certificate does not cover a type")
        per_type.append(split)
    return FeasibilityResult(True, per_type=tuple(per_type))


def enumerate_vertices(
    election: Election,
    max_parties_exhaustive: int = 8,
    sample_orderings: int = 2000,
    seed: int = 0,
) -> AchievableSet:
    """Collect the parliaments reachable by fixed party orderings.

    Up to max_parties_exhaustive parties every permutation is run;
    beyond that a seeded sample of orderings is used, always including
    the party-list order and the order induced by the greedy procedure,
    and the result is marked non-exhaustive.
    """
    p = election.num_parties
    found: set[tuple[int, ...]] = set()
    if p <= max_parties_exhaustive:
        tried = 0
        for perm in permutations(range(p)):
            found.add(assign_by_order(election, perm).assigned)
            tried += 1
        return AchievableSet(election, frozenset(found), True, tried)
    rng = np.random.default_rng(seed)
    orders = [tuple(range(p)), full_order(assign_greedy(election), p)]
    orders += [tuple(int(x) for x in rng.permutation(p)) for _ in range(sample_orderings)]
    for order in orders:
        found.add(assign_by_order(election, order).assigned)
    return AchievableSet(election, frozenset(found), False, len(orders))


def _compositions(total: int, bins: int):
    """All ways to write `total` as an ordered sum of `bins` counts >= 0."""
    if bins == 1:
        yield (total,)
        return
    for cut in combinations_with_replacement(range(total + 1), bins - 1):
        prev = 0
        parts = []
        for c in cut:
            parts.append(c - prev)
            prev = c
        parts.append(total - prev)
        yield tuple(parts)


def _num_compositions(total: int, bins: int) -> int:
    return math.comb(total + bins - 1, bins - 1)


def brute_force_achievable(election: Election) -> frozenset[tuple[int, ...]]:
    """Every attainable parliament, by sweeping all per-type splits.

    The guard counts the full choice space (product over types of the
    number of splits) and refuses above 10^7; the sweep itself folds
    types one at a time so duplicates collapse early.
    """
    choice_space = 1
    for bt in election.ballot_types:
        choice_space *= _num_compositions(bt.count, len(bt.approvals))
        if choice_space > BRUTE_FORCE_LIMIT:
            raise TooLargeError(
                f"choice space exceeds {BRUTE_FORCE_LIMIT:,} splits"
            )
    p = election.num_parties
    points: set[tuple[int, ...]] = {(0,) * p}
    for bt in election.ballot_types:
        parties = sorted(bt.approvals)
        moves = []
        for comp in _compositions(bt.count, len(parties)):
            move = [0] * p
            for party, c in zip(parties, comp):
                move[party] = c
            moves.append(tuple(move))
        points = {
            tuple(a + b for a, b in zip(pt, mv)) for pt in points for mv in moves
        }
    return frozenset(points)


def enumerate_choice_tuples(
    election: Election, limit: int = 10**6
) -> frozenset[tuple[PartyId, ...]]:
    """Per-voter choice tuples: one approved party per individual ballot.

    Expands ballot types back into voters (in type order), so the result
    is the full Cartesian product of per-voter approval sets.  Only for
    tiny instances.
    """
    space = 1
    per_voter: list[tuple[PartyId, ...]] = []
    for bt in election.ballot_types:
        options = tuple(sorted(bt.approvals))
        for _ in range(bt.count):
            space *= len(options)
            if space > limit:
                raise TooLargeError(f"choice tuple space exceeds {limit:,}")
            per_voter.append(options)
    return frozenset(product(*per_voter))


def _hull_contains(vertices: Sequence[tuple[int, ...]], point: Sequence[int]) -> bool:
    """Is `point` a convex combination of `vertices`? (linear program)"""
    from scipy.optimize import linprog

    verts = np.asarray(vertices, dtype=float).T  # shape (p, m)
    m = verts.shape[1]
    a_eq = np.vstack([verts, np.ones((1, m))])
    b_eq = np.concatenate([np.asarray(point, dtype=float), [1.0]])
    res = linprog(np.zeros(m), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * m, method="highs")
    return bool(res.success)


def _segment_integer_points(a: tuple[int, ...], b: tuple[int, ...]):
    """Integer lattice points strictly between a and b on their segment."""
    diffs = [y - x for x, y in zip(a, b)]
    g = 0
    for d in diffs:
        g = math.gcd(g, abs(d))
    for step in range(1, g):
        yield tuple(x + d * step // g for x, d in zip(a, diffs))


def convexity_audit(
    election: Election, seed: int = 0, segment_pairs: int = 50
) -> ConvexityReport:
    """Check, exhaustively, that the attainable set is convex in the
    integer sense: the integer points of the vertex hull are exactly the
    attainable parliaments, and segments between attainable points stay
    attainable.  Intended for small instances only.
    """
    achievable = brute_force_achievable(election)
    vertices = sorted(enumerate_vertices(election).vertices)
    v = election.total_voters
    p = election.num_parties
    lo = [min(pt[i] for pt in achievable) for i in range(p)]
    hi = [max(pt[i] for pt in achievable) for i in range(p)]

    hull_points: set[tuple[int, ...]] = set()
    for cand in product(*(range(l, h + 1) for l, h in zip(lo, hi))):
        if sum(cand) != v:
            continue
        if _hull_contains(vertices, cand):
            hull_points.add(cand)

    for pt in sorted(hull_points ^ achievable):
        # Any asymmetric difference breaks the claim; report the first.
        return ConvexityReport(
            False, len(vertices), len(achievable), len(hull_points), 0, pt
        )

    rng = np.random.default_rng(seed)
    pts = sorted(achievable)
    checks = 0
    for _ in range(segment_pairs):
        if len(pts) < 2:
            break
        ia, ib = rng.integers(0, len(pts), size=2)
        for mid in _segment_integer_points(pts[int(ia)], pts[int(ib)]):
            checks += 1
            if mid not in achievable:
                return ConvexityReport(
                    False, len(vertices), len(achievable), len(hull_points), checks, mid
                )
    return ConvexityReport(True, len(vertices), len(achievable), len(hull_points), checks)


def sample_interior(
    election: Election,
    weighted_orderings: Sequence[tuple[Sequence[PartyId], float]],
) -> tuple[float, ...]:
    """Convex combination of ordering vertices: a fractional parliament.

    Weights must be non-negative and sum to 1.  The result is reported
    as-is; realizing a nearby integer parliament goes through
    is_representative, not rounding.
    """
    if not weighted_orderings:
        raise SpaceError("no orderings given")
    weights = [w for _, w in weighted_orderings]
    if any(w < 0 for w in weights):
        raise SpaceError("negative ordering weight")
    if abs(sum(weights) - 1.0) > 1e-9:
        raise SpaceError(f"ordering weights sum to {sum(weights)}, expected 1")
    mix = np.zeros(election.num_parties)
    for order, w in weighted_orderings:
        mix += w * np.asarray(assign_by_order(election, order).assigned)
    return tuple(float(x) for x in mix)
