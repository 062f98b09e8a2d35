"""Attainable-parliament space: feasibility, vertices, brute force, audit."""

import math

import pytest
from hypothesis import assume, given, settings

from conftest import elections, toy_election
from majrep import (
    brute_force_achievable,
    convexity_audit,
    enumerate_choice_tuples,
    enumerate_vertices,
    is_representative,
    sample_interior,
    validate_election,
)
from majrep.space import AchievableSet, SpaceError, TooLargeError

TOY_POINTS = {(0, 1, 1), (0, 2, 0), (1, 0, 1), (1, 1, 0)}


def captive_excess(election, target, subset):
    """Ballots confined to `subset` minus the seats `subset` was offered."""
    s = set(subset)
    captive = sum(bt.count for bt in election.ballot_types if set(bt.approvals) <= s)
    return captive - sum(target[i] for i in s)


class TestFeasibility:
    def test_toy_feasible_target(self, toy):
        res = is_representative(toy, (1, 1, 0))
        assert res
        assert res.feasible
        for bt, split in zip(toy.ballot_types, res.per_type):
            assert sum(split.values()) == bt.count
            assert set(split) <= set(bt.approvals)

    def test_toy_infeasible_target(self, toy):
        res = is_representative(toy, (2, 0, 0))
        assert not res
        assert res.violated_subset == (1, 2)
        assert captive_excess(toy, (2, 0, 0), res.violated_subset) > 0

    def test_target_length_checked(self, toy):
        with pytest.raises(SpaceError):
            is_representative(toy, (1, 1))

    def test_target_sum_checked(self, toy):
        with pytest.raises(SpaceError):
            is_representative(toy, (1, 1, 1))

    def test_negative_target_rejected(self, toy):
        with pytest.raises(SpaceError):
            is_representative(toy, (3, -1, 0))

    def test_flow_path_beyond_subset_limit(self):
        # 21 parties forces the max-flow route (no subset sweep)
        p = 21
        election = validate_election(
            tuple(f"t{i}" for i in range(p)), [{i} for i in range(p)]
        )
        assert is_representative(election, (1,) * p)
        bad = [1] * p
        bad[0], bad[1] = 2, 0
        res = is_representative(election, bad)
        assert not res
        assert 1 in res.violated_subset
        assert captive_excess(election, bad, res.violated_subset) > 0


class TestVertices:
    def test_toy_vertices(self, toy):
        out = enumerate_vertices(toy)
        assert out.exhaustive
        assert out.orderings_tried == 6
        assert set(out.vertices) == TOY_POINTS

    def test_sampled_mode_for_many_parties(self):
        p = 9
        election = validate_election(
            tuple(f"t{i}" for i in range(p)),
            [{i, (i + 1) % p} for i in range(p)],
        )
        out = enumerate_vertices(election, sample_orderings=10, seed=3)
        assert not out.exhaustive
        assert out.orderings_tried == 12  # list order + greedy order + 10 samples
        for vertex in out.vertices:
            assert is_representative(election, vertex)

    def test_vertex_set_must_lie_in_point_set(self, toy):
        with pytest.raises(SpaceError):
            AchievableSet(
                toy, frozenset({(2, 0, 0)}), True, 6, frozenset(TOY_POINTS)
            )


class TestBruteForce:
    def test_toy_point_set(self, toy):
        assert brute_force_achievable(toy) == TOY_POINTS

    def test_matches_vertices_on_toy(self, toy):
        assert brute_force_achievable(toy) == enumerate_vertices(toy).vertices

    def test_single_party(self):
        election = validate_election(("only",), [{0}, {0}, {0}])
        assert brute_force_achievable(election) == {(3,)}

    def test_size_guard(self):
        from majrep import BallotType

        big = validate_election(
            ("a", "b", "c"), [BallotType(frozenset({0, 1, 2}), 10_000)]
        )
        with pytest.raises(TooLargeError):
            brute_force_achievable(big)


class TestChoiceTuples:
    def test_toy_choice_tuples(self, toy):
        assert enumerate_choice_tuples(toy) == {(0, 1), (0, 2), (1, 1), (1, 2)}

    def test_size_guard(self):
        from majrep import BallotType

        election = validate_election(
            ("a", "b"), [BallotType(frozenset({0, 1}), 30)]
        )
        with pytest.raises(TooLargeError):
            enumerate_choice_tuples(election)


class TestConvexityAudit:
    def test_toy_audit(self, toy):
        report = convexity_audit(toy)
        assert report.ok
        assert report.num_vertices == 4
        assert report.num_achievable == 4
        assert report.num_hull_points == 4
        assert report.counterexample is None

    def test_segment_instance(self):
        from majrep import BallotType

        election = validate_election(
            ("a", "b"), [BallotType(frozenset({0, 1}), 4)]
        )
        report = convexity_audit(election, segment_pairs=30)
        assert report.ok
        assert report.num_vertices == 2
        assert report.num_achievable == 5  # the whole segment (0,4)..(4,0)
        assert report.num_hull_points == 5
        assert report.segment_checks > 0


class TestSampleInterior:
    def test_mix_of_two_orders(self, toy):
        mix = sample_interior(toy, [((0, 1, 2), 0.5), ((2, 1, 0), 0.5)])
        assert mix == (0.5, 1.0, 0.5)

    def test_weights_must_sum_to_one(self, toy):
        with pytest.raises(SpaceError):
            sample_interior(toy, [((0, 1, 2), 0.6), ((2, 1, 0), 0.6)])

    def test_negative_weight_rejected(self, toy):
        with pytest.raises(SpaceError):
            sample_interior(toy, [((0, 1, 2), 1.5), ((2, 1, 0), -0.5)])

    def test_empty_rejected(self, toy):
        with pytest.raises(SpaceError):
            sample_interior(toy, [])


def choice_space(election) -> int:
    out = 1
    for bt in election.ballot_types:
        out *= math.comb(bt.count + len(bt.approvals) - 1, len(bt.approvals) - 1)
    return out


class TestDualRoute:
    """Brute-force sweep and flow decision must agree point by point."""

    @given(elections(max_parties=3, max_count=5))
    @settings(max_examples=60, deadline=None)
    def test_vertices_lie_in_brute_set(self, election):
        assume(choice_space(election) <= 10**4)
        brute = brute_force_achievable(election)
        assert enumerate_vertices(election).vertices <= brute

    @given(elections(max_parties=3, max_count=5))
    @settings(max_examples=40, deadline=None)
    def test_flow_agrees_with_brute_force(self, election):
        assume(0 < choice_space(election) <= 10**4)
        assume(election.total_voters > 0)
        brute = brute_force_achievable(election)
        for pt in sorted(brute)[:20]:
            assert is_representative(election, pt)
            # nudge one ballot between parties and re-check both routes
            for i in range(election.num_parties):
                if pt[i] == 0:
                    continue
                for j in range(election.num_parties):
                    if i == j:
                        continue
                    moved = list(pt)
                    moved[i] -= 1
                    moved[j] += 1
                    res = is_representative(election, moved)
                    assert bool(res) == (tuple(moved) in brute)
                    if not res:
                        assert captive_excess(election, moved, res.violated_subset) > 0
