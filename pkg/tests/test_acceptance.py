"""Acceptance gate: one criterion per test, one printed pass/fail line each.

The pass/fail lines go through pytest's terminal reporter, so they stay
visible under output capture and land in piped logs.  Every criterion
asserts both its substance and its stated runtime budget.
"""

import io
import json
import time
from contextlib import contextmanager
from functools import lru_cache
from itertools import product

import numpy as np
import pytest

from conftest import random_election, tie_election
from majrep import (
    BallotType,
    ExperimentConfig,
    RankedBallot,
    SingleVoteBallot,
    TiePolicy,
    assign_by_order,
    assign_greedy,
    assign_two_house,
    assign_with_cap,
    brute_force_achievable,
    check_representative,
    enumerate_choice_tuples,
    enumerate_vertices,
    is_representative,
    italicum,
    run_experiment,
    tally_remaining,
    validate_election,
)
from majrep.assign import AssignmentError, CapConfig
from majrep.cli_io import main, parse_ballot_file
from majrep.space import convexity_audit


_REPORTER = None


@pytest.fixture(autouse=True)
def _grab_reporter(request):
    global _REPORTER
    _REPORTER = request.config.pluginmanager.get_plugin("terminalreporter")
    yield


def _emit(line: str) -> None:
    if _REPORTER is not None:
        _REPORTER.ensure_newline()
        _REPORTER.write_line(line)
    else:
        print(line)


@contextmanager
def criterion(name: str):
    """Print exactly one [PASS]/[FAIL] line for the enclosed criterion."""
    info = {"detail": ""}
    try:
        yield info
    except BaseException as exc:
        _emit(f"[FAIL] {name}: {info['detail'] or f'{type(exc).__name__}: {exc}'}")
        raise
    _emit(f"[PASS] {name}: {info['detail']}")


def all_targets(p: int, v: int):
    """Every non-negative integer tuple of length p summing to v."""
    if p == 1:
        yield (v,)
        return
    for head in range(v + 1):
        for rest in all_targets(p - 1, v - head):
            yield (head, *rest)


@lru_cache(maxsize=1)
def oracle_instances():
    """200 seeded small instances plus every 2-party election of <= 4 voters."""
    rng = np.random.default_rng(20260814)
    seeded = [random_election(rng, max_parties=3, max_voters=6) for _ in range(200)]
    exhaustive = []
    for c_a, c_b, c_ab in product(range(5), repeat=3):
        if c_a + c_b + c_ab > 4:
            continue
        types = [
            BallotType(approvals, count)
            for approvals, count in (
                (frozenset({0}), c_a),
                (frozenset({1}), c_b),
                (frozenset({0, 1}), c_ab),
            )
            if count
        ]
        exhaustive.append(validate_election(("A", "B"), types))
    return seeded + exhaustive


def test_a1_worked_example():
    with criterion("A1 worked example") as c:
        t0 = time.perf_counter()
        bf = parse_ballot_file(
            io.StringIO(
                '{"parties": ["a", "b", "c"], "ballot_types": ['
                '{"approvals": ["a", "b"]}, {"approvals": ["b", "c"]}]}'
            ),
            fmt="json",
        )
        achievable = brute_force_achievable(bf.election)
        assert achievable == {(1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1)}
        choices = enumerate_choice_tuples(bf.election)
        assert len(choices) == 4
        assert choices == {(0, 1), (0, 2), (1, 1), (1, 2)}
        elapsed = time.perf_counter() - t0
        assert elapsed < 1.0
        c["detail"] = (
            f"4 achievable parliaments, 4 per-voter choice tuples, "
            f"{elapsed:.3f}s (<1s)"
        )


def test_a2_oracle_equivalence():
    with criterion("A2 oracle equivalence") as c:
        t0 = time.perf_counter()
        instances = oracle_instances()
        targets = agreements = 0
        for election in instances:
            achievable = brute_force_achievable(election)
            for target in all_targets(election.num_parties, election.total_voters):
                targets += 1
                flow_says = bool(is_representative(election, target))
                if flow_says == (target in achievable):
                    agreements += 1
        elapsed = time.perf_counter() - t0
        assert agreements == targets
        assert elapsed < 60.0
        c["detail"] = (
            f"{len(instances)} instances, {targets} targets, "
            f"{agreements}/{targets} agree (100%), {elapsed:.1f}s (<60s)"
        )


def test_a3_convexity_audit():
    with criterion("A3 convexity audit") as c:
        t0 = time.perf_counter()
        instances = oracle_instances()
        failures = 0
        for election in instances:
            report = convexity_audit(election)
            if not report.ok or report.num_hull_points != report.num_achievable:
                failures += 1
        elapsed = time.perf_counter() - t0
        assert failures == 0
        assert elapsed < 120.0
        c["detail"] = (
            f"{len(instances)} instances, hull integer points == brute-force set "
            f"on all, {elapsed:.1f}s (<120s)"
        )


def test_a4_representativity_and_range():
    with criterion("A4 representativity and range") as c:
        t0 = time.perf_counter()
        rng = np.random.default_rng(97)
        violations = 0
        checked = 0
        for _ in range(1000):
            election = random_election(rng, max_parties=10, max_voters=500)
            p = election.num_parties
            senate = random_election(rng, max_parties=p, max_voters=500, min_parties=p)
            order = [int(x) for x in rng.permutation(p)]
            cap = CapConfig(threshold=0.55, rng_seed=int(rng.integers(2**31)))
            runs = [
                (election, assign_greedy(election)),
                (election, assign_by_order(election, order)),
                (election, assign_with_cap(election, cap)),
            ]
            _, commons, senate_a = assign_two_house(election, senate)
            runs += [(election, commons), (senate, senate_a)]
            for e, assignment in runs:
                checked += 1
                try:
                    check_representative(e, assignment)
                except AssignmentError:
                    violations += 1
        elapsed = time.perf_counter() - t0
        assert violations == 0
        assert elapsed < 60.0
        c["detail"] = (
            f"1000 instances, {checked} assignments "
            f"(greedy/order/cap/two-house), 0 violations, {elapsed:.1f}s (<60s)"
        )


def test_a5_clone_starvation():
    with criterion("A5 clone starvation") as c:
        rng = np.random.default_rng(5150)
        violations = 0
        for _ in range(100):
            election = random_election(rng, max_parties=6, max_voters=200)
            tally = tally_remaining(election, ())
            winner = min(
                range(election.num_parties), key=lambda i: (-tally[i], i)
            )
            clone = election.num_parties
            cloned = validate_election(
                (*election.parties, "clone"),
                [
                    BallotType(
                        bt.approvals | {clone} if winner in bt.approvals else bt.approvals,
                        bt.count,
                        bt.preferences,
                    )
                    for bt in election.ballot_types
                ],
            )
            assigned = assign_greedy(cloned).assigned
            zeros = (assigned[winner] == 0) + (assigned[clone] == 0)
            if zeros != 1:
                violations += 1
        assert violations == 0
        c["detail"] = "100 instances, exactly one of each clone pair starved to 0"


def test_a6_simulation_reproduction():
    with criterion("A6 simulation reproduction") as c:
        t0 = time.perf_counter()
        headline = run_experiment(
            ExperimentConfig(n_parties=20, n_voters=5000, n_runs=100, k=1.424)
        )
        first = headline.mean_shares[0]
        assert 0.464 <= first <= 0.534
        assert headline.r_squared >= 0.9
        exponents = []
        for voters in (2500, 5000, 10000):
            for parties in (10, 20, 30):
                if (parties, voters) == (20, 5000):
                    exponents.append(headline.exponent)
                    continue
                report = run_experiment(
                    ExperimentConfig(
                        n_parties=parties, n_voters=voters, n_runs=100, k=1.424
                    )
                )
                exponents.append(report.exponent)
        spread = (max(exponents) - min(exponents)) / (sum(exponents) / len(exponents))
        elapsed = time.perf_counter() - t0
        assert spread < 0.15
        assert elapsed <= 300.0
        c["detail"] = (
            f"mean first share {first:.4f} in [0.464, 0.534], "
            f"R^2 {headline.r_squared:.3f} >= 0.9, exponent spread "
            f"{spread:.1%} < 15% over 9 configs, {elapsed:.0f}s (<=300s)"
        )


def test_a7_tie_strategies():
    with criterion("A7 tie strategies") as c:
        t0 = time.perf_counter()
        election = tie_election()
        split = assign_greedy(election, TiePolicy.split())
        assert split.assigned == (19, 19, 5)
        assert split.rounds[0].absorbed == (19, 19)
        authority = assign_greedy(election, TiePolicy.authority((0, 1, 2)))
        assert authority.assigned == (26, 12, 5)
        skip = assign_greedy(election, TiePolicy.skip())
        assert skip.assigned == (10, 26, 7)
        assert authority.assigned != skip.assigned
        for assignment in (split, authority, skip):
            assert is_representative(election, assignment.assigned)
        elapsed = time.perf_counter() - t0
        assert elapsed < 1.0
        c["detail"] = (
            "split 19/19/5, authority 26/12/5, skip 10/26/7, "
            f"all representative, {elapsed:.3f}s (<1s)"
        )


def test_a8_italicum():
    with criterion("A8 Italicum bonus rule") as c:
        def singles(counts):
            out = []
            for party, n in enumerate(counts):
                out.extend(SingleVoteBallot(party) for _ in range(n))
            return out

        # fixture 1: 45% > 40% trigger, house 100 -> exactly round(0.54*100)
        seats, report = italicum(singles((45, 30, 25)), [], 3, 100)
        assert report.triggered
        assert seats[report.winner] == 54 == int(0.54 * 100 + 0.5)

        # fixture 2: same trigger, house 25 -> exactly round(0.54*25) = 14
        seats, report = italicum(singles((45, 30, 25)), [], 3, 25)
        assert report.triggered
        assert seats[report.winner] == 14 == int(0.54 * 25 + 0.5)

        # fixture 3: 35% < 40%, runoff between top two decided by rankings
        rankings = [RankedBallot((1, 0, 2, 3))] * 60 + [RankedBallot((0, 1, 2, 3))] * 40
        seats, report = italicum(singles((35, 30, 20, 15)), rankings, 4, 100)
        assert not report.triggered
        assert report.runoff is not None
        assert report.winner == 1
        assert seats[1] == 54 == int(0.54 * 100 + 0.5)

        c["detail"] = (
            "trigger fixtures give the winner round(0.54*house) seats exactly "
            "(54/100, 14/25), runoff fixture crowns the rankings' choice"
        )


def test_a9_cli_determinism(tmp_path):
    with criterion("A9 CLI determinism") as c:
        ballots = tmp_path / "ballots.json"
        ballots.write_text(json.dumps({
            "parties": ["X", "Y", "Z"],
            "ballot_types": [
                {"approvals": ["X"], "count": 40},
                {"approvals": ["X", "Y"], "count": 35},
                {"approvals": ["X", "Z"], "count": 15},
                {"approvals": ["Z"], "count": 10},
            ],
        }))
        wide = tmp_path / "wide.json"
        wide.write_text(json.dumps({
            "parties": [f"p{i}" for i in range(9)],
            "ballot_types": [
                {"approvals": [f"p{i}", f"p{(i + 1) % 9}"], "count": i + 1}
                for i in range(9)
            ],
        }))
        commands = [
            ["tabulate", str(ballots), "--method", "cap", "--cap", "0.4",
             "--cap-seed", "7", "--format", "json"],
            ["tabulate", str(ballots), "--format", "csv"],
            ["simulate", "--parties", "6", "--voters", "200", "--runs", "3",
             "--seed", "11"],
            ["space", str(wide), "--enumerate", "--sample", "50", "--seed", "5"],
            ["compare", str(ballots), "--seats", "30"],
        ]
        compared = 0
        for i, argv in enumerate(commands):
            out_a = tmp_path / f"out_{i}_a"
            out_b = tmp_path / f"out_{i}_b"
            assert main(argv + ["--out", str(out_a)]) in (0, 3)
            assert main(argv + ["--out", str(out_b)]) in (0, 3)
            assert out_a.read_bytes() == out_b.read_bytes()
            compared += 1
        c["detail"] = f"{compared} seeded commands re-run byte-identical"
