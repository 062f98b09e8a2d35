"""Majoritarian representative voting.

Approval-style ballots are assigned, each in full, to exactly one party
the voter approved; a party's seat share then follows from the number of
ballots it was assigned.  The package covers the assignment procedures
(greedy, fixed order, capped, two-house), seat apportionment and electoral
comparators, the combinatorial space of attainable parliaments, a spatial
simulation of the induced party system, file formats, and a small HTTP
service plus command line front end.
"""

from .apportion import (
    ItalicumConfig,
    SeatVector,
    italicum,
    pure_proportional,
    seats_largest_remainder,
)
from .assign import (
    Assignment,
    AssignmentError,
    CapConfig,
    Round,
    TiePolicy,
    TieResolution,
    TieUnresolvedError,
    assign_by_order,
    assign_greedy,
    assign_prefix_then_greedy,
    assign_two_house,
    assign_with_cap,
    candidate_tallies,
    check_representative,
    full_order,
    resolve_tie,
)
from .core import (
    BallotType,
    Election,
    ElectionError,
    RankedBallot,
    SingleVoteBallot,
    Tally,
    only_voted_count,
    tally_remaining,
    total_approvals,
    validate_election,
)
from .sim import (
    ExperimentConfig,
    RankSizeReport,
    Scenario,
    fit_exponential,
    run_experiment,
    sample_ballots,
    vote_probability,
)
from .space import (
    AchievableSet,
    brute_force_achievable,
    convexity_audit,
    enumerate_choice_tuples,
    enumerate_vertices,
    is_representative,
    sample_interior,
)

__all__ = [
    "AchievableSet",
    "Assignment",
    "AssignmentError",
    "BallotType",
    "CapConfig",
    "Election",
    "ElectionError",
    "ExperimentConfig",
    "ItalicumConfig",
    "RankSizeReport",
    "RankedBallot",
    "Round",
    "Scenario",
    "SeatVector",
    "SingleVoteBallot",
    "Tally",
    "TiePolicy",
    "TieResolution",
    "TieUnresolvedError",
    "assign_by_order",
    "assign_greedy",
    "assign_prefix_then_greedy",
    "assign_two_house",
    "assign_with_cap",
    "brute_force_achievable",
    "candidate_tallies",
    "check_representative",
    "convexity_audit",
    "enumerate_choice_tuples",
    "enumerate_vertices",
    "fit_exponential",
    "full_order",
    "is_representative",
    "italicum",
    "only_voted_count",
    "pure_proportional",
    "run_experiment",
    "sample_ballots",
    "sample_interior",
    "seats_largest_remainder",
    "tally_remaining",
    "total_approvals",
    "validate_election",
    "vote_probability",
]

__version__ = "0.1.0"
