"""Shared fixtures and instance generators for the test suite."""

from __future__ import annotations

from itertools import chain, combinations

import numpy as np
import pytest
from hypothesis import strategies as st

from majrep import BallotType, Election, validate_election


def toy_election() -> Election:
    """Two voters, three parties: ballots {a,b} and {b,c}."""
    return validate_election(("a", "b", "c"), [{0, 1}, {1, 2}])


def tie_election() -> Election:
    """Two parties tied at 26 with 14 shared ballots, a third at 7.

    X: 10 alone + 2 with W + 14 with Y = 26; Y: 12 alone + 14 with X = 26;
    ballots naming X or Y: 12 + 12 + 14 = 38.
    """
    return validate_election(
        ("X", "Y", "W"),
        [
            BallotType(frozenset({0}), 10),
            BallotType(frozenset({0, 2}), 2),
            BallotType(frozenset({1}), 12),
            BallotType(frozenset({0, 1}), 14),
            BallotType(frozenset({2}), 5),
        ],
    )


@pytest.fixture
def toy():
    return toy_election()


@pytest.fixture
def tie_fixture():
    return tie_election()


def nonempty_subsets(p: int) -> list[frozenset[int]]:
    items = range(p)
    return [
        frozenset(c)
        for c in chain.from_iterable(combinations(items, r) for r in range(1, p + 1))
    ]


@st.composite
def elections(draw, max_parties: int = 5, max_count: int = 8):
    """Random small elections: distinct approval sets, small counts."""
    p = draw(st.integers(1, max_parties))
    parties = tuple(f"P{i}" for i in range(p))
    pool = nonempty_subsets(p)
    n_sets = draw(st.integers(1, min(len(pool), 6)))
    sets = draw(st.permutations(pool))[:n_sets]
    types = [
        BallotType(s, draw(st.integers(0, max_count))) for s in sets
    ]
    return validate_election(parties, types)


def random_election(
    rng: np.random.Generator,
    max_parties: int = 10,
    max_voters: int = 500,
    min_parties: int = 1,
) -> Election:
    """Seeded random election for bulk invariant sweeps."""
    p = int(rng.integers(min_parties, max_parties + 1))
    parties = tuple(f"P{i}" for i in range(p))
    n_types = int(rng.integers(1, min(2**p - 1, 12) + 1))
    voters = int(rng.integers(1, max_voters + 1))
    types: list[BallotType] = []
    sizes = rng.multinomial(voters, np.ones(n_types) / n_types)
    for count in sizes:
        size = int(rng.integers(1, p + 1))
        approvals = frozenset(
            int(x) for x in rng.choice(p, size=size, replace=False)
        )
        types.append(BallotType(approvals, int(count)))
    # validate_election merges duplicate approval sets
    return validate_election(parties, types)
