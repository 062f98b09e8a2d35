"""Spatial Monte Carlo simulation of the voting system.

Parties and voters get uniform random positions in the unit square; a
voter approves a party at distance d with probability max(0, 1-d)^k.
Each generated election runs through the greedy assignment, party sizes
are sorted into a rank-size curve, and an exponential decay is fitted to
the mean curve across runs.
"""

from __future__ import annotations

import io
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .apportion import seats_largest_remainder
from .assign import assign_greedy
from .core import BallotType, Election

EMPTY_BALLOT_RETRIES = 100
CLAMP_NOTE = "vote probability clamped: p = max(0, 1-d)^k (d may exceed 1 in the square)"
FIT_WINDOW_NOTE = (
    "fit window: ranks with mean share >= 1% of the first-party share; deeper "
    "ranks average under a handful of stray ballots and only measure sampling "
    "resolution, not the decay law"
)


class SimError(ValueError):
    """Raised for invalid simulation configs or degenerate outcomes."""


@dataclass(frozen=True)
class Scenario:
    """Fixed positions for one election draw, plus the ballot RNG seed."""

    party_positions: tuple[tuple[float, float], ...]
    voter_positions: tuple[tuple[float, float], ...]
    k: float
    seed: int

    def __post_init__(self):
        if self.k <= 0:
            raise SimError(f"exponent k must be positive, got {self.k}")
        for pos in (*self.party_positions, *self.voter_positions):
            x, y = pos
            if not (0 <= x <= 1 and 0 <= y <= 1):
                raise SimError(f"position {pos} outside the unit square")


@dataclass(frozen=True)
class ExperimentConfig:
    """A batch of simulated elections sharing one master seed."""

    n_parties: int
    n_voters: int
    n_runs: int
    k: float
    master_seed: int = 0

    def __post_init__(self):
        if min(self.n_parties, self.n_voters, self.n_runs) <= 0 or self.k <= 0:
            raise SimError("n_parties, n_voters, n_runs and k must all be positive")


@dataclass(frozen=True)
class RankSizeReport:
    """Mean and sd of party share by rank (biggest first), with the fit.

    exponent and r_squared are None when fewer than 3 ranks fall inside
    the fit window (tiny party counts).
    """

    config: ExperimentConfig
    mean_shares: tuple[float, ...]
    sd_shares: tuple[float, ...]
    exponent: float | None
    r_squared: float | None
    dropped_voters: int
    seed_scheme: str
    notes: tuple[str, ...] = ()


def vote_probability(d: float, k: float) -> float:
    """Probability of approving a party at distance d: max(0, 1-d)^k."""
    if k <= 0:
        raise SimError(f"exponent k must be positive, got {k}")
    if d < 0:
        raise SimError(f"distance must be non-negative, got {d}")
    return max(0.0, 1.0 - d) ** k


def random_scenario(n_parties: int, n_voters: int, k: float, seed: int, ballot_seed: int | None = None) -> Scenario:
    """Uniform party and voter positions in the unit square."""
    rng = np.random.default_rng(seed)
    parties = rng.random((n_parties, 2))
    voters = rng.random((n_voters, 2))
    return Scenario(
        party_positions=tuple(map(tuple, parties.tolist())),
        voter_positions=tuple(map(tuple, voters.tolist())),
        k=k,
        seed=seed if ballot_seed is None else ballot_seed,
    )


def _group_ballots(approvals: np.ndarray) -> list[tuple[frozenset[int], int]]:
    """Collapse a boolean voter-by-party matrix into (approval set, count)."""
    n_parties = approvals.shape[1]
    if n_parties <= 63:
        weights = (1 << np.arange(n_parties, dtype=np.uint64))
        masks = (approvals.astype(np.uint64) * weights).sum(axis=1)
        values, counts = np.unique(masks, return_counts=True)
        out = []
        for mask, count in zip(values.tolist(), counts.tolist()):
            out.append(
                (frozenset(i for i in range(n_parties) if mask >> i & 1), count)
            )
        return out
    rows, counts = np.unique(approvals, axis=0, return_counts=True)
    return [
        (frozenset(np.nonzero(row)[0].tolist()), int(c))
        for row, c in zip(rows, counts)
    ]


def sample_ballots(scenario: Scenario) -> Election:
    """Draw one election from a scenario, deterministically from its seed.

    Every voter approves each party independently with
    vote_probability(distance, k).  Voters who come up empty are redrawn
    up to 100 times; the stubborn ones are dropped and reported through
    the election's invalid-ballot count.
    """
    rng = np.random.default_rng(scenario.seed)
    parties = np.asarray(scenario.party_positions, dtype=float)
    voters = np.asarray(scenario.voter_positions, dtype=float)
    dists = np.linalg.norm(voters[:, None, :] - parties[None, :, :], axis=2)
    probs = np.clip(1.0 - dists, 0.0, None) ** scenario.k
    approvals = rng.random(probs.shape) < probs
    empty = ~approvals.any(axis=1)
    for _ in range(EMPTY_BALLOT_RETRIES):
        if not empty.any():
            break
        redraw = rng.random((int(empty.sum()), parties.shape[0])) < probs[empty]
        approvals[empty] = redraw
        empty = ~approvals.any(axis=1)
    dropped = int(empty.sum())
    kept = approvals[~empty]
    types = tuple(
        BallotType(approvals=s, count=c) for s, c in _group_ballots(kept)
    ) if kept.size else ()
    return Election(
        parties=tuple(f"P{i + 1}" for i in range(parties.shape[0])),
        ballot_types=types,
        total_voters=int(kept.shape[0]) if kept.size else 0,
        invalid_ballots=dropped,
    )


def fit_exponential(mean_shares: Sequence[float]) -> tuple[float, float]:
    """Least-squares exponential decay over ranks: log(share) vs rank.

    Zero-share tail ranks are excluded.  Returns (slope magnitude, R^2);
    a flat positive curve fits exactly, so R^2 is 1 there by convention.
    """
    shares = np.asarray([s for s in mean_shares if s > 0], dtype=float)
    if shares.size < 3:
        raise SimError(f"need at least 3 positive ranks to fit, got {shares.size}")
    ranks = np.arange(1, shares.size + 1, dtype=float)
    logs = np.log(shares)
    slope, intercept = np.polyfit(ranks, logs, 1)
    fitted = slope * ranks + intercept
    ss_res = float(((logs - fitted) ** 2).sum())
    ss_tot = float(((logs - logs.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return abs(float(slope)), r2


def run_experiment(config: ExperimentConfig, seat_house: int | None = None) -> RankSizeReport:
    """Run the batch and aggregate the rank-size curve.

    Per run r, position and ballot seeds are entries 2r and 2r+1 of
    SeedSequence(master_seed).generate_state(2*n_runs), so a master seed
    pins every draw regardless of execution order.  Party size is the
    assigned-ballot share; pass seat_house to use apportioned seat share
    instead.
    """
    seeds = np.random.SeedSequence(config.master_seed).generate_state(
        2 * config.n_runs, dtype=np.uint64
    )
    shares = np.zeros((config.n_runs, config.n_parties))
    dropped = 0
    for r in range(config.n_runs):
        scenario = random_scenario(
            config.n_parties,
            config.n_voters,
            config.k,
            seed=int(seeds[2 * r]),
            ballot_seed=int(seeds[2 * r + 1]),
        )
        election = sample_ballots(scenario)
        dropped += election.invalid_ballots
        if election.total_voters == 0:
            raise SimError(f"run {r}: every voter was dropped (k too sharp)")
        assignment = assign_greedy(election)
        if seat_house is not None:
            seats = seats_largest_remainder(assignment.assigned, seat_house)
            sizes = np.asarray(seats.seats) / seat_house
        else:
            sizes = np.asarray(assignment.assigned) / election.total_voters
        shares[r] = np.sort(sizes)[::-1]
    mean = shares.mean(axis=0)
    sd = shares.std(axis=0, ddof=1) if config.n_runs > 1 else np.zeros_like(mean)
    # The fitted region is defined relative to the curve, not the sample
    # size: ranks below 1% of the first share exist only because a rare run
    # put a ballot there, and would steepen the slope with the run count.
    window = [s for s in mean.tolist() if s >= mean[0] / 100 and s > 0]
    if len(window) >= 3:
        exponent, r2 = fit_exponential(window)
        fit_note = FIT_WINDOW_NOTE
    else:
        exponent = r2 = None
        fit_note = "fewer than 3 ranks in the fit window; no exponent fitted"
    return RankSizeReport(
        config=config,
        mean_shares=tuple(mean.tolist()),
        sd_shares=tuple(sd.tolist()),
        exponent=exponent,
        r_squared=r2,
        dropped_voters=dropped,
        seed_scheme=(
            "SeedSequence(master_seed).generate_state(2*n_runs); "
            "run r uses entry 2r for positions, 2r+1 for ballots"
        ),
        notes=(CLAMP_NOTE, fit_note),
    )


def rank_size_csv(report: RankSizeReport) -> str:
    """Plot-ready table: rank, mean share, sd of share."""
    out = io.StringIO()
    out.write("rank,mean_share,sd_share\n")
    for i, (m, s) in enumerate(zip(report.mean_shares, report.sd_shares), start=1):
        out.write(f"{i},{m:.6f},{s:.6f}\n")
    return out.getvalue()
