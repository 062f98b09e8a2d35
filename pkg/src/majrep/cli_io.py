"""File formats, reports, HTTP service, and the command line interface.

Ballot files come as per-voter CSV or grouped JSON; both declare the
party list in a header so party identity stays positional.  Assignment
traces render as the familiar per-round remaining-tally table.  The HTTP
service exposes elections, orderings, stepped greedy sessions, the
feasibility check, vertex enumeration, comparators, and the simulator;
the CLI drives the same code paths so outputs match byte for byte.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

from .apportion import (
    ApportionError,
    ItalicumConfig,
    SeatVector,
    italicum,
    pure_proportional,
    seats_largest_remainder,
)
from .assign import (
    AssignmentError,
    Assignment,
    CapConfig,
    TiePolicy,
    TieUnresolvedError,
    AssignmentEngine,
    assign_by_order,
    assign_greedy,
    assign_prefix_then_greedy,
    assign_two_house,
    assign_with_cap,
    candidate_tallies,
    resolve_tie,
)
from .core import (
    BallotType,
    Election,
    ElectionError,
    RankedBallot,
    SingleVoteBallot,
    validate_election,
)
from .sim import ExperimentConfig, SimError, rank_size_csv, run_experiment
from .space import (
    SpaceError,
    TooLargeError,
    enumerate_vertices,
    is_representative,
    convexity_audit,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_TOO_LARGE = 4

CSV_COLUMNS = ("voter_id", "approvals", "single_vote", "ranking", "ratings", "candidates")
_RESERVED = set(";>=,\n\r")


class ParseError(ValueError):
    """Malformed ballot file; the message carries the offending line."""


# ---------------------------------------------------------------------------
# Ballot files


@dataclass(frozen=True)
class BallotFile:
    """A parsed ballot file: the election plus auxiliary ballot views.

    single_votes and rankings feed the comparator systems; ratings are
    ingested and echoed only.  truncated_rankings counts rankings that do
    not cover every party (accepted, flagged).
    """

    parties: tuple[str, ...]
    election: Election
    single_votes: tuple[SingleVoteBallot, ...] = ()
    rankings: tuple[RankedBallot, ...] = ()
    ratings: tuple[dict[str, float], ...] = ()
    truncated_rankings: int = 0

    @classmethod
    def from_election(cls, election: Election) -> BallotFile:
        return cls(parties=election.parties, election=election)


def _check_party_names(parties: Sequence[str]) -> tuple[str, ...]:
    for name in parties:
        if not name or _RESERVED & set(name):
            raise ParseError(
                f"party name {name!r} is empty or contains a reserved character (;>=,)"
            )
    return tuple(parties)


def _party_id(parties: Sequence[str], name: str, where: str) -> int:
    try:
        return parties.index(name)
    except ValueError:
        raise ParseError(f"{where}: unknown party {name!r}") from None


def _parse_csv(text: str) -> BallotFile:
    parties: tuple[str, ...] | None = None
    header_seen = False
    raw_types: list[BallotType] = []
    invalid = 0
    singles: list[SingleVoteBallot] = []
    rankings: list[RankedBallot] = []
    ratings: list[dict[str, float]] = []
    truncated = 0

    for lineno, line in enumerate(text.splitlines(), start=1):
        where = f"line {lineno}"
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if body.lower().startswith("parties:"):
                if parties is not None:
                    raise ParseError(f"{where}: duplicate parties header")
                parties = _check_party_names(
                    [p.strip() for p in body.split(":", 1)[1].split(";") if p.strip()]
                )
            continue
        if not header_seen:
            cols = tuple(c.strip() for c in stripped.split(","))
            if cols != CSV_COLUMNS:
                raise ParseError(
                    f"{where}: expected header {','.join(CSV_COLUMNS)!r}"
                )
            header_seen = True
            continue
        if parties is None:
            raise ParseError(f"{where}: missing '# parties: ...' header line")
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(CSV_COLUMNS):
            raise ParseError(
                f"{where}: expected {len(CSV_COLUMNS)} fields, got {len(cells)}"
            )
        _, approvals_s, single_s, ranking_s, ratings_s, candidates_s = cells

        approvals = frozenset(
            _party_id(parties, n.strip(), where)
            for n in approvals_s.split(";")
            if n.strip()
        )
        preferences = {}
        if candidates_s:
            for pair in candidates_s.split(";"):
                if "=" not in pair:
                    raise ParseError(f"{where}: candidate entry {pair!r} is not party=name")
                pname, cname = (x.strip() for x in pair.split("=", 1))
                pid = _party_id(parties, pname, where)
                if pid not in approvals:
                    raise ParseError(
                        f"{where}: candidate named for non-approved party {pname!r}"
                    )
                if not cname:
                    raise ParseError(f"{where}: empty candidate name for {pname!r}")
                preferences[pid] = cname
        if approvals:
            raw_types.append(BallotType(approvals, 1, preferences))
        else:
            invalid += 1

        if single_s:
            singles.append(SingleVoteBallot(_party_id(parties, single_s, where)))
        if ranking_s:
            names = [n.strip() for n in ranking_s.split(">") if n.strip()]
            ids = tuple(_party_id(parties, n, where) for n in names)
            if len(set(ids)) != len(ids):
                raise ParseError(f"{where}: ranking repeats a party")
            if len(ids) < len(parties):
                truncated += 1
            rankings.append(RankedBallot(ids))
        if ratings_s:
            entry = {}
            for pair in ratings_s.split(";"):
                if "=" not in pair:
                    raise ParseError(f"{where}: rating entry {pair!r} is not party=value")
                pname, val = (x.strip() for x in pair.split("=", 1))
                _party_id(parties, pname, where)
                try:
                    entry[pname] = float(val)
                except ValueError:
                    raise ParseError(f"{where}: rating value {val!r} is not a number") from None
            ratings.append(entry)

    if parties is None:
        raise ParseError("missing '# parties: ...' header line")
    election = validate_election(parties, raw_types)
    election = Election(
        parties=election.parties,
        ballot_types=election.ballot_types,
        total_voters=election.total_voters,
        invalid_ballots=election.invalid_ballots + invalid,
    )
    return BallotFile(
        parties=tuple(parties),
        election=election,
        single_votes=tuple(singles),
        rankings=tuple(rankings),
        ratings=tuple(ratings),
        truncated_rankings=truncated,
    )


def _parse_json_dict(data: dict) -> BallotFile:
    if not isinstance(data, dict):
        raise ParseError("ballot JSON must be an object")
    try:
        parties = _check_party_names([str(p) for p in data["parties"]])
    except KeyError:
        raise ParseError("ballot JSON lacks a 'parties' list") from None
    raw_types: list[BallotType] = []
    for j, bt in enumerate(data.get("ballot_types", [])):
        where = f"ballot_types[{j}]"
        approvals = frozenset(
            _party_id(parties, str(n), where) for n in bt.get("approvals", [])
        )
        count = bt.get("count", 1)
        if not isinstance(count, int) or count < 0:
            raise ParseError(f"{where}: count must be a non-negative integer")
        preferences = {}
        for pname, cname in (bt.get("candidates") or {}).items():
            pid = _party_id(parties, str(pname), where)
            if pid not in approvals:
                raise ParseError(f"{where}: candidate named for non-approved party {pname!r}")
            preferences[pid] = str(cname)
        if not approvals:
            raise ParseError(f"{where}: empty approval set (use 'invalid_ballots')")
        raw_types.append(BallotType(approvals, count, preferences))
    singles = tuple(
        SingleVoteBallot(_party_id(parties, str(n), "single_votes"))
        for n in data.get("single_votes", [])
    )
    truncated = 0
    rankings = []
    for r, names in enumerate(data.get("rankings", [])):
        ids = tuple(_party_id(parties, str(n), f"rankings[{r}]") for n in names)
        if len(set(ids)) != len(ids):
            raise ParseError(f"rankings[{r}]: ranking repeats a party")
        if len(ids) < len(parties):
            truncated += 1
        rankings.append(RankedBallot(ids))
    ratings = []
    for r, entry in enumerate(data.get("ratings", [])):
        out = {}
        for pname, val in entry.items():
            _party_id(parties, str(pname), f"ratings[{r}]")
            out[str(pname)] = float(val)
        ratings.append(out)
    invalid = data.get("invalid_ballots", 0)
    if not isinstance(invalid, int) or invalid < 0:
        raise ParseError("'invalid_ballots' must be a non-negative integer")
    election = validate_election(parties, raw_types)
    election = Election(
        parties=election.parties,
        ballot_types=election.ballot_types,
        total_voters=election.total_voters,
        invalid_ballots=election.invalid_ballots + invalid,
    )
    return BallotFile(
        parties=tuple(parties),
        election=election,
        single_votes=singles,
        rankings=tuple(rankings),
        ratings=tuple(ratings),
        truncated_rankings=truncated,
    )


def parse_ballot_file(source, fmt: str | None = None) -> BallotFile:
    """Parse a ballot file from a path, stream, or text.

    Format is taken from the extension or sniffed: JSON starts with '{'.
    """
    if hasattr(source, "read"):
        text = source.read()
        name = getattr(source, "name", "")
    else:
        path = Path(source)
        text = path.read_text(encoding="utf-8")
        name = str(path)
    if fmt is None:
        if name.endswith(".json"):
            fmt = "json"
        elif name.endswith(".csv"):
            fmt = "csv"
        else:
            fmt = "json" if text.lstrip()[:1] == "{" else "csv"
    if fmt == "json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from None
        return _parse_json_dict(data)
    if fmt == "csv":
        return _parse_csv(text)
    raise ParseError(f"unknown ballot file format {fmt!r}")


def emit_ballot_json(bf: BallotFile) -> str:
    """Grouped-JSON form of a ballot file; parses back to the same election."""
    e = bf.election
    data = {
        "parties": list(e.parties),
        "ballot_types": [
            {
                "approvals": [e.parties[i] for i in sorted(bt.approvals)],
                "count": bt.count,
                **(
                    {"candidates": {e.parties[i]: n for i, n in sorted(bt.preferences.items())}}
                    if bt.preferences
                    else {}
                ),
            }
            for bt in e.ballot_types
        ],
        "invalid_ballots": e.invalid_ballots,
    }
    if bf.single_votes:
        data["single_votes"] = [e.parties[b.choice] for b in bf.single_votes]
    if bf.rankings:
        data["rankings"] = [[e.parties[i] for i in b.ranking] for b in bf.rankings]
    if bf.ratings:
        data["ratings"] = bf.ratings
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def emit_ballot_csv(bf: BallotFile) -> str:
    """Per-voter CSV form: ballot types expanded to one row per voter.

    The single-vote and ranking views are written onto the first rows in
    their own order; they are independent inputs, so no row alignment
    with the approval column is implied.
    """
    e = bf.election
    out = io.StringIO()
    out.write("# parties: " + ";".join(e.parties) + "\n")
    out.write(",".join(CSV_COLUMNS) + "\n")
    rows: list[list[str]] = []
    for bt in e.ballot_types:
        approvals = ";".join(e.parties[i] for i in sorted(bt.approvals))
        cands = ";".join(
            f"{e.parties[i]}={n}" for i, n in sorted(bt.preferences.items())
        )
        for _ in range(bt.count):
            rows.append([approvals, "", "", "", cands])
    for _ in range(e.invalid_ballots):
        rows.append(["", "", "", "", ""])
    for i, b in enumerate(bf.single_votes):
        if i >= len(rows):
            rows.append(["", "", "", "", ""])
        rows[i][1] = e.parties[b.choice]
    for i, b in enumerate(bf.rankings):
        if i >= len(rows):
            rows.append(["", "", "", "", ""])
        rows[i][2] = ">".join(e.parties[j] for j in b.ranking)
    for i, entry in enumerate(bf.ratings):
        if i >= len(rows):
            rows.append(["", "", "", "", ""])
        rows[i][3] = ";".join(f"{k}={v:g}" for k, v in sorted(entry.items()))
    for i, row in enumerate(rows, start=1):
        out.write(f"v{i},{row[0]},{row[1]},{row[2]},{row[3]},{row[4]}\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# Trace and report rendering


def _round_rows(election: Election, assignment: Assignment) -> list[dict]:
    rows = []
    for r in assignment.rounds:
        rows.append(
            {
                "tally": list(r.tally_before),
                "selected": [election.parties[p] for p in r.selected],
                "absorbed": list(r.absorbed),
                "note": r.note,
            }
        )
    return rows


def assignment_to_dict(election: Election, assignment: Assignment) -> dict:
    """Canonical JSON form of an assignment; shared by CLI and service."""
    data = {
        "parties": list(election.parties),
        "assigned": list(assignment.assigned),
        "order": [election.parties[p] for p in assignment.order],
        "rounds": _round_rows(election, assignment),
        "per_type": [
            {
                "approvals": [election.parties[i] for i in sorted(bt.approvals)],
                "count": bt.count,
                "portions": {
                    election.parties[p]: n
                    for p, n in sorted(assignment.per_type[j].items())
                },
            }
            for j, bt in enumerate(election.ballot_types)
        ],
        "diagnostics": list(assignment.diagnostics),
    }
    if assignment.seed is not None:
        data["seed"] = assignment.seed
    cands = candidate_tallies(election, assignment)
    if any(cands):
        data["candidates"] = [
            {name: n for name, n in sorted(c.items())} for c in cands
        ]
    return data


def emit_trace(election: Election, assignment: Assignment, fmt: str = "text") -> str:
    """Render the per-round remaining-tally table.

    Each row shows the tallies seen before that round's selection, the
    selected party's column starred (both columns for a split), and the
    ballots absorbed; the final row is the assigned counts.
    """
    if fmt == "json":
        return json.dumps(
            assignment_to_dict(election, assignment), indent=2, sort_keys=True
        ) + "\n"
    if fmt == "csv":
        out = io.StringIO()
        out.write("round," + ",".join(election.parties) + ",selected,absorbed\n")
        for i, r in enumerate(assignment.rounds, start=1):
            sel = ";".join(election.parties[p] for p in r.selected)
            absorbed = ";".join(str(a) for a in r.absorbed)
            out.write(f"{i}," + ",".join(map(str, r.tally_before)) + f",{sel},{absorbed}\n")
        out.write("final," + ",".join(map(str, assignment.assigned)) + ",,\n")
        return out.getvalue()
    if fmt != "text":
        raise ParseError(f"unknown trace format {fmt!r}")

    names = election.parties
    body: list[list[str]] = []
    for i, r in enumerate(assignment.rounds, start=1):
        cells = []
        for p in range(len(names)):
            mark = "*" if p in r.selected else ""
            cells.append(f"{r.tally_before[p]}{mark}")
        sel = ", ".join(
            f"{names[p]} +{a}" for p, a in zip(r.selected, r.absorbed)
        )
        if len(r.selected) > 1:
            sel += " (split)"
        if r.note:
            sel += f"  [{r.note}]"
        body.append([str(i), *cells, sel])
    body.append(["final", *[str(a) for a in assignment.assigned], ""])

    headers = ["round", *names, "selected"]
    widths = [
        max(len(headers[c]), *(len(row[c]) for row in body))
        for c in range(len(headers))
    ]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    for d in assignment.diagnostics:
        lines.append(f"note: {d}")
    return "\n".join(lines) + "\n"


def render_seats(election: Election, seats: SeatVector) -> str:
    width = max(len(n) for n in election.parties)
    lines = [f"seats (house of {seats.house_size}):"]
    for name, s in zip(election.parties, seats.seats):
        lines.append(f"  {name.ljust(width)}  {s}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# HTTP service


def build_app():
    """Create the HTTP app with fresh in-memory stores."""
    from fastapi import Body, FastAPI, HTTPException
    from fastapi.middleware.cors import CORSMiddleware

    app = FastAPI(title="majrep", version="0.1.0")
    # The browser explorer is served as static files from any origin.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    elections: dict[str, BallotFile] = {}
    sessions: dict[str, dict] = {}
    counters = {"e": 0, "s": 0}

    def _next_id(kind: str) -> str:
        counters[kind] += 1
        return f"{kind}{counters[kind]}"

    def _get_election(eid: str) -> BallotFile:
        if eid not in elections:
            raise HTTPException(404, f"unknown election {eid!r}")
        return elections[eid]

    def _party_ids(election: Election, items: Iterable, what: str) -> list[int]:
        ids = []
        for item in items:
            if isinstance(item, int):
                if not 0 <= item < election.num_parties:
                    raise HTTPException(400, f"{what}: party index {item} out of range")
                ids.append(item)
            else:
                try:
                    ids.append(election.party_index(str(item)))
                except ElectionError as exc:
                    raise HTTPException(400, f"{what}: {exc}") from None
        return ids

    def _session_state(sid: str) -> dict:
        s = sessions[sid]
        engine: AssignmentEngine = s["engine"]
        e: Election = s["election"]
        state = {
            "session": sid,
            "election": s["election_id"],
            "finished": engine.finished,
            "order": [e.parties[p] for p in engine.order],
            "assigned": list(engine.assigned),
            "tally": list(engine.current_tally()),
            "rounds": _round_rows(e, Assignment(
                tuple(engine.assigned), tuple(engine.order), tuple(engine.rounds),
                tuple(dict(d) for d in engine.per_type), tuple(engine.diagnostics),
            )),
            "pending_tie": None,
        }
        if not engine.finished:
            tied = engine.leaders()
            if len(tied) > 1:
                state["pending_tie"] = {
                    "tied": [e.parties[p] for p in tied],
                    "strategies": ["pick", "split", "skip"],
                }
        return state

    @app.post("/elections")
    def upload_election(body: dict = Body(...)):
        try:
            bf = _parse_json_dict(body)
        except (ParseError, ElectionError) as exc:
            raise HTTPException(400, str(exc)) from None
        eid = _next_id("e")
        elections[eid] = bf
        e = bf.election
        return {
            "id": eid,
            "parties": list(e.parties),
            "total_voters": e.total_voters,
            "invalid_ballots": e.invalid_ballots,
            "ballot_types": len(e.ballot_types),
        }

    @app.get("/elections/{eid}/tally")
    def get_tally(eid: str, removed: str = ""):
        from .core import tally_remaining

        bf = _get_election(eid)
        removed_ids = _party_ids(
            bf.election, [r for r in removed.split(",") if r], "removed"
        )
        t = tally_remaining(bf.election, removed_ids)
        return {
            "parties": list(bf.election.parties),
            "tally": list(t.counts),
            "removed": [bf.election.parties[i] for i in removed_ids],
        }

    @app.post("/elections/{eid}/assign")
    def post_assign(eid: str, body: dict = Body(...)):
        bf = _get_election(eid)
        e = bf.election
        try:
            if "order" in body:
                order = _party_ids(e, body["order"], "order")
                assignment = assign_by_order(e, order)
            elif "prefix" in body:
                prefix = _party_ids(e, body["prefix"], "prefix")
                assignment = assign_prefix_then_greedy(e, prefix)
            else:
                raise HTTPException(400, "body needs 'order' or 'prefix'")
        except TieUnresolvedError as exc:
            raise HTTPException(409, str(exc)) from None
        except AssignmentError as exc:
            raise HTTPException(400, str(exc)) from None
        return assignment_to_dict(e, assignment)

    @app.post("/elections/{eid}/greedy")
    def post_greedy(eid: str, body: dict = Body(default={})):
        bf = _get_election(eid)
        e = bf.election
        try:
            policy = _tie_policy_from(body.get("tie"), e)
            if "cap" in body:
                cap = body["cap"] or {}
                cfg = CapConfig(
                    threshold=float(cap.get("threshold", 0.55)),
                    rng_seed=int(cap.get("seed", 0)),
                )
                assignment = assign_with_cap(e, cfg, policy)
            else:
                assignment = assign_greedy(e, policy)
        except TieUnresolvedError as exc:
            raise HTTPException(409, str(exc)) from None
        except AssignmentError as exc:
            raise HTTPException(400, str(exc)) from None
        return assignment_to_dict(e, assignment)

    def _tie_policy_from(spec: dict | None, e: Election) -> TiePolicy | None:
        if not spec:
            return None
        kind = spec.get("kind", "authority")
        if kind == "authority":
            order = spec.get("order")
            ids = _party_ids(e, order, "tie order") if order else list(range(e.num_parties))
            return TiePolicy.authority(ids)
        if kind == "split":
            return TiePolicy.split()
        if kind == "skip":
            return TiePolicy.skip()
        raise HTTPException(400, f"unknown tie policy {kind!r}")

    @app.get("/elections/{eid}/feasible")
    def get_feasible(eid: str, target: str):
        bf = _get_election(eid)
        e = bf.election
        try:
            goal = [int(x) for x in target.split(",")]
        except ValueError:
            raise HTTPException(400, f"malformed target {target!r}") from None
        try:
            res = is_representative(e, goal)
        except SpaceError as exc:
            raise HTTPException(400, str(exc)) from None
        out = {"feasible": res.feasible, "target": goal}
        if res.feasible:
            out["per_type"] = [
                {
                    "approvals": [e.parties[i] for i in sorted(bt.approvals)],
                    "count": bt.count,
                    "portions": {e.parties[p]: n for p, n in sorted(split.items())},
                }
                for bt, split in zip(e.ballot_types, res.per_type)
            ]
        else:
            out["violated_subset"] = [e.parties[i] for i in res.violated_subset]
        return out

    @app.get("/elections/{eid}/vertices")
    def get_vertices(eid: str, sample: int = 0, seed: int = 0):
        bf = _get_election(eid)
        e = bf.election
        if e.num_parties > 8 and sample <= 0:
            raise HTTPException(
                413,
                f"{e.num_parties} parties: exhaustive enumeration capped at 8; "
                "pass ?sample=N for a sampled sweep",
            )
        if sample > 10000:
            raise HTTPException(413, "sample capped at 10000 orderings")
        result = enumerate_vertices(
            e, sample_orderings=sample or 2000, seed=seed
        )
        return {
            "parties": list(e.parties),
            "vertices": sorted(list(v) for v in result.vertices),
            "exhaustive": result.exhaustive,
            "orderings_tried": result.orderings_tried,
        }

    @app.get("/elections/{eid}/compare")
    def get_compare(eid: str, seats: int = 100):
        bf = _get_election(eid)
        try:
            return compare_report(bf, seats)
        except (ApportionError, ElectionError) as exc:
            raise HTTPException(400, str(exc)) from None

    @app.post("/elections/{eid}/sessions")
    def create_session(eid: str):
        bf = _get_election(eid)
        sid = _next_id("s")
        sessions[sid] = {
            "election_id": eid,
            "election": bf.election,
            "engine": AssignmentEngine(bf.election),
        }
        return _session_state(sid)

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        """Read-only session state, so clients can re-hydrate after a refresh."""
        if sid not in sessions:
            raise HTTPException(404, f"unknown session {sid!r}")
        return _session_state(sid)

    @app.post("/sessions/{sid}/step")
    def step_session(sid: str, body: dict = Body(default={})):
        if sid not in sessions:
            raise HTTPException(404, f"unknown session {sid!r}")
        s = sessions[sid]
        engine: AssignmentEngine = s["engine"]
        e: Election = s["election"]
        if engine.finished:
            return _session_state(sid)
        tied = engine.leaders()
        choice = body.get("party")
        strategy = body.get("strategy")
        try:
            if choice is not None:
                pid = _party_ids(e, [choice], "party")[0]
                if len(tied) > 1 and pid not in tied:
                    raise HTTPException(
                        400, f"party {e.parties[pid]!r} is not among the tied leaders"
                    )
                note = "" if len(tied) == 1 else (
                    f"tie ({', '.join(e.parties[p] for p in tied)}): "
                    f"authority chose {e.parties[pid]}"
                )
                engine.select(pid, note=note)
            elif len(tied) == 1:
                engine.select(tied[0])
            elif strategy == "split":
                res = resolve_tie(engine.current_tally(), tied, TiePolicy.split())
                engine.select_split(
                    *res.parties,
                    note=f"tie ({', '.join(e.parties[p] for p in tied)}): split",
                )
            elif strategy == "skip":
                res = resolve_tie(engine.current_tally(), tied, TiePolicy.skip())
                engine.select(
                    res.parties[0],
                    note=f"tie: skipped, {e.parties[res.parties[0]]} next in line",
                )
            elif strategy is not None:
                raise HTTPException(400, f"unknown strategy {strategy!r}")
            # no choice and a pending tie: return state without advancing
        except TieUnresolvedError as exc:
            raise HTTPException(409, str(exc)) from None
        except AssignmentError as exc:
            raise HTTPException(400, str(exc)) from None
        return _session_state(sid)

    @app.post("/simulate")
    def post_simulate(body: dict = Body(...)):
        try:
            cfg = ExperimentConfig(
                n_parties=int(body.get("parties", 20)),
                n_voters=int(body.get("voters", 5000)),
                n_runs=int(body.get("runs", 100)),
                k=float(body.get("k", 1.424)),
                master_seed=int(body.get("seed", 0)),
            )
        except (SimError, ValueError) as exc:
            raise HTTPException(400, str(exc)) from None
        if cfg.n_parties > 64 or cfg.n_voters > 20000 or cfg.n_runs > 200:
            raise HTTPException(413, "simulation too large for the service; use the CLI")
        report = run_experiment(cfg)
        return {
            "config": {
                "parties": cfg.n_parties,
                "voters": cfg.n_voters,
                "runs": cfg.n_runs,
                "k": cfg.k,
                "seed": cfg.master_seed,
            },
            "mean_shares": list(report.mean_shares),
            "sd_shares": list(report.sd_shares),
            "exponent": report.exponent,
            "r_squared": report.r_squared,
            "dropped_voters": report.dropped_voters,
            "notes": list(report.notes),
        }

    return app


def compare_report(bf: BallotFile, house_size: int) -> dict:
    """Greedy system vs pure proportional vs the bonus rule, side by side."""
    e = bf.election
    assignment = assign_greedy(e)
    greedy_seats = seats_largest_remainder(assignment.assigned, house_size)
    out = {
        "parties": list(e.parties),
        "house": house_size,
        "greedy": {
            "assigned": list(assignment.assigned),
            "seats": list(greedy_seats.seats),
        },
    }
    if bf.single_votes:
        prop = pure_proportional(bf.single_votes, e.num_parties, house_size)
        out["proportional"] = {"seats": list(prop.seats)}
        try:
            seats, report = italicum(
                bf.single_votes, bf.rankings, e.num_parties, house_size
            )
            out["italicum"] = {
                "seats": list(seats.seats),
                "winner": e.parties[report.winner],
                "triggered": report.triggered,
                "bonus_seats": report.bonus_seats,
                "notes": list(report.notes),
            }
            if report.runoff:
                out["italicum"]["runoff"] = {
                    "finalists": [e.parties[i] for i in report.runoff.finalists],
                    "votes": list(report.runoff.votes),
                    "abstained": report.runoff.abstained,
                    "winner": e.parties[report.runoff.winner],
                }
        except ApportionError as exc:
            out["italicum"] = {"error": str(exc)}
    else:
        out["note"] = "no single-vote ballots in the file; comparators skipped"
    return out


def serve(port: int = 8000, host: str = "127.0.0.1") -> None:
    """Run the HTTP service until interrupted."""
    import uvicorn

    uvicorn.run(build_app(), host=host, port=port, log_level="warning")


# ---------------------------------------------------------------------------
# Command line interface


def _write_output(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json_dump(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _tie_policy_args(args, election: Election) -> TiePolicy | None:
    if args.authority_order:
        order = _cli_party_ids(election, args.authority_order)
        return TiePolicy.authority(order)
    if args.tie == "split":
        return TiePolicy.split()
    if args.tie == "skip":
        return TiePolicy.skip()
    if args.tie == "authority":
        return TiePolicy.authority(range(election.num_parties))
    return None


def _cli_party_ids(election: Election, spec: str) -> list[int]:
    ids = []
    for token in spec.split(","):
        token = token.strip()
        if not token:
            continue
        if token.isdigit():
            idx = int(token)
            if not 0 <= idx < election.num_parties:
                raise ElectionError(f"party index {idx} out of range")
            ids.append(idx)
        else:
            ids.append(election.party_index(token))
    return ids


def _cmd_tabulate(args) -> int:
    bf = parse_ballot_file(args.file)
    e = bf.election
    policy = _tie_policy_args(args, e)
    if args.method == "greedy":
        assignment = assign_greedy(e, policy)
    elif args.method == "order":
        if not args.order:
            raise ElectionError("--method order requires --order")
        assignment = assign_by_order(e, _cli_party_ids(e, args.order))
    elif args.method == "cap":
        cfg = CapConfig(threshold=args.cap, rng_seed=args.cap_seed)
        assignment = assign_with_cap(e, cfg, policy)
    elif args.method == "twohouse":
        if not args.senate:
            raise ElectionError("--method twohouse requires --senate FILE")
        senate_bf = parse_ballot_file(args.senate)
        order, a_c, a_s = assign_two_house(e, senate_bf.election, policy)
        return _emit_twohouse(args, e, senate_bf.election, order, a_c, a_s)
    else:
        raise ElectionError(f"unknown method {args.method!r}")

    if args.format == "json":
        data = assignment_to_dict(e, assignment)
        if args.seats:
            data["seats"] = list(
                seats_largest_remainder(assignment.assigned, args.seats).seats
            )
            data["house"] = args.seats
        if e.invalid_ballots:
            data["invalid_ballots"] = e.invalid_ballots
        text = _json_dump(data)
    else:
        text = emit_trace(e, assignment, args.format)
        if args.format == "text":
            if e.invalid_ballots:
                text += f"note: {e.invalid_ballots} invalid (empty) ballot(s) excluded\n"
            if args.seats:
                text += render_seats(
                    e, seats_largest_remainder(assignment.assigned, args.seats)
                )
            cands = candidate_tallies(e, assignment)
            if any(cands):
                text += "candidate preferences (counted on assigned portions):\n"
                for name, counts in zip(e.parties, cands):
                    if counts:
                        inner = ", ".join(f"{n}: {c}" for n, c in sorted(counts.items()))
                        text += f"  {name}: {inner}\n"
    _write_output(text, args.out)
    return EXIT_OK


def _emit_twohouse(args, commons, senate, order, a_c, a_s) -> int:
    if args.format == "json":
        data = {
            "order": [commons.parties[p] for p in order],
            "commons": assignment_to_dict(commons, a_c),
            "senate": assignment_to_dict(senate, a_s),
        }
        if args.seats:
            data["commons"]["seats"] = list(
                seats_largest_remainder(a_c.assigned, args.seats).seats
            )
            data["senate"]["seats"] = list(
                seats_largest_remainder(a_s.assigned, args.seats).seats
            )
        text = _json_dump(data)
    else:
        text = "== commons ==\n" + emit_trace(commons, a_c, args.format)
        text += "== senate ==\n" + emit_trace(senate, a_s, args.format)
        if args.format == "text":
            text += "shared order: " + " > ".join(commons.parties[p] for p in order) + "\n"
            if args.seats:
                text += "commons " + render_seats(
                    commons, seats_largest_remainder(a_c.assigned, args.seats)
                )
                text += "senate " + render_seats(
                    senate, seats_largest_remainder(a_s.assigned, args.seats)
                )
    _write_output(text, args.out)
    return EXIT_OK


def _cmd_compare(args) -> int:
    bf = parse_ballot_file(args.file)
    data = compare_report(bf, args.seats)
    if args.format == "json":
        text = _json_dump(data)
    else:
        e = bf.election
        width = max(len(n) for n in e.parties)
        lines = [f"house of {args.seats}"]
        header = f"  {'party'.ljust(width)}  greedy_votes  greedy_seats"
        if "proportional" in data:
            header += "  proportional"
        if "italicum" in data and "seats" in data.get("italicum", {}):
            header += "  italicum"
        lines.append(header)
        for i, name in enumerate(e.parties):
            row = (
                f"  {name.ljust(width)}  "
                f"{str(data['greedy']['assigned'][i]).rjust(12)}  "
                f"{str(data['greedy']['seats'][i]).rjust(12)}"
            )
            if "proportional" in data:
                row += f"  {str(data['proportional']['seats'][i]).rjust(12)}"
            if "italicum" in data and "seats" in data["italicum"]:
                row += f"  {str(data['italicum']['seats'][i]).rjust(8)}"
            lines.append(row)
        if "italicum" in data:
            it = data["italicum"]
            if "error" in it:
                lines.append(f"italicum: {it['error']}")
            else:
                how = "majority trigger" if it["triggered"] else "runoff"
                lines.append(
                    f"italicum winner: {it['winner']} ({how}), bonus {it['bonus_seats']} seats"
                )
                if it.get("runoff"):
                    r = it["runoff"]
                    lines.append(
                        f"runoff {r['finalists'][0]} {r['votes'][0]} : "
                        f"{r['votes'][1]} {r['finalists'][1]}"
                        + (f" ({r['abstained']} abstained)" if r["abstained"] else "")
                    )
                for n in it.get("notes", []):
                    lines.append(f"note: {n}")
        if "note" in data:
            lines.append(f"note: {data['note']}")
        text = "\n".join(lines) + "\n"
    _write_output(text, args.out)
    return EXIT_OK


def _cmd_space(args) -> int:
    bf = parse_ballot_file(args.file)
    e = bf.election
    pieces: dict = {"parties": list(e.parties)}
    exit_code = EXIT_OK
    if args.check:
        try:
            goal = [int(x) for x in args.check.split(",")]
        except ValueError:
            raise ElectionError(f"malformed target {args.check!r}") from None
        res = is_representative(e, goal)
        pieces["check"] = {"target": goal, "feasible": res.feasible}
        if res.feasible:
            pieces["check"]["per_type"] = [
                {e.parties[p]: n for p, n in sorted(split.items())}
                for split in res.per_type
            ]
        else:
            pieces["check"]["violated_subset"] = [
                e.parties[i] for i in res.violated_subset
            ]
            exit_code = EXIT_INFEASIBLE
    if args.enumerate:
        result = enumerate_vertices(e, sample_orderings=args.sample, seed=args.seed)
        pieces["vertices"] = sorted(list(v) for v in result.vertices)
        pieces["exhaustive"] = result.exhaustive
        pieces["orderings_tried"] = result.orderings_tried
    if args.audit:
        report = convexity_audit(e, seed=args.seed)
        pieces["audit"] = {
            "ok": report.ok,
            "vertices": report.num_vertices,
            "achievable_points": report.num_achievable,
            "hull_integer_points": report.num_hull_points,
            "segment_checks": report.segment_checks,
        }
        if report.counterexample is not None:
            pieces["audit"]["counterexample"] = list(report.counterexample)
    if args.format == "json":
        text = _json_dump(pieces)
    else:
        lines = []
        if "check" in pieces:
            c = pieces["check"]
            lines.append(
                f"target {','.join(map(str, c['target']))}: "
                + ("feasible" if c["feasible"] else "infeasible")
            )
            if not c["feasible"]:
                lines.append(
                    "  violated subset: " + ", ".join(c["violated_subset"])
                )
        if "vertices" in pieces:
            mode = "exhaustive" if pieces["exhaustive"] else "sampled"
            lines.append(
                f"{len(pieces['vertices'])} vertex parliament(s) "
                f"({mode}, {pieces['orderings_tried']} orderings):"
            )
            for v in pieces["vertices"]:
                lines.append("  " + ",".join(map(str, v)))
        if "audit" in pieces:
            a = pieces["audit"]
            lines.append(
                f"convexity audit: {'ok' if a['ok'] else 'FAILED'} "
                f"({a['achievable_points']} points, {a['vertices']} vertices, "
                f"{a['hull_integer_points']} hull integer points, "
                f"{a['segment_checks']} segment checks)"
            )
            if "counterexample" in a:
                lines.append("  counterexample: " + ",".join(map(str, a["counterexample"])))
        text = "\n".join(lines) + "\n"
    _write_output(text, args.out)
    return exit_code


def _cmd_simulate(args) -> int:
    cfg = ExperimentConfig(
        n_parties=args.parties,
        n_voters=args.voters,
        n_runs=args.runs,
        k=args.k,
        master_seed=args.seed,
    )
    report = run_experiment(cfg, seat_house=args.seat_house)
    if args.format == "json":
        text = _json_dump(
            {
                "config": {
                    "parties": cfg.n_parties,
                    "voters": cfg.n_voters,
                    "runs": cfg.n_runs,
                    "k": cfg.k,
                    "seed": cfg.master_seed,
                },
                "mean_shares": list(report.mean_shares),
                "sd_shares": list(report.sd_shares),
                "exponent": report.exponent,
                "r_squared": report.r_squared,
                "dropped_voters": report.dropped_voters,
                "seed_scheme": report.seed_scheme,
                "notes": list(report.notes),
            }
        )
    else:
        text = rank_size_csv(report)
        if report.exponent is not None:
            text += (
                f"# exponent,{report.exponent:.6f}\n"
                f"# r_squared,{report.r_squared:.6f}\n"
            )
    _write_output(text, args.out)
    return EXIT_OK


def _cmd_serve(args) -> int:
    serve(port=args.port, host=args.host)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="majrep",
        description="Majoritarian representative voting: tabulate, compare, explore, simulate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_tab = sub.add_parser("tabulate", help="assign ballots and print the round table")
    p_tab.add_argument("file", help="ballot file (CSV or JSON)")
    p_tab.add_argument(
        "--method", default="greedy", choices=["greedy", "order", "cap", "twohouse"]
    )
    p_tab.add_argument("--tie", choices=["split", "authority", "skip"])
    p_tab.add_argument(
        "--authority-order", help="comma-separated party order for authority ties"
    )
    p_tab.add_argument("--order", help="comma-separated full party order (method=order)")
    p_tab.add_argument("--cap", type=float, default=0.55, help="share cap (method=cap)")
    p_tab.add_argument("--cap-seed", type=int, default=0, help="seed for capped sampling")
    p_tab.add_argument("--senate", help="second ballot file (method=twohouse)")
    p_tab.add_argument("--seats", type=int, help="also apportion a house of this size")
    p_tab.add_argument("--format", default="text", choices=["text", "json", "csv"])
    p_tab.add_argument("--out", help="write output to this path instead of stdout")
    p_tab.set_defaults(func=_cmd_tabulate)

    p_cmp = sub.add_parser("compare", help="greedy vs proportional vs bonus-rule seats")
    p_cmp.add_argument("file")
    p_cmp.add_argument("--seats", type=int, default=100)
    p_cmp.add_argument("--format", default="text", choices=["text", "json"])
    p_cmp.add_argument("--out")
    p_cmp.set_defaults(func=_cmd_compare)

    p_sp = sub.add_parser("space", help="attainable parliaments: vertices, checks, audit")
    p_sp.add_argument("file")
    p_sp.add_argument("--enumerate", action="store_true", help="list vertex parliaments")
    p_sp.add_argument("--check", help="target counts, comma-separated")
    p_sp.add_argument("--audit", action="store_true", help="run the convexity audit")
    p_sp.add_argument("--sample", type=int, default=2000, help="orderings when sampling")
    p_sp.add_argument("--seed", type=int, default=0)
    p_sp.add_argument("--format", default="text", choices=["text", "json"])
    p_sp.add_argument("--out")
    p_sp.set_defaults(func=_cmd_space)

    p_sim = sub.add_parser("simulate", help="spatial Monte Carlo batch")
    p_sim.add_argument("--parties", type=int, default=20)
    p_sim.add_argument("--voters", type=int, default=5000)
    p_sim.add_argument("--k", type=float, default=1.424)
    p_sim.add_argument("--runs", type=int, default=100)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument(
        "--seat-house", type=int, help="report seat shares for a house of this size"
    )
    p_sim.add_argument("--format", default="csv", choices=["csv", "json"])
    p_sim.add_argument("--out")
    p_sim.set_defaults(func=_cmd_simulate)

    p_srv = sub.add_parser("serve", help="run the HTTP service")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except TieUnresolvedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (
        ParseError,
        ElectionError,
        AssignmentError,
        ApportionError,
        SpaceError,
        SimError,
        FileNotFoundError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
