// Explorer session: a thin state machine over the service API.
//
// The explorer never computes assignments itself. Every count it holds came
// out of a service response, and every displayed trace is the canonical JSON
// for a full party ordering, so it byte-matches the command line's
// `tabulate --method order` output for that same ordering.

import {
  ApiClient,
  ApiError,
  AssignmentTrace,
  PendingTie,
  RoundRow,
  SessionState,
  StepAction,
} from "./api.js";
import { canonicalJson } from "./canon.js";

export const BRANCH_CAP = 24;

export interface Preview {
  label: string;
  prefix: string[];
  order: string[];
  trace: AssignmentTrace;
  traceText: string;
  pinned: boolean;
}

export interface Branch {
  action: string;
  state: SessionState | null;
  order: string[] | null;
  traceText: string | null;
  error: string | null;
}

export interface OrderingTrace {
  order: string[];
  trace: AssignmentTrace;
  traceText: string;
}

/** Single-party selection sequence of a finished run, or null after a split. */
export function realizedOrder(rounds: RoundRow[]): string[] | null {
  const order: string[] = [];
  for (const r of rounds) {
    if (r.selected.length !== 1) return null;
    order.push(r.selected[0] as string);
  }
  return order;
}

/** Extend a realized order to a full permutation, unused parties last. */
export function completeOrder(parties: string[], realized: string[]): string[] {
  const seen = new Set(realized);
  return [...realized, ...parties.filter((p) => !seen.has(p))];
}

function countsEqual(a: number[], b: number[]): boolean {
  return a.length === b.length && a.every((x, i) => x === b[i]);
}

// Recover the step action that produced a past round. A skipped party is not
// among the tied leaders, so it cannot be replayed as a plain pick; the
// service's round note tells the cases apart.
function replayAction(round: RoundRow): StepAction {
  if (round.selected.length !== 1) return { strategy: "split" };
  if (round.note.startsWith("tie: skipped")) return { strategy: "skip" };
  return { party: round.selected[0] as string };
}

export class ExplorerSession {
  previews: Preview[] = [];

  private constructor(
    public api: ApiClient,
    public parties: string[],
    public state: SessionState,
  ) {}

  /** Open a fresh stepping session on an already uploaded election. */
  static async connect(api: ApiClient, electionId: string, parties: string[]) {
    return new ExplorerSession(api, parties, await api.createSession(electionId));
  }

  /** Re-hydrate from a session id alone (what a page refresh does). */
  static async resume(api: ApiClient, sessionId: string) {
    const state = await api.getSession(sessionId);
    const { parties } = await api.tally(state.election);
    return new ExplorerSession(api, parties, state);
  }

  get electionId(): string {
    return this.state.election;
  }

  get orderPrefix(): string[] {
    return this.state.order;
  }

  get pendingTie(): PendingTie | null {
    return this.state.pending_tie;
  }

  get finished(): boolean {
    return this.state.finished;
  }

  async rehydrate(): Promise<SessionState> {
    this.state = await this.api.getSession(this.state.session);
    return this.state;
  }

  /** Advance one round; stops on a tie and reports it instead. */
  async stepOnce(): Promise<SessionState> {
    this.state = await this.api.step(this.state.session, {});
    return this.state;
  }

  /** Step until finished or a tie needs the authority's choice. */
  async runToCompletion(): Promise<SessionState> {
    while (!this.state.finished) {
      const before = this.state.rounds.length;
      await this.stepOnce();
      if (!this.state.finished && this.state.rounds.length === before) break;
    }
    return this.state;
  }

  /**
   * Apply the authority's tie choice: a tied party name, or one of the
   * strategies the service offered for this tie.
   */
  async resolveTie(choice: { party?: string; strategy?: string }): Promise<SessionState> {
    const tie = this.state.pending_tie;
    if (!tie) throw new Error("no pending tie to resolve");
    let action: StepAction;
    if (choice.party !== undefined) {
      if (!tie.tied.includes(choice.party)) {
        throw new Error(
          `choice ${JSON.stringify(choice.party)} is not among the tied parties (${tie.tied.join(", ")})`,
        );
      }
      action = { party: choice.party };
    } else if (choice.strategy !== undefined) {
      if (!tie.strategies.includes(choice.strategy) || choice.strategy === "pick") {
        throw new Error(
          `choice ${JSON.stringify(choice.strategy)} is not among the offered strategies`,
        );
      }
      action = { strategy: choice.strategy };
    } else {
      throw new Error("tie choice needs a party or a strategy");
    }
    this.state = await this.api.step(this.state.session, action);
    return this.state;
  }

  /**
   * Post an order prefix and keep the resulting parliament as a preview
   * card. The displayed trace is always the one for a full ordering: a
   * partial prefix is first run to learn its greedy continuation, then the
   * realized full ordering is posted so the trace matches what
   * `tabulate --method order` prints for it.
   */
  async reorderAndPreview(prefix: string[]): Promise<Preview> {
    if (new Set(prefix).size !== prefix.length) {
      throw new Error("order prefix contains duplicates");
    }
    for (const name of prefix) {
      if (!this.parties.includes(name)) {
        throw new Error(`unknown party ${JSON.stringify(name)}`);
      }
    }
    let order: string[];
    let trace: AssignmentTrace;
    if (prefix.length === this.parties.length) {
      order = [...prefix];
      trace = await this.api.assignByOrder(this.electionId, order);
    } else {
      const probe = await this.api.assignPrefix(this.electionId, prefix);
      order = completeOrder(this.parties, probe.order);
      trace = await this.api.assignByOrder(this.electionId, order);
      if (!countsEqual(probe.assigned, trace.assigned)) {
        throw new Error("service disagreed between prefix and its realized ordering");
      }
    }
    const preview: Preview = {
      label: prefix.length ? `prefix ${prefix.join(", ")}` : "greedy default",
      prefix: [...prefix],
      order,
      trace,
      traceText: canonicalJson(trace) + "\n",
      pinned: false,
    };
    this.previews.push(preview);
    return preview;
  }

  togglePin(index: number): void {
    const p = this.previews[index];
    if (p) p.pinned = !p.pinned;
  }

  get pinnedPreviews(): Preview[] {
    return this.previews.filter((p) => p.pinned);
  }

  clearPreviews(keepPinned = true): void {
    this.previews = keepPinned ? this.pinnedPreviews : [];
  }

  /**
   * Canonical ordering trace for the finished session, or null when a split
   * round means no single-party ordering reproduces it.
   */
  async orderingTrace(): Promise<OrderingTrace | null> {
    if (!this.state.finished) throw new Error("session not finished");
    const realized = realizedOrder(this.state.rounds);
    if (realized === null) return null;
    const order = completeOrder(this.parties, realized);
    const trace = await this.api.assignByOrder(this.electionId, order);
    if (!countsEqual(trace.assigned, this.state.assigned)) {
      throw new Error("service disagreed between session and its realized ordering");
    }
    return { order, trace, traceText: canonicalJson(trace) + "\n" };
  }

  /**
   * Final parliaments for every alternative at the current tie: pick each
   * tied party, split (two-way ties), and skip. Each branch replays this
   * session's past rounds in a scratch session, applies its action, then
   * continues with first-tied-party defaults until done.
   */
  async allBranches(): Promise<Branch[]> {
    const tie = this.state.pending_tie;
    if (!tie) throw new Error("no pending tie to branch on");
    const actions: { label: string; action: StepAction }[] = tie.tied.map((p) => ({
      label: `pick ${p}`,
      action: { party: p },
    }));
    if (tie.tied.length === 2) actions.push({ label: "split", action: { strategy: "split" } });
    actions.push({ label: "skip", action: { strategy: "skip" } });
    const limited = actions.slice(0, BRANCH_CAP);

    const branches: Branch[] = [];
    for (const { label, action } of limited) {
      try {
        let s = await this.api.createSession(this.electionId);
        for (const round of this.state.rounds) {
          s = await this.api.step(s.session, replayAction(round));
        }
        s = await this.api.step(s.session, action);
        while (!s.finished) {
          s = await this.api.step(
            s.session,
            s.pending_tie ? { party: s.pending_tie.tied[0] as string } : {},
          );
        }
        const realized = realizedOrder(s.rounds);
        let order: string[] | null = null;
        let traceText: string | null = null;
        if (realized !== null) {
          order = completeOrder(this.parties, realized);
          const trace = await this.api.assignByOrder(this.electionId, order);
          if (!countsEqual(trace.assigned, s.assigned)) {
            throw new Error("service disagreed between branch and its realized ordering");
          }
          traceText = canonicalJson(trace) + "\n";
        }
        branches.push({ action: label, state: s, order, traceText, error: null });
      } catch (err) {
        const msg = err instanceof ApiError ? err.message : String(err);
        branches.push({ action: label, state: null, order: null, traceText: null, error: msg });
      }
    }
    return branches;
  }
}
