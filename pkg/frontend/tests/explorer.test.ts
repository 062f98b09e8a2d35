// Explorer state machine against a live service instance.

import { afterAll, beforeAll, describe, expect, test } from "vitest";
import { ApiClient, ApiError } from "../src/api.js";
import { BRANCH_CAP, ExplorerSession, completeOrder, realizedOrder } from "../src/session.js";
import { Service, loadFixture, startService } from "./helpers.js";

let svc: Service;
let api: ApiClient;

beforeAll(async () => {
  svc = await startService();
  api = new ApiClient(svc.base);
});

afterAll(() => svc.stop());

async function openSession(fixture: string): Promise<ExplorerSession> {
  const summary = await api.uploadElection(loadFixture(fixture));
  return ExplorerSession.connect(api, summary.id, summary.parties);
}

describe("order helpers", () => {
  test("realizedOrder reads single selections and refuses splits", () => {
    expect(realizedOrder([{ tally: [1], selected: ["a"], absorbed: [1], note: "" }])).toEqual([
      "a",
    ]);
    expect(
      realizedOrder([{ tally: [1, 1], selected: ["a", "b"], absorbed: [1, 1], note: "" }]),
    ).toBeNull();
  });

  test("completeOrder appends unused parties in list order", () => {
    expect(completeOrder(["a", "b", "c"], ["b"])).toEqual(["b", "a", "c"]);
  });
});

describe("reorder previews", () => {
  test("previews accumulate for side-by-side comparison", async () => {
    const s = await openSession("toy.json");
    await s.reorderAndPreview([]);
    await s.reorderAndPreview(["b"]);
    await s.reorderAndPreview(["c", "b", "a"]);
    expect(s.previews.map((p) => p.label)).toEqual([
      "greedy default",
      "prefix b",
      "prefix c, b, a",
    ]);
    expect(s.previews[0]!.trace.assigned).toEqual([0, 2, 0]);
    expect(s.previews[1]!.trace.assigned).toEqual([0, 2, 0]);
    expect(s.previews[2]!.trace.assigned).toEqual([0, 1, 1]);
  });

  test("a duplicate prefix never reaches the service", async () => {
    const s = await openSession("toy.json");
    await expect(s.reorderAndPreview(["b", "b"])).rejects.toThrow("duplicates");
    expect(s.previews).toHaveLength(0);
  });

  test("unknown parties are rejected with the offending name", async () => {
    const s = await openSession("toy.json");
    await expect(s.reorderAndPreview(["zz"])).rejects.toThrow('unknown party "zz"');
  });

  test("service rejections carry the service's message", async () => {
    const bad = { parties: ["a"], ballot_types: [{ approvals: ["zz"], count: 1 }] };
    await expect(api.uploadElection(bad)).rejects.toSatisfy(
      (err: unknown) => err instanceof ApiError && err.status === 400 && err.message.length > 0,
    );
  });

  test("pins survive clearing", async () => {
    const s = await openSession("toy.json");
    await s.reorderAndPreview([]);
    await s.reorderAndPreview(["b"]);
    s.togglePin(1);
    expect(s.pinnedPreviews.map((p) => p.label)).toEqual(["prefix b"]);
    s.clearPreviews();
    expect(s.previews.map((p) => p.label)).toEqual(["prefix b"]);
  });
});

describe("stepping and ties", () => {
  test("a tieless election runs straight to its parliament", async () => {
    const s = await openSession("toy.json");
    await s.runToCompletion();
    expect(s.finished).toBe(true);
    expect(s.state.assigned).toEqual([0, 2, 0]);
    expect(s.orderPrefix).toEqual(["b"]);
  });

  test("runToCompletion stops at a tie instead of deciding it", async () => {
    const s = await openSession("nine.json");
    await s.runToCompletion();
    expect(s.finished).toBe(false);
    expect(s.pendingTie?.tied).toEqual(["birch", "cedar"]);
    expect(s.state.rounds).toHaveLength(1);
  });

  test("resolveTie validates the choice before posting", async () => {
    const s = await openSession("nine.json");
    await s.runToCompletion();
    await expect(s.resolveTie({ party: "elm" })).rejects.toThrow(
      'choice "elm" is not among the tied parties (birch, cedar)',
    );
    await expect(s.resolveTie({ strategy: "pick" })).rejects.toThrow("offered strategies");
    await expect(s.resolveTie({ strategy: "dance" })).rejects.toThrow("offered strategies");
    await expect(s.resolveTie({})).rejects.toThrow("needs a party or a strategy");
  });

  test("picking a tied party continues the session", async () => {
    const s = await openSession("nine.json");
    await s.runToCompletion();
    await s.resolveTie({ party: "cedar" });
    expect(s.state.rounds[1]!.selected).toEqual(["cedar"]);
    expect(s.state.rounds[1]!.note).toContain("authority chose cedar");
    await s.runToCompletion();
    expect(s.state.assigned).toEqual([30, 15, 29, 7, 8, 6, 4, 3, 2]);
  });

  test("skip hands the round to the next party in line", async () => {
    const s = await openSession("nine.json");
    await s.runToCompletion();
    await s.resolveTie({ strategy: "skip" });
    expect(s.state.rounds[1]!.selected).toEqual(["dogwood"]);
    // the original tie is still there afterwards
    expect(s.pendingTie?.tied).toEqual(["birch", "cedar"]);
  });

  test("refresh re-hydrates the same state from the session id alone", async () => {
    const s = await openSession("nine.json");
    await s.runToCompletion();
    const resumed = await ExplorerSession.resume(api, s.state.session);
    expect(resumed.parties).toEqual(s.parties);
    expect(resumed.state).toEqual(s.state);
    // and the read did not advance anything
    expect((await api.getSession(s.state.session)).rounds).toHaveLength(1);
  });
});

describe("branch exploration", () => {
  test("a two-way tie fans out into four distinct parliaments", async () => {
    const s = await openSession("nine.json");
    await s.runToCompletion();
    const branches = await s.allBranches();
    expect(branches.map((b) => b.action)).toEqual([
      "pick birch",
      "pick cedar",
      "split",
      "skip",
    ]);
    const parliaments = branches.map((b) => JSON.stringify(b.state!.assigned));
    expect(new Set(parliaments).size).toBe(4);
    expect(branches[0]!.state!.assigned).toEqual([30, 29, 15, 7, 8, 6, 4, 3, 2]);
    expect(branches[1]!.state!.assigned).toEqual([30, 15, 29, 7, 8, 6, 4, 3, 2]);
    expect(branches[2]!.state!.assigned).toEqual([30, 22, 22, 7, 8, 6, 4, 3, 2]);
    expect(branches[3]!.state!.assigned).toEqual([30, 26, 12, 13, 8, 6, 4, 3, 2]);
    // split has no single-party ordering, the others do
    expect(branches[2]!.order).toBeNull();
    expect(branches[0]!.order).not.toBeNull();
    expect(branches[3]!.order!.slice(0, 2)).toEqual(["alder", "dogwood"]);
    // exploring branches never advances the session itself
    expect(s.state.rounds).toHaveLength(1);
    expect(s.pendingTie?.tied).toEqual(["birch", "cedar"]);
  });

  test("fan-out is capped at 24 branches", async () => {
    const parties = Array.from({ length: 25 }, (_, i) => `q${i}`);
    const wide = {
      parties,
      ballot_types: parties.map((p) => ({ approvals: [p], count: 1 })),
    };
    const summary = await api.uploadElection(wide);
    const s = await ExplorerSession.connect(api, summary.id, summary.parties);
    expect(s.pendingTie?.tied).toHaveLength(25);
    const branches = await s.allBranches();
    expect(branches).toHaveLength(BRANCH_CAP);
    expect(branches.every((b) => b.action.startsWith("pick"))).toBe(true);
  });
});
