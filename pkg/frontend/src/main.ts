// DOM wiring. State lives in the service; this file only moves it to the page.

import { ApiClient, ApiError } from "./api.js";
import { ExplorerSession } from "./session.js";
import { branchTable, errorBox, previewCard, sessionPanel } from "./render.js";

let api: ApiClient | null = null;
let session: ExplorerSession | null = null;

const $ = (id: string) => document.getElementById(id)!;

function showError(err: unknown) {
  const msg = err instanceof ApiError ? `service: ${err.message}` : String(err);
  $("errors").innerHTML = errorBox(msg);
}

function clearError() {
  $("errors").innerHTML = "";
}

function renderSession() {
  if (!session) return;
  $("session").innerHTML = sessionPanel(session.parties, session.state);
  // the session id is the only client-side state worth keeping
  location.hash = `base=${encodeURIComponent(api!.baseUrl)}&session=${session.state.session}`;
}

function renderPreviews() {
  if (!session) return;
  $("previews").innerHTML = session.previews.map((p, i) => previewCard(p, i)).join("");
}

async function run(op: () => Promise<void>) {
  clearError();
  try {
    await op();
  } catch (err) {
    showError(err);
  }
}

async function connect() {
  const base = ($("base") as HTMLInputElement).value.trim();
  api = new ApiClient(base);
  const text = ($("election") as HTMLTextAreaElement).value;
  const summary = await api.uploadElection(JSON.parse(text));
  session = await ExplorerSession.connect(api, summary.id, summary.parties);
  $("branch-view").innerHTML = "";
  renderSession();
  renderPreviews();
}

async function resumeFromHash(): Promise<boolean> {
  const params = new URLSearchParams(location.hash.slice(1));
  const base = params.get("base");
  const sid = params.get("session");
  if (!base || !sid) return false;
  api = new ApiClient(base);
  ($("base") as HTMLInputElement).value = base;
  session = await ExplorerSession.resume(api, sid);
  renderSession();
  return true;
}

function wire() {
  $("connect").addEventListener("click", () => run(connect));

  $("step").addEventListener("click", () =>
    run(async () => {
      await session!.stepOnce();
      renderSession();
    }),
  );

  $("run").addEventListener("click", () =>
    run(async () => {
      await session!.runToCompletion();
      renderSession();
    }),
  );

  $("refresh").addEventListener("click", () =>
    run(async () => {
      await session!.rehydrate();
      renderSession();
    }),
  );

  $("preview").addEventListener("click", () =>
    run(async () => {
      const raw = ($("prefix") as HTMLInputElement).value.trim();
      const prefix = raw ? raw.split(",").map((s) => s.trim()) : [];
      await session!.reorderAndPreview(prefix);
      renderPreviews();
    }),
  );

  // tie choices, branch view and pins arrive via delegated clicks
  $("session").addEventListener("click", (ev) => {
    const el = ev.target as HTMLElement;
    if (el.dataset.tieParty) {
      run(async () => {
        await session!.resolveTie({ party: el.dataset.tieParty! });
        renderSession();
      });
    } else if (el.dataset.tieStrategy) {
      run(async () => {
        await session!.resolveTie({ strategy: el.dataset.tieStrategy! });
        renderSession();
      });
    } else if (el.dataset.branches) {
      run(async () => {
        const branches = await session!.allBranches();
        $("branch-view").innerHTML =
          "<h3>all branches</h3>" + branchTable(session!.parties, branches);
      });
    }
  });

  $("previews").addEventListener("click", (ev) => {
    const el = ev.target as HTMLElement;
    if (el.dataset.pin !== undefined) {
      session!.togglePin(Number(el.dataset.pin));
      renderPreviews();
    }
  });

  run(async () => {
    await resumeFromHash();
  });
}

wire();
