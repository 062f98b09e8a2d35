// Shared plumbing for integration tests: spawn the real assignment service,
// run the real CLI, load ballot fixtures.

import { spawn, spawnSync, ChildProcess } from "node:child_process";
import { createServer } from "node:net";
import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

export function fixturePath(name: string): string {
  return fileURLToPath(new URL(`./fixtures/${name}`, import.meta.url));
}

export function loadFixture(name: string): unknown {
  return JSON.parse(readFileSync(fixturePath(name), "utf8"));
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = createServer();
    srv.listen(0, "127.0.0.1", () => {
      const addr = srv.address();
      if (addr === null || typeof addr === "string") {
        reject(new Error("no port"));
        return;
      }
      srv.close(() => resolve(addr.port));
    });
    srv.on("error", reject);
  });
}

export interface Service {
  base: string;
  proc: ChildProcess;
  stop: () => void;
}

export async function startService(): Promise<Service> {
  const port = await freePort();
  const base = `http://127.0.0.1:${port}`;
  const proc = spawn("majrep", ["serve", "--host", "127.0.0.1", "--port", String(port)], {
    stdio: "ignore",
  });
  const deadline = Date.now() + 30000;
  for (;;) {
    try {
      const res = await fetch(`${base}/openapi.json`);
      if (res.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      proc.kill();
      throw new Error("service did not come up");
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  return { base, proc, stop: () => proc.kill() };
}

export interface CliResult {
  status: number;
  stdout: string;
  stderr: string;
}

export function runCli(args: string[]): CliResult {
  const res = spawnSync("majrep", args, { encoding: "utf8" });
  if (res.error) throw res.error;
  return { status: res.status ?? -1, stdout: res.stdout, stderr: res.stderr };
}
