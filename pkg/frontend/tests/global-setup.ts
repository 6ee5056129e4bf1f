// Builds the canonical two-branch fixture project (nodes 0..5, merge at 5)
// through the CLI and serves it for the contract tests.

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import type { TestProject } from "vitest/node";

declare module "vitest" {
  export interface ProvidedContext {
    baseUrl: string;
  }
}

const PY = process.env.IMGVC_PYTHON ?? "python3";

function cli(dir: string, ...args: string[]): void {
  execFileSync(PY, ["-m", "imgvc.cli", "--dir", dir, ...args], { stdio: "pipe" });
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const port = (probe.address() as { port: number }).port;
      probe.close(() => resolve(port));
    });
  });
}

async function waitForApi(base: string, timeoutMs = 20_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const reply = await fetch(`${base}/api/dag`);
      if (reply.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error(`server at ${base} did not come up`);
}

let proc: ChildProcess | undefined;
let projectDir: string | undefined;

export default async function setup(project: TestProject): Promise<() => Promise<void>> {
  projectDir = mkdtempSync(join(tmpdir(), "imgvc-ui-"));
  const dir = join(projectDir, "forkdemo");

  cli(dir, "init", "--name", "forkdemo", "--author", "ada", "--format", "png",
      "--width", "16", "--height", "16");
  cli(dir, "apply", "brightness", "--factor", "0.9", "--at", "2026-01-02T12:10:00Z");
  cli(dir, "apply", "sepia", "--at", "2026-01-02T12:20:00Z");
  cli(dir, "branch", "brush", "--from", "2", "--points", "2,2;8,8", "--radius", "1",
      "--color", "#FF0000FF", "--at", "2026-01-02T12:30:00Z");
  cli(dir, "branch", "brush", "--from", "2", "--points", "13,13;8,8", "--radius", "1",
      "--color", "#0000FFFF", "--at", "2026-01-02T12:40:00Z");
  cli(dir, "merge", "3", "4", "--at", "2026-01-02T12:50:00Z");

  const port = await freePort();
  proc = spawn(PY, ["-m", "imgvc.cli", "--dir", dir, "serve", "--port", String(port)], {
    stdio: "pipe",
  });
  const base = `http://127.0.0.1:${port}`;
  await waitForApi(base);
  project.provide("baseUrl", base);

  return async () => {
    proc?.kill();
    if (projectDir) rmSync(projectDir, { recursive: true, force: true });
  };
}
