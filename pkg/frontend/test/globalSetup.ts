// Boots a real recognition service for the e2e tests: generates a small
// synthetic dataset and trains a model once (cached in .cache/), then
// spawns `hpl serve` on an ephemeral port and records its base URL.

import { type ChildProcess, execFileSync, spawn } from "node:child_process";
import { existsSync, mkdirSync, rmSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const here = dirname(fileURLToPath(import.meta.url));
const frontendDir = join(here, "..");
const repoDir = join(frontendDir, "..");
const cacheDir = join(frontendDir, ".cache");
const modelPath = join(cacheDir, "model.json");
const serverFile = join(cacheDir, "server.json");

const PYTHON = process.env.HPL_PYTHON ?? "python3";

let child: ChildProcess | null = null;

function trainModelIfNeeded(): void {
  if (existsSync(modelPath)) return;
  mkdirSync(cacheDir, { recursive: true });
  const dataDir = join(cacheDir, "dataset");
  execFileSync(
    PYTHON,
    ["-m", "hpl.cli", "gen-dataset", "--out", dataDir, "--per-class", "60", "--seed", "7", "--size", "300"],
    { cwd: repoDir, stdio: "inherit", timeout: 300_000 },
  );
  execFileSync(
    PYTHON,
    ["-m", "hpl.cli", "train", "--data", dataDir, "--model", modelPath, "--seed", "7"],
    { cwd: repoDir, stdio: "inherit", timeout: 600_000 },
  );
}

function startServer(): Promise<string> {
  return new Promise((resolve, reject) => {
    child = spawn(PYTHON, ["-m", "hpl.cli", "serve", "--model", modelPath, "--port", "0"], {
      cwd: repoDir,
      stdio: ["ignore", "pipe", "pipe"],
    });
    let buffer = "";
    const timer = setTimeout(() => reject(new Error(`service did not start: ${buffer}`)), 60_000);
    child.stderr!.on("data", (data: Buffer) => {
      buffer += data.toString();
      const match = buffer.match(/serving on port (\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve(`http://127.0.0.1:${match[1]}`);
      }
    });
    child.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`service exited early (code ${code}): ${buffer}`));
    });
  });
}

async function waitHealthy(base: string): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt++) {
    try {
      const r = await fetch(`${base}/api/health`);
      if (r.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 100));
  }
  throw new Error("service never became healthy");
}

export default async function setup(): Promise<() => void> {
  trainModelIfNeeded();
  const base = await startServer();
  await waitHealthy(base);
  writeFileSync(serverFile, JSON.stringify({ base }));
  return () => {
    child?.kill();
    rmSync(serverFile, { force: true });
  };
}
