// Scripted DOM test of the full interactive loop against a live service
// (spawned by test/globalSetup.ts): draw -> classify -> cards -> simulate
// -> animated run view.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { beforeEach, describe, expect, it } from "vitest";

import { Client } from "../src/api";
import { type App, initApp } from "../src/main";

const here = dirname(fileURLToPath(import.meta.url));
const serverFile = join(here, "..", ".cache", "server.json");
const BASE: string = JSON.parse(readFileSync(serverFile, "utf-8")).base;

type XY = [number, number];

function interp(a: XY, b: XY, n = 12): XY[] {
  const out: XY[] = [];
  for (let i = 0; i <= n; i++) out.push([a[0] + ((b[0] - a[0]) * i) / n, a[1] + ((b[1] - a[1]) * i) / n]);
  return out;
}

function mirrorX(stroke: XY[]): XY[] {
  return stroke.map(([x, y]) => [512 - x, y]);
}

// stroke scripts proportioned like the training symbols
const UP_STROKES: XY[][] = [
  interp([256, 420], [256, 100]),
  interp([256, 100], [223, 164], 6),
  interp([256, 100], [289, 164], 6),
];
const ROTATE_RIGHT_STROKES: XY[][] = [
  [
    ...interp([200, 400], [120, 300], 8),
    ...interp([120, 300], [160, 160], 8).slice(1),
    ...interp([160, 160], [300, 120], 8).slice(1),
    ...interp([300, 120], [400, 260], 8).slice(1),
    ...interp([400, 260], [330, 390], 8).slice(1),
  ],
  interp([330, 390], [395, 415], 5),
  interp([330, 390], [316, 322], 5),
];
const ROTATE_LEFT_STROKES: XY[][] = ROTATE_RIGHT_STROKES.map(mirrorX);

const POINTER = typeof window !== "undefined" && "PointerEvent" in window;

function fire(target: EventTarget, kind: "down" | "move" | "up", [x, y]: XY): void {
  const type = (POINTER ? "pointer" : "mouse") + kind;
  const Ctor = POINTER ? PointerEvent : MouseEvent;
  target.dispatchEvent(new Ctor(type, { clientX: x, clientY: y, bubbles: true }));
}

function drawStrokes(app: App, strokes: XY[][]): void {
  const canvas = app.root.querySelector<HTMLCanvasElement>("canvas.draw-canvas")!;
  for (const stroke of strokes) {
    fire(canvas, "down", stroke[0]);
    for (const point of stroke.slice(1)) fire(canvas, "move", point);
    fire(window, "up", stroke[stroke.length - 1]);
  }
}

function click(app: App, role: string): void {
  app.root.querySelector<HTMLButtonElement>(`[data-role="${role}"]`)!.click();
}

async function waitFor(check: () => boolean, what: string, timeoutMs = 20000): Promise<void> {
  const t0 = Date.now();
  while (!check()) {
    if (Date.now() - t0 > timeoutMs) throw new Error(`timed out waiting for ${what}`);
    await new Promise((r) => setTimeout(r, 25));
  }
}

function cardSymbols(app: App): string[] {
  return [...app.root.querySelectorAll<HTMLElement>("[data-role=tray] .card")].map(
    (node) => node.dataset.symbol!,
  );
}

async function runAndFinish(app: App): Promise<void> {
  const before = app.lastRun;
  click(app, "run");
  await waitFor(() => app.lastRun !== before && app.playback !== null, "simulate response");
  app.advance(120_000); // jump the animation to the end
}

describe("interactive loop against the live service", () => {
  let app: App;

  beforeEach(async () => {
    document.body.innerHTML = "<div id='app'></div>";
    app = await initApp(document.getElementById("app")!, new Client(BASE));
    expect(app.map).not.toBeNull();
  });

  it("draws an up arrow, submits, and runs one lattice step", async () => {
    drawStrokes(app, UP_STROKES);
    expect(app.raster.isBlank()).toBe(false);
    click(app, "submit-add");
    await waitFor(() => app.cards.length === 1, "one card");

    expect(cardSymbols(app)).toEqual(["up"]);
    expect(app.cards[0].warning).toBe(false);
    expect(app.cards[0].confidence).toBeGreaterThan(0.5);
    const trayCard = app.root.querySelector<HTMLElement>("[data-role=tray] .card")!;
    expect(trayCard.textContent).toContain("up");

    await runAndFinish(app);
    const run = app.lastRun!;
    expect(run.status).toBe("completed");
    expect(run.trajectory).toHaveLength(2);

    // one lattice step east of the start node
    const pose = app.playback!.pose;
    expect(pose.x).toBeCloseTo(110, 6);
    expect(pose.y).toBeCloseTo(0, 6);

    // energy decreased exactly as the simulate response says
    const served = run.trajectory[run.trajectory.length - 1].energy;
    expect(served).toBeLessThan(run.trajectory[0].energy);
    expect(app.playback!.energy).toBe(served);
    const label = app.root.querySelector("[data-role=energy-label]")!.textContent!;
    expect(label).toContain(served.toFixed(1));

    const badge = app.root.querySelector<HTMLElement>("[data-role=status-badge]")!;
    expect(badge.textContent).toBe("Completed");
  });

  it("energy bar is non-increasing during a playback", async () => {
    drawStrokes(app, UP_STROKES);
    click(app, "submit-add");
    await waitFor(() => app.cards.length === 1, "one card");
    click(app, "run");
    await waitFor(() => app.playback !== null, "playback");

    const fill = app.root.querySelector<HTMLElement>("[data-role=energy-fill]")!;
    let last = parseFloat(fill.style.width);
    while (!app.playback!.done) {
      app.advance(40);
      const now = parseFloat(fill.style.width);
      expect(now).toBeLessThanOrEqual(last + 1e-9);
      last = now;
    }
  });

  it("reordering the cards changes the executed trajectory", async () => {
    drawStrokes(app, UP_STROKES);
    click(app, "submit-add");
    await waitFor(() => app.cards.length === 1, "first card");
    drawStrokes(app, ROTATE_LEFT_STROKES);
    click(app, "submit-add");
    await waitFor(() => app.cards.length === 2, "second card");
    expect(cardSymbols(app)).toEqual(["up", "rotate_left"]);

    await runAndFinish(app);
    const straight = app.lastRun!;
    expect(straight.status).toBe("completed");
    expect(straight.final_pose.x_mm).toBeCloseTo(110);
    expect(straight.final_pose.y_mm).toBeCloseTo(0);

    // move the rotation first: same cards, different program, new trajectory
    app.root
      .querySelectorAll<HTMLButtonElement>("[data-role=tray] .card button[data-action=move][title='move earlier']")
      .item(1)
      .click();
    expect(cardSymbols(app)).toEqual(["rotate_left", "up"]);

    await runAndFinish(app);
    const diagonal = app.lastRun!;
    expect(diagonal.status).toBe("completed");
    expect(diagonal.final_pose.x_mm).toBeCloseTo(110);
    expect(diagonal.final_pose.y_mm).toBeCloseTo(110); // went up the diagonal instead
    expect(diagonal.trajectory[diagonal.trajectory.length - 1].energy).toBeLessThan(
      straight.trajectory[straight.trajectory.length - 1].energy,
    );
  });

  it("editing cards: delete disables run, duplicate lengthens the program", async () => {
    drawStrokes(app, UP_STROKES);
    click(app, "submit-add");
    await waitFor(() => app.cards.length === 1, "card");

    const runBtn = app.root.querySelector<HTMLButtonElement>("[data-role=run]")!;
    expect(runBtn.disabled).toBe(false);

    app.root.querySelector<HTMLButtonElement>(".card button[title='duplicate']")!.click();
    expect(cardSymbols(app)).toEqual(["up", "up"]);

    app.root.querySelector<HTMLButtonElement>(".card button[title='delete']")!.click();
    app.root.querySelector<HTMLButtonElement>(".card button[title='delete']")!.click();
    expect(app.cards).toHaveLength(0);
    expect(runBtn.disabled).toBe(true);
  });

  it("blank submission surfaces the server's no-symbols error inline", async () => {
    const status = app.root.querySelector<HTMLElement>("[data-role=draw-status]")!;
    expect(app.raster.isBlank()).toBe(true);
    click(app, "submit-add");
    await waitFor(() => (status.textContent ?? "").length > 0, "inline error");
    expect(status.textContent).toContain("No symbols found");
    expect(app.cards).toHaveLength(0);
  });

  it("server-down requests leave the tray unchanged", async () => {
    const dead = await initAppSafely();
    drawStrokes(dead, UP_STROKES);
    click(dead, "submit-add");
    const status = dead.root.querySelector<HTMLElement>("[data-role=draw-status]")!;
    await waitFor(() => (status.textContent ?? "").length > 0, "network error");
    expect(dead.cards).toHaveLength(0);
  });
});

async function initAppSafely(): Promise<App> {
  document.body.innerHTML = "<div id='dead'></div>";
  // port 1 refuses connections immediately
  return initApp(document.getElementById("dead")!, new Client("http://127.0.0.1:1"));
}
