// App wiring: draw panel -> card tray -> run view. All state that matters
// comes from server responses (classification + simulation), so a refresh
// loses nothing but the pixels on the scratch canvas.

import { ApiFault, Client, type MapDoc, type SimResult } from "./api";
import { Playback } from "./geometry";
import { MapView } from "./mapView";
import { RASTER_SIZE, StrokeRaster } from "./raster";
import {
  type Card,
  canRun,
  cardsFromResponse,
  duplicateCard,
  glyphFor,
  moveCard,
  programOf,
  removeCard,
} from "./state";

export interface App {
  readonly root: HTMLElement;
  readonly raster: StrokeRaster;
  readonly map: MapDoc | null;
  readonly cards: Card[];
  readonly playback: Playback | null;
  readonly lastRun: SimResult | null;
  readonly busy: boolean;
  setCards(cards: Card[]): void;
  submit(mode: "add" | "replace"): Promise<void>;
  run(): Promise<void>;
  clearCanvas(): void;
  advance(dtMs: number): void; // manual animation step (used when rAF is absent)
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

const STATUS_LABELS: Record<string, string> = {
  completed: "Completed",
  energy_exhausted: "Energy exhausted",
  off_map: "Off the map",
};

function messageOf(err: unknown): string {
  if (err instanceof ApiFault) {
    if (err.code === "no_symbols") return "No symbols found on the canvas.";
    return `${err.code}: ${err.message}`;
  }
  return err instanceof Error ? err.message : String(err);
}

export async function initApp(root: HTMLElement, client: Client = new Client()): Promise<App> {
  const raster = new StrokeRaster();
  let cards: Card[] = [];
  let playback: Playback | null = null;
  let lastRun: SimResult | null = null;
  let busy = false;

  root.innerHTML = "";
  const layout = el("div", "layout");
  root.append(layout);

  // --- draw panel ---
  const drawPanel = el("section", "panel");
  drawPanel.append(el("h2", undefined, "1. Draw an arrow"));
  const canvas = el("canvas", "draw-canvas");
  canvas.width = RASTER_SIZE;
  canvas.height = RASTER_SIZE;
  const drawStatus = el("p", "status");
  drawStatus.dataset.role = "draw-status";
  const addBtn = el("button", undefined, "Add to program");
  addBtn.dataset.role = "submit-add";
  const replaceBtn = el("button", undefined, "Replace program");
  replaceBtn.dataset.role = "submit-replace";
  const clearBtn = el("button", undefined, "Clear");
  clearBtn.dataset.role = "clear-canvas";
  const drawButtons = el("div", "buttons");
  drawButtons.append(addBtn, replaceBtn, clearBtn);
  drawPanel.append(
    canvas,
    drawButtons,
    el("p", "hint", "Draw one symbol and add it as a card, or draw a whole row and replace the program."),
    drawStatus,
  );

  // --- tray panel ---
  const trayPanel = el("section", "panel");
  trayPanel.append(el("h2", undefined, "2. Arrange the cards"));
  const tray = el("div", "tray");
  tray.dataset.role = "tray";
  trayPanel.append(tray, el("p", "hint", "Cards run in order. Faded cards were too uncertain; redraw them."));

  // --- run panel ---
  const runPanel = el("section", "panel");
  runPanel.append(el("h2", undefined, "3. Run on the playground"));
  const mapCanvas = el("canvas", "map-canvas");
  mapCanvas.width = 440;
  mapCanvas.height = 440;
  const runBtn = el("button", undefined, "Run program");
  runBtn.dataset.role = "run";
  const badge = el("span", "badge");
  badge.dataset.role = "status-badge";
  const energyWrap = el("div", "energy");
  const energyFill = el("div", "energy-fill");
  energyFill.dataset.role = "energy-fill";
  energyWrap.append(energyFill);
  const energyLabel = el("span", "energy-label");
  energyLabel.dataset.role = "energy-label";
  const runStatus = el("p", "status");
  runStatus.dataset.role = "run-status";
  const runRow = el("div", "buttons");
  runRow.append(runBtn, badge);
  runPanel.append(mapCanvas, runRow, energyWrap, energyLabel, runStatus);

  layout.append(drawPanel, trayPanel, runPanel);

  // --- stroke capture ---
  const ctx = canvas.getContext("2d");
  const repaintCanvas = () => {
    if (!ctx) return;
    const image = ctx.createImageData(canvas.width, canvas.height);
    for (let i = 0; i < raster.data.length; i++) {
      const v = raster.data[i];
      image.data[4 * i] = v;
      image.data[4 * i + 1] = v;
      image.data[4 * i + 2] = v;
      image.data[4 * i + 3] = 255;
    }
    ctx.putImageData(image, 0, 0);
  };
  repaintCanvas();

  const toRaster = (ev: MouseEvent): { x: number; y: number } => {
    const rect = canvas.getBoundingClientRect();
    const sx = rect.width > 0 ? canvas.width / rect.width : 1;
    const sy = rect.height > 0 ? canvas.height / rect.height : 1;
    return { x: (ev.clientX - rect.left) * sx, y: (ev.clientY - rect.top) * sy };
  };
  let penDown = false;
  const onDown = (ev: MouseEvent) => {
    penDown = true;
    const p = toRaster(ev);
    raster.beginStroke(p.x, p.y, Date.now());
    repaintCanvas();
  };
  const onMove = (ev: MouseEvent) => {
    if (!penDown) return;
    const p = toRaster(ev);
    raster.extendStroke(p.x, p.y, Date.now());
    repaintCanvas();
  };
  const onUp = () => {
    penDown = false;
    raster.endStroke();
  };
  if (typeof PointerEvent !== "undefined") {
    canvas.addEventListener("pointerdown", onDown);
    canvas.addEventListener("pointermove", onMove);
    window.addEventListener("pointerup", onUp);
  } else {
    canvas.addEventListener("mousedown", onDown);
    canvas.addEventListener("mousemove", onMove);
    window.addEventListener("mouseup", onUp);
  }

  // --- map view ---
  let mapView: MapView | null = null;
  let map: MapDoc | null = null;
  try {
    map = await client.defaultMap();
    mapView = new MapView(mapCanvas, map);
  } catch (err) {
    runStatus.textContent = `Could not load the playground map: ${messageOf(err)}`;
  }

  const iconsReached = (): Set<string> => {
    const hit = new Set<string>();
    if (!map || !lastRun || !playback?.done || lastRun.status !== "completed") return hit;
    for (const node of map.nodes) {
      if (!node.icon) continue;
      const dx = node.col * map.pitch_mm - lastRun.final_pose.x_mm;
      const dy = node.row * map.pitch_mm - lastRun.final_pose.y_mm;
      if (Math.hypot(dx, dy) <= 1.0) hit.add(node.icon);
    }
    return hit;
  };

  const renderRunView = () => {
    const startEnergy = playback?.startEnergy ?? 100;
    const energy = playback ? playback.energy : startEnergy;
    const ratio = startEnergy > 0 ? Math.max(0, energy / startEnergy) : 0;
    energyFill.style.width = `${(ratio * 100).toFixed(1)}%`;
    energyLabel.textContent = `energy ${energy.toFixed(1)}`;
    if (lastRun && playback?.done) {
      badge.textContent = STATUS_LABELS[lastRun.status] ?? lastRun.status;
      badge.dataset.status = lastRun.status;
    } else if (playback) {
      badge.textContent = "Running…";
      badge.dataset.status = "running";
    } else {
      badge.textContent = "";
      badge.dataset.status = "";
    }
    mapView?.render({
      pose: playback ? playback.pose : null,
      trail: playback ? playback.passedPoints() : [],
      highlightIcons: iconsReached(),
    });
  };

  const renderButtons = () => {
    addBtn.disabled = busy;
    replaceBtn.disabled = busy;
    runBtn.disabled = busy || !canRun(cards);
  };

  const renderTray = () => {
    tray.innerHTML = "";
    cards.forEach((card, index) => {
      const node = el("div", card.warning ? "card warning" : "card");
      node.dataset.symbol = card.symbol;
      node.dataset.warning = String(card.warning);
      const actions: [string, string, () => Card[]][] = [
        ["◀", "move earlier", () => moveCard(cards, index, -1)],
        ["▶", "move later", () => moveCard(cards, index, +1)],
        ["⧉", "duplicate", () => duplicateCard(cards, index)],
        ["✕", "delete", () => removeCard(cards, index)],
      ];
      node.append(
        el("span", "glyph", glyphFor(card.symbol)),
        el("span", "label", card.warning ? `${card.symbol}?` : card.symbol),
        el("span", "confidence", `${Math.round(card.confidence * 100)}%`),
      );
      for (const [text, title, action] of actions) {
        const btn = el("button", "mini", text);
        btn.title = title;
        btn.dataset.action = title.split(" ")[0];
        btn.onclick = () => setCards(action());
        node.append(btn);
      }
      tray.append(node);
    });
    renderButtons();
  };

  const setCards = (next: Card[]) => {
    cards = next;
    renderTray();
  };

  const submit = async (mode: "add" | "replace") => {
    if (busy) return;
    drawStatus.textContent = "";
    busy = true;
    renderButtons();
    try {
      const doc = await client.classify(raster.toPng(), "image/png");
      const recognized = cardsFromResponse(doc);
      setCards(mode === "replace" ? recognized : cards.concat(recognized));
      raster.clear();
      repaintCanvas();
    } catch (err) {
      drawStatus.textContent = messageOf(err);
    } finally {
      busy = false;
      renderButtons();
    }
  };

  // animation loop: rAF when available; tests drive app.advance directly
  let lastTick = 0;
  const hasRaf = typeof requestAnimationFrame === "function";
  const tick = (now: number) => {
    if (!playback) return;
    playback.advance(now - lastTick);
    lastTick = now;
    renderRunView();
    if (!playback.done) requestAnimationFrame(tick);
  };

  const run = async () => {
    if (busy || !canRun(cards)) return;
    busy = true;
    renderButtons();
    runStatus.textContent = "";
    try {
      lastRun = await client.simulate(programOf(cards));
      playback = new Playback(lastRun.trajectory);
      renderRunView();
      if (hasRaf) {
        lastTick = performance.now();
        requestAnimationFrame(tick);
      }
    } catch (err) {
      runStatus.textContent = messageOf(err);
    } finally {
      busy = false;
      renderButtons();
    }
  };

  const clearCanvas = () => {
    raster.clear();
    repaintCanvas();
    drawStatus.textContent = "";
  };

  addBtn.onclick = () => void submit("add");
  replaceBtn.onclick = () => void submit("replace");
  clearBtn.onclick = clearCanvas;
  runBtn.onclick = () => void run();

  renderTray();
  renderRunView();

  return {
    root,
    raster,
    map,
    get cards() {
      return cards;
    },
    get playback() {
      return playback;
    },
    get lastRun() {
      return lastRun;
    },
    get busy() {
      return busy;
    },
    setCards,
    submit,
    run,
    clearCanvas,
    advance(dtMs: number) {
      playback?.advance(dtMs);
      renderRunView();
    },
  };
}
