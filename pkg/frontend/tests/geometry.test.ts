import { describe, expect, it } from "vitest";

import type { TrajectoryEntry } from "../src/api";
import { Playback, ROTATION_MS, SPEED_MM_PER_MS, hermiteControls, legsOf, posAlongLeg } from "../src/geometry";

const entry = (x: number, y: number, heading: number, energy: number, index: number): TrajectoryEntry => ({
  pose: { x_mm: x, y_mm: y, heading_deg: heading },
  energy,
  command_index: index,
});

describe("hermiteControls", () => {
  it("leaves along the start heading and arrives along the end heading", () => {
    const { c1, c2 } = hermiteControls({ x: 0, y: 0, heading: 0 }, { x: 110, y: 110, heading: 90 });
    // c1 sits east of the start, c2 south of the end (approach from below)
    expect(c1.y).toBeCloseTo(0, 6);
    expect(c1.x).toBeGreaterThan(0);
    expect(c2.x).toBeCloseTo(110, 6);
    expect(c2.y).toBeLessThan(110);
  });
});

describe("legsOf / posAlongLeg", () => {
  it("straight legs interpolate linearly", () => {
    const legs = legsOf([entry(0, 0, 0, 100, -1), entry(110, 0, 0, 95, 0)]);
    expect(legs).toHaveLength(1);
    expect(legs[0].control).toBeNull();
    const mid = posAlongLeg(legs[0], 0.5);
    expect(mid.x).toBeCloseTo(55);
    expect(mid.y).toBeCloseTo(0);
  });

  it("arc legs curve off the chord and hit both endpoints", () => {
    const legs = legsOf([entry(0, 0, 0, 100, -1), entry(110, 0, 45, 90, 0)]);
    expect(legs[0].control).not.toBeNull();
    const start = posAlongLeg(legs[0], 0);
    const end = posAlongLeg(legs[0], 1);
    expect(start.x).toBeCloseTo(0);
    expect(start.y).toBeCloseTo(0);
    expect(end.x).toBeCloseTo(110);
    expect(end.y).toBeCloseTo(0);
    const mid = posAlongLeg(legs[0], 0.5);
    expect(Math.abs(mid.y)).toBeGreaterThan(1); // it bows off the chord
  });
});

describe("Playback", () => {
  const trajectory = [
    entry(0, 0, 0, 100, -1),
    entry(0, 0, 45, 100, 0), // rotation
    entry(110, 110, 45, 90, 1), // diagonal step
  ];

  it("starts at the initial pose with full energy", () => {
    const p = new Playback(trajectory);
    expect(p.pose).toEqual({ x: 0, y: 0, heading: 0 });
    expect(p.energy).toBe(100);
    expect(p.done).toBe(false);
  });

  it("rotation legs take the fixed rotation time", () => {
    const p = new Playback(trajectory);
    p.advance(ROTATION_MS / 2);
    expect(p.pose.heading).toBeCloseTo(22.5);
    expect(p.energy).toBe(100);
    p.advance(ROTATION_MS / 2);
    expect(p.cursor).toBe(1);
  });

  it("travel speed is one lattice step per 600 ms and energy steps at waypoints", () => {
    const p = new Playback(trajectory);
    p.advance(ROTATION_MS);
    expect(p.energy).toBe(100);
    const legMs = Math.hypot(110, 110) / SPEED_MM_PER_MS;
    p.advance(legMs / 2);
    expect(p.energy).toBe(100); // still in transit
    p.advance(legMs);
    expect(p.done).toBe(true);
    expect(p.energy).toBe(90);
    expect(p.pose).toEqual({ x: 110, y: 110, heading: 45 });
  });

  it("energy is non-increasing over any playback", () => {
    const traj = [
      entry(0, 0, 0, 100, -1),
      entry(110, 0, 0, 93, 0),
      entry(110, 0, 45, 93, 1),
      entry(220, 110, 45, 80, 2),
      entry(220, 110, 90, 80, 3),
    ];
    const p = new Playback(traj);
    let last = p.energy;
    while (!p.done) {
      p.advance(37);
      expect(p.energy).toBeLessThanOrEqual(last);
      last = p.energy;
    }
    expect(p.energy).toBe(80);
  });

  it("empty trajectory finishes immediately", () => {
    const p = new Playback([entry(0, 0, 0, 100, -1)]);
    expect(p.done).toBe(true);
    expect(p.passedPoints()).toEqual([{ x: 0, y: 0 }]);
  });
});
