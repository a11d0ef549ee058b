// Playback math: interpolate the robot pose along a simulated trajectory.
// Position legs with a heading change render as curves (quadratic segment
// through the tangent-ray intersection); the energy bar always shows the
// energy of the last trajectory entry reached, so it steps monotonically.

import type { PoseDoc, TrajectoryEntry } from "./api";

export interface Pose {
  x: number;
  y: number;
  heading: number;
}

const RAD = Math.PI / 180;

function fromDoc(p: PoseDoc): Pose {
  return { x: p.x_mm, y: p.y_mm, heading: p.heading_deg };
}

function shortestTurn(from: number, to: number): number {
  let d = (to - from) % 360;
  if (d > 180) d -= 360;
  if (d < -180) d += 360;
  return d;
}

export interface CurveControls {
  c1: { x: number; y: number };
  c2: { x: number; y: number };
}

/** Cubic Hermite controls: leave `a` along its own heading, arrive at `b`
 * along that pose's heading, so turning legs render as smooth bows. */
export function hermiteControls(a: Pose, b: Pose): CurveControls {
  const k = Math.hypot(b.x - a.x, b.y - a.y) / 3;
  return {
    c1: { x: a.x + k * Math.cos(a.heading * RAD), y: a.y + k * Math.sin(a.heading * RAD) },
    c2: { x: b.x - k * Math.cos(b.heading * RAD), y: b.y - k * Math.sin(b.heading * RAD) },
  };
}

export interface Leg {
  from: Pose;
  to: Pose;
  control: CurveControls | null; // curved when set
  length: number; // mm of travel (0 for pure rotations)
  endEnergy: number;
  commandIndex: number;
}

export function legsOf(trajectory: TrajectoryEntry[]): Leg[] {
  const legs: Leg[] = [];
  for (let i = 1; i < trajectory.length; i++) {
    const from = fromDoc(trajectory[i - 1].pose);
    const to = fromDoc(trajectory[i].pose);
    const moved = Math.hypot(to.x - from.x, to.y - from.y);
    const turned = Math.abs(shortestTurn(from.heading, to.heading)) > 1e-9;
    const control = moved > 1e-9 && turned ? hermiteControls(from, to) : null;
    legs.push({
      from,
      to,
      control,
      length: moved,
      endEnergy: trajectory[i].energy,
      commandIndex: trajectory[i].command_index,
    });
  }
  return legs;
}

export function posAlongLeg(leg: Leg, t: number): { x: number; y: number } {
  const { from, to, control } = leg;
  if (control) {
    const u = 1 - t;
    const { c1, c2 } = control;
    return {
      x: u * u * u * from.x + 3 * u * u * t * c1.x + 3 * u * t * t * c2.x + t * t * t * to.x,
      y: u * u * u * from.y + 3 * u * u * t * c1.y + 3 * u * t * t * c2.y + t * t * t * to.y,
    };
  }
  return { x: from.x + (to.x - from.x) * t, y: from.y + (to.y - from.y) * t };
}

export const SPEED_MM_PER_MS = 110 / 600; // one lattice step per 600 ms
export const ROTATION_MS = 300;

export class Playback {
  private legs: Leg[];
  private legIndex = 0;
  private legElapsedMs = 0;
  readonly startEnergy: number;

  constructor(trajectory: TrajectoryEntry[]) {
    this.legs = legsOf(trajectory);
    this.startEnergy = trajectory[0]?.energy ?? 0;
    this.initial = trajectory.length ? fromDoc(trajectory[0].pose) : { x: 0, y: 0, heading: 0 };
  }

  private initial: Pose;

  private legDuration(leg: Leg): number {
    return leg.length > 1e-9 ? leg.length / SPEED_MM_PER_MS : ROTATION_MS;
  }

  get done(): boolean {
    return this.legIndex >= this.legs.length;
  }

  /** Index of the last trajectory entry fully reached (0 = start pose). */
  get cursor(): number {
    return this.legIndex;
  }

  get energy(): number {
    return this.legIndex === 0 ? this.startEnergy : this.legs[this.legIndex - 1].endEnergy;
  }

  get pose(): Pose {
    if (this.legs.length === 0) return this.initial;
    if (this.done) return this.legs[this.legs.length - 1].to;
    const leg = this.legs[this.legIndex];
    const t = Math.min(1, this.legElapsedMs / this.legDuration(leg));
    const pos = posAlongLeg(leg, t);
    const heading = leg.from.heading + shortestTurn(leg.from.heading, leg.to.heading) * t;
    return { x: pos.x, y: pos.y, heading };
  }

  advance(dtMs: number): void {
    let rest = dtMs;
    while (rest > 0 && !this.done) {
      const leg = this.legs[this.legIndex];
      const duration = this.legDuration(leg);
      const remaining = duration - this.legElapsedMs;
      if (rest >= remaining) {
        rest -= remaining;
        this.legIndex += 1;
        this.legElapsedMs = 0;
      } else {
        this.legElapsedMs += rest;
        rest = 0;
      }
    }
  }

  /** Waypoints already passed, for trail rendering. */
  passedPoints(): { x: number; y: number }[] {
    const pts = [{ x: this.initial.x, y: this.initial.y }];
    for (let i = 0; i < this.legIndex; i++) pts.push({ x: this.legs[i].to.x, y: this.legs[i].to.y });
    return pts;
  }
}
