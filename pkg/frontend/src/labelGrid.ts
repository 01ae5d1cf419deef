/**
 * Canvas-independent mask editing state: a 256x256 grid of labels with
 * brush painting and a bounded undo stack. All mutation goes through
 * strokes so every grid value stays inside the label alphabet.
 */

import { BrushLabel, Label, isLabel } from "./labels.js";

export const CANVAS_SIZE = 256;
export const MAX_UNDO_DEPTH = 32;

export interface Point {
  x: number;
  y: number;
}

export class LabelGrid {
  readonly size: number;
  private grid: Uint8Array;
  private undoStack: Uint8Array[] = [];
  private redoStack: Uint8Array[] = [];
  private strokeOpen = false;

  constructor(size: number = CANVAS_SIZE) {
    this.size = size;
    this.grid = new Uint8Array(size * size);
  }

  get(x: number, y: number): Label {
    const v = this.grid[y * this.size + x];
    if (!isLabel(v)) throw new Error(`grid corrupted at (${x},${y}): ${v}`);
    return v;
  }

  /** Read-only view of the raw grid (row-major, values 0-3). */
  values(): Uint8Array {
    return this.grid;
  }

  snapshot(): Uint8Array {
    return this.grid.slice();
  }

  restore(values: Uint8Array): void {
    if (values.length !== this.grid.length) throw new Error("snapshot size mismatch");
    for (const v of values) {
      if (!isLabel(v)) throw new Error(`snapshot contains non-label value ${v}`);
    }
    this.grid = values.slice();
  }

  get undoDepth(): number {
    return this.undoStack.length;
  }

  get redoDepth(): number {
    return this.redoStack.length;
  }

  /**
   * Start a stroke: push the current canvas onto the undo stack (bounded;
   * oldest snapshots fall off). Re-entrant calls while a stroke is open
   * do not push again.
   */
  beginStroke(): void {
    if (this.strokeOpen) return;
    this.undoStack.push(this.snapshot());
    if (this.undoStack.length > MAX_UNDO_DEPTH) this.undoStack.shift();
    this.redoStack.length = 0; // a new edit invalidates the redo branch
    this.strokeOpen = true;
  }

  /** Stamp a disk of the given label; out-of-bounds pixels are clipped. */
  stamp(center: Point, label: Label, radius: number): void {
    const r = Math.max(0, radius);
    const r2 = r * r;
    const cx = Math.round(center.x);
    const cy = Math.round(center.y);
    const lo = Math.floor(-r);
    const hi = Math.ceil(r);
    for (let dy = lo; dy <= hi; dy++) {
      const y = cy + dy;
      if (y < 0 || y >= this.size) continue;
      for (let dx = lo; dx <= hi; dx++) {
        const x = cx + dx;
        if (x < 0 || x >= this.size) continue;
        if (dx * dx + dy * dy <= r2) this.grid[y * this.size + x] = label;
      }
    }
  }

  /** Paint along a segment, stamping at sub-pixel spacing so strokes are continuous. */
  stampSegment(from: Point, to: Point, label: Label, radius: number): void {
    const steps = Math.max(1, Math.ceil(Math.hypot(to.x - from.x, to.y - from.y)));
    for (let i = 0; i <= steps; i++) {
      const t = i / steps;
      this.stamp({ x: from.x + (to.x - from.x) * t, y: from.y + (to.y - from.y) * t }, label, radius);
    }
  }

  endStroke(): void {
    this.strokeOpen = false;
  }

  /**
   * One-shot stroke: all pixels within `radius` of the polyline are set
   * to `label` (label 0 erases); the previous canvas is pushed for undo.
   */
  paint(points: Point[], label: Label, radius: number): void {
    if (points.length === 0) return;
    this.beginStroke();
    this.stamp(points[0], label, radius);
    for (let i = 1; i < points.length; i++) {
      this.stampSegment(points[i - 1], points[i], label, radius);
    }
    this.endStroke();
  }

  /** Revert to the snapshot taken at the last beginStroke/paint/clear. */
  undo(): boolean {
    const prev = this.undoStack.pop();
    if (!prev) return false;
    this.redoStack.push(this.grid);
    this.grid = prev;
    this.strokeOpen = false;
    return true;
  }

  /** Reapply the last undone edit. */
  redo(): boolean {
    const next = this.redoStack.pop();
    if (!next) return false;
    this.undoStack.push(this.grid);
    if (this.undoStack.length > MAX_UNDO_DEPTH) this.undoStack.shift();
    this.grid = next;
    return true;
  }

  clear(): void {
    this.beginStroke();
    this.grid.fill(0);
    this.endStroke();
  }

  isEmpty(): boolean {
    return this.grid.every((v) => v === 0);
  }
}

/** Labels a model accepts as input; brushes outside this set should be disabled. */
export function allowedBrushes(conditionLabels: number[]): BrushLabel[] {
  return ([1, 2, 3] as BrushLabel[]).filter((label) => conditionLabels.includes(label));
}
