/**
 * Editor orchestration: holds the label grid, the selected model and the
 * last response, and funnels submissions so at most one generate request
 * is in flight. When strokes outpace the service the newest canvas wins
 * and stale responses are dropped.
 */

import { GenerateResult, ModelInfo, ServiceClient } from "./api.js";
import { allowedBrushes, LabelGrid } from "./labelGrid.js";
import { BrushLabel } from "./labels.js";
import { bytesToBase64, encodeGrayPng } from "./png.js";

export interface DisplayedResponse {
  imagePngB64: string;
  latencyMs: number;
  checkpoint: string;
}

export interface EditorEvents {
  onResponse?: (response: DisplayedResponse) => void;
  onError?: (message: string) => void;
  onModels?: (models: ModelInfo[]) => void;
  onBusy?: (busy: boolean) => void;
}

export class EditorSession {
  readonly grid: LabelGrid;
  activeLabel: BrushLabel = 1;
  brushRadius = 8;
  models: ModelInfo[] = [];
  selectedModel: ModelInfo | null = null;
  lastResponse: DisplayedResponse | null = null;

  private requestSeq = 0;
  private inFlight = false;
  private resubmitQueued = false;

  constructor(
    private client: ServiceClient,
    private events: EditorEvents = {},
    gridSize = 256,
  ) {
    this.grid = new LabelGrid(gridSize);
  }

  setClient(client: ServiceClient): void {
    this.client = client;
  }

  async loadModels(): Promise<ModelInfo[]> {
    try {
      this.models = await this.client.listModels();
    } catch (err) {
      this.events.onError?.(String(err instanceof Error ? err.message : err));
      throw err;
    }
    if (!this.models.find((m) => m.checkpoint === this.selectedModel?.checkpoint)) {
      this.selectedModel = this.models[0] ?? null;
    }
    this.events.onModels?.(this.models);
    return this.models;
  }

  selectModel(checkpoint: string): void {
    const model = this.models.find((m) => m.checkpoint === checkpoint);
    if (!model) throw new Error(`unknown model ${checkpoint}`);
    this.selectedModel = model;
    // keep the active brush inside the model's condition set
    const brushes = this.activeBrushes();
    if (brushes.length > 0 && !brushes.includes(this.activeLabel)) {
      this.activeLabel = brushes[0];
    }
  }

  /** Brushes the selected model can see; others should be greyed out. */
  activeBrushes(): BrushLabel[] {
    if (!this.selectedModel) return [];
    return allowedBrushes(this.selectedModel.condition_labels);
  }

  get canSubmit(): boolean {
    return this.selectedModel !== null;
  }

  async encodeCanvas(): Promise<string> {
    const png = await encodeGrayPng(this.grid.values(), this.grid.size, this.grid.size);
    return bytesToBase64(png);
  }

  /**
   * Send the current canvas. Queues instead of piling up when a request
   * is already running; only the newest response is ever displayed.
   */
  async submit(): Promise<DisplayedResponse | null> {
    if (!this.selectedModel) {
      this.events.onError?.("no model selected");
      return null;
    }
    if (this.inFlight) {
      this.resubmitQueued = true;
      return null;
    }
    const seq = ++this.requestSeq;
    this.inFlight = true;
    this.events.onBusy?.(true);
    let result: GenerateResult;
    try {
      result = await this.client.generate(this.selectedModel.checkpoint, await this.encodeCanvas());
    } catch (err) {
      this.events.onError?.(String(err instanceof Error ? err.message : err));
      return null;
    } finally {
      this.inFlight = false;
      this.events.onBusy?.(false);
      if (this.resubmitQueued) {
        this.resubmitQueued = false;
        void this.submit();
      }
    }
    if (seq !== this.requestSeq) return null; // a newer request superseded this one
    this.lastResponse = {
      imagePngB64: result.image_png_b64,
      latencyMs: result.latency_ms,
      checkpoint: result.checkpoint,
    };
    this.events.onResponse?.(this.lastResponse);
    return this.lastResponse;
  }
}

/** Debouncer for live mode: auto-submit shortly after the last stroke. */
export class Debouncer {
  private handle: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly delayMs: number,
    private readonly action: () => void,
  ) {}

  poke(): void {
    if (this.handle !== null) clearTimeout(this.handle);
    this.handle = setTimeout(() => {
      this.handle = null;
      this.action();
    }, this.delayMs);
  }

  cancel(): void {
    if (this.handle !== null) clearTimeout(this.handle);
    this.handle = null;
  }
}
