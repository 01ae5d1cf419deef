/** DOM wiring for the mask editor page. */

import { ServiceClient } from "./api.js";
import { Debouncer, EditorSession } from "./editor.js";
import { Point } from "./labelGrid.js";
import { BrushLabel, Label, LABEL_COLORS, LABEL_NAMES } from "./labels.js";

const DEFAULT_SERVICE_URL = "http://127.0.0.1:8000";
const LIVE_DEBOUNCE_MS = 300;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function main(): void {
  const canvas = el<HTMLCanvasElement>("mask-canvas");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("2d canvas unsupported");

  const banner = el<HTMLDivElement>("banner");
  const modelSelect = el<HTMLSelectElement>("model-select");
  const submitButton = el<HTMLButtonElement>("submit");
  const undoButton = el<HTMLButtonElement>("undo");
  const redoButton = el<HTMLButtonElement>("redo");
  const clearButton = el<HTMLButtonElement>("clear");
  const liveToggle = el<HTMLInputElement>("live-mode");
  const radiusInput = el<HTMLInputElement>("brush-radius");
  const radiusReadout = el<HTMLSpanElement>("radius-readout");
  const urlInput = el<HTMLInputElement>("service-url");
  const reloadButton = el<HTMLButtonElement>("reload-models");
  const resultImage = el<HTMLImageElement>("result-image");
  const latencyReadout = el<HTMLSpanElement>("latency");
  const brushButtons = Array.from(document.querySelectorAll<HTMLButtonElement>("button[data-label]"));

  const showError = (message: string) => {
    banner.textContent = message;
    banner.classList.add("visible");
  };
  const clearError = () => banner.classList.remove("visible");

  const session = new EditorSession(new ServiceClient(DEFAULT_SERVICE_URL), {
    onResponse: (response) => {
      clearError();
      resultImage.src = `data:image/png;base64,${response.imagePngB64}`;
      latencyReadout.textContent = `${response.latencyMs.toFixed(1)} ms (${response.checkpoint})`;
    },
    onError: showError,
    onBusy: (busy) => submitButton.classList.toggle("busy", busy),
  });
  urlInput.value = DEFAULT_SERVICE_URL;

  canvas.width = session.grid.size;
  canvas.height = session.grid.size;

  const redraw = () => {
    const size = session.grid.size;
    const values = session.grid.values();
    const imageData = ctx.createImageData(size, size);
    for (let i = 0; i < values.length; i++) {
      const [r, g, b, a] = LABEL_COLORS[values[i] as Label];
      imageData.data[i * 4] = r;
      imageData.data[i * 4 + 1] = g;
      imageData.data[i * 4 + 2] = b;
      imageData.data[i * 4 + 3] = a;
    }
    ctx.putImageData(imageData, 0, 0);
  };

  const refreshBrushGating = () => {
    const allowed = session.activeBrushes();
    for (const button of brushButtons) {
      const label = Number(button.dataset.label) as Label;
      const usable = label === 0 || allowed.includes(label as BrushLabel);
      button.disabled = !usable;
      button.classList.toggle(
        "active",
        usable && (label === eraseSelected() ? eraserActive : label === session.activeLabel && !eraserActive),
      );
    }
    submitButton.disabled = !session.canSubmit;
  };

  let eraserActive = false;
  const eraseSelected = () => 0;

  const refreshModels = () => {
    modelSelect.innerHTML = "";
    for (const model of session.models) {
      const option = document.createElement("option");
      option.value = model.checkpoint;
      option.textContent = `${model.checkpoint} (${model.condition_name}: ${model.condition_labels
        .map((l) => LABEL_NAMES[l as Label])
        .join(", ")})`;
      modelSelect.appendChild(option);
    }
    if (session.selectedModel) modelSelect.value = session.selectedModel.checkpoint;
    refreshBrushGating();
  };

  const loadModels = async () => {
    session.setClient(new ServiceClient(urlInput.value.replace(/\/+$/, "")));
    try {
      await session.loadModels();
      clearError();
    } catch {
      // banner already shows the failure; keep the editor usable
    }
    refreshModels();
  };

  const liveSubmit = new Debouncer(LIVE_DEBOUNCE_MS, () => void session.submit());

  // --- painting -----------------------------------------------------------
  let stroking = false;
  let lastPoint: Point | null = null;

  const canvasPoint = (event: PointerEvent): Point => {
    const rect = canvas.getBoundingClientRect();
    return {
      x: ((event.clientX - rect.left) / rect.width) * session.grid.size,
      y: ((event.clientY - rect.top) / rect.height) * session.grid.size,
    };
  };

  const strokeLabel = (): Label => (eraserActive ? 0 : session.activeLabel);

  canvas.addEventListener("pointerdown", (event) => {
    canvas.setPointerCapture(event.pointerId);
    stroking = true;
    lastPoint = canvasPoint(event);
    session.grid.beginStroke();
    session.grid.stamp(lastPoint, strokeLabel(), session.brushRadius);
    redraw();
  });

  canvas.addEventListener("pointermove", (event) => {
    if (!stroking || !lastPoint) return;
    const point = canvasPoint(event);
    session.grid.stampSegment(lastPoint, point, strokeLabel(), session.brushRadius);
    lastPoint = point;
    redraw();
  });

  const finishStroke = () => {
    if (!stroking) return;
    stroking = false;
    lastPoint = null;
    session.grid.endStroke();
    redraw();
    if (liveToggle.checked) liveSubmit.poke();
  };
  canvas.addEventListener("pointerup", finishStroke);
  canvas.addEventListener("pointercancel", finishStroke);

  // --- controls -----------------------------------------------------------
  for (const button of brushButtons) {
    button.addEventListener("click", () => {
      const label = Number(button.dataset.label) as Label;
      if (label === 0) {
        eraserActive = true;
      } else {
        eraserActive = false;
        session.activeLabel = label as BrushLabel;
      }
      refreshBrushGating();
    });
  }

  radiusInput.addEventListener("input", () => {
    session.brushRadius = Number(radiusInput.value);
    radiusReadout.textContent = radiusInput.value;
  });

  modelSelect.addEventListener("change", () => {
    session.selectModel(modelSelect.value);
    refreshBrushGating();
  });

  submitButton.addEventListener("click", () => void session.submit());
  undoButton.addEventListener("click", () => {
    session.grid.undo();
    redraw();
    if (liveToggle.checked) liveSubmit.poke();
  });
  redoButton.addEventListener("click", () => {
    session.grid.redo();
    redraw();
    if (liveToggle.checked) liveSubmit.poke();
  });
  clearButton.addEventListener("click", () => {
    session.grid.clear();
    redraw();
  });
  reloadButton.addEventListener("click", () => void loadModels());

  redraw();
  refreshBrushGating();
  void loadModels();
}

main();
