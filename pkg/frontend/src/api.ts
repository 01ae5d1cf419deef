/** Client for the inference HTTP API. */

export interface ModelInfo {
  checkpoint: string;
  condition_name: string;
  condition_labels: number[];
  input_size: number;
}

export interface GenerateResult {
  image_png_b64: string;
  latency_ms: number;
  checkpoint: string;
  condition_name: string;
}

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (err) {
    throw new ApiError(`service unreachable: ${err}`, 0);
  }
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    throw new ApiError(body.error ?? `HTTP ${response.status}`, response.status);
  }
  return body as T;
}

export class ServiceClient {
  constructor(readonly baseUrl: string) {}

  health(): Promise<{ status: string; models: number }> {
    return request(`${this.baseUrl}/health`);
  }

  listModels(): Promise<ModelInfo[]> {
    return request(`${this.baseUrl}/models`);
  }

  generate(checkpoint: string, maskPngB64: string): Promise<GenerateResult> {
    return request(`${this.baseUrl}/generate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ checkpoint, mask_png_b64: maskPngB64 }),
    });
  }
}
