/**
 * Thin buffer-in/buffer-out client for the calf HTTP service.
 *
 * The service is the single implementation of the numerics; this shim
 * moves Float64Array buffers across the JSON boundary without loss
 * (both sides emit shortest round-trip decimal for IEEE-754 doubles),
 * so results agree with the core bit for bit.
 */

import {
  CALF_ABI_VERSION,
  CalfFailure,
  FailureCode,
  LossOk,
  LossOptions,
  MomentsOk,
  Shape,
} from "./types.js";

const API_PREFIX = "/api/v1";
const DEFAULT_BASE_URL = process.env.CALF_SERVER ?? "http://127.0.0.1:8077";

const CODE_BY_KIND: Record<string, FailureCode> = { usage: 1, data: 2, numeric: 3 };

type Json = Record<string, unknown>;

function failure(code: FailureCode, message: string): CalfFailure {
  return { code, message };
}

export class CalfClient {
  constructor(readonly baseUrl: string = DEFAULT_BASE_URL) {}

  private async request(
    method: string,
    path: string,
    body?: Json,
  ): Promise<Json | CalfFailure> {
    const resp = await fetch(this.baseUrl + API_PREFIX + path, {
      method,
      headers: { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = (await resp.json()) as Json;
    if (resp.ok) {
      return payload;
    }
    const err = payload.error as { kind?: string; message?: string } | undefined;
    if (err?.message !== undefined) {
      return failure(CODE_BY_KIND[err.kind ?? ""] ?? 3, err.message);
    }
    // request-validation errors arrive as a FastAPI detail list
    return failure(1, JSON.stringify(payload.detail ?? payload));
  }

  /** ABI version of the connected service (this client speaks 1). */
  async abiVersion(): Promise<number> {
    const resp = await this.request("GET", "/version");
    if ("abi_version" in resp) {
      return resp.abi_version as number;
    }
    throw new Error(`cannot read service version: ${(resp as CalfFailure).message}`);
  }

  /** Population moments of an area buffer. */
  async computeMoments(areas: Float64Array): Promise<MomentsOk | CalfFailure> {
    if (areas.length === 0) {
      return failure(2, "empty area sample");
    }
    const resp = await this.request("POST", "/moments", { areas: Array.from(areas) });
    if ("mean" in resp) {
      return {
        code: 0,
        n: resp.n as number,
        mean: resp.mean as number,
        std: resp.std as number,
        skewness: resp.skewness as number,
        kurtosisExcess: resp.kurtosis_excess as number,
      };
    }
    return resp as CalfFailure;
  }

  /**
   * Loss value (and optionally the per-pixel gradient) of `kind` for a
   * probability buffer against a binary mask buffer, both row-major
   * over the given shape.
   */
  async loss(
    kind: string,
    p: Float64Array,
    y: Float64Array,
    shape: Shape,
    options: LossOptions = {},
  ): Promise<LossOk | CalfFailure> {
    const size = shape.width * shape.height;
    if (size <= 0) {
      return failure(2, "shape must have positive width and height");
    }
    if (p.length !== size || y.length !== size) {
      return failure(
        2,
        `buffer length mismatch: expected ${size} values (got p=${p.length}, y=${y.length})`,
      );
    }
    if (options.gradientOut !== undefined) {
      if (options.gradientOut.length !== size) {
        return failure(2, `gradient output buffer must have length ${size}`);
      }
      if (options.gradientOut === p || options.gradientOut === y) {
        return failure(2, "gradient output buffer must not alias an input buffer");
      }
    }
    const wantGradient = options.wantGradient ?? options.gradientOut !== undefined;
    const body: Json = {
      kind,
      width: shape.width,
      height: shape.height,
      p: Array.from(p),
      y: Array.from(y),
      want_gradient: wantGradient,
    };
    if (options.eps !== undefined) {
      body.config = { clamp_eps: options.eps };
    }
    const resp = await this.request("POST", "/loss", body);
    if (!("value" in resp)) {
      return resp as CalfFailure;
    }
    let gradient: Float64Array | null = null;
    if (wantGradient) {
      const raw = resp.gradient as number[];
      gradient = options.gradientOut ?? new Float64Array(size);
      gradient.set(raw);
    }
    return { code: 0, kind: resp.kind as string, value: resp.value as number, gradient };
  }
}

const defaultClient = new CalfClient();

/** ABI version negotiated with the service; 1 for this contract. */
export function calf_abi_version(client: CalfClient = defaultClient): Promise<number> {
  return client.abiVersion();
}

export function calf_compute_moments(
  areas: Float64Array,
  client: CalfClient = defaultClient,
): Promise<MomentsOk | CalfFailure> {
  return client.computeMoments(areas);
}

export function calf_loss(
  kind: string,
  p: Float64Array,
  y: Float64Array,
  shape: Shape,
  options: LossOptions = {},
  client: CalfClient = defaultClient,
): Promise<LossOk | CalfFailure> {
  return client.loss(kind, p, y, shape, options);
}

export { CALF_ABI_VERSION };
