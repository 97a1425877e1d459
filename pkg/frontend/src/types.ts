/** Stable ABI version of the wire contract this client implements. */
export const CALF_ABI_VERSION = 1;

/**
 * Domain failures are reported as (code, message) pairs instead of
 * exceptions, so host training loops can decide how to surface them.
 * Codes mirror the service error kinds: 1 usage, 2 data, 3 numeric.
 */
export type FailureCode = 1 | 2 | 3;

export interface CalfFailure {
  code: FailureCode;
  message: string;
}

export interface MomentsOk {
  code: 0;
  n: number;
  mean: number;
  std: number;
  skewness: number;
  kurtosisExcess: number;
}

export interface LossOk {
  code: 0;
  kind: string;
  value: number;
  /** Present when a gradient was requested; same length as the inputs. */
  gradient: Float64Array | null;
}

export interface Shape {
  width: number;
  height: number;
}

export interface LossOptions {
  /** Probability clamp bound (service default 1e-7). */
  eps?: number;
  wantGradient?: boolean;
  /**
   * Caller-provided output buffer for the gradient. Must have length
   * width*height and must not alias the inputs; the client never
   * writes anywhere else.
   */
  gradientOut?: Float64Array;
}

export function isFailure(result: { code: number }): result is CalfFailure {
  return result.code !== 0;
}
