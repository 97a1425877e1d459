export {
  CalfClient,
  CALF_ABI_VERSION,
  calf_abi_version,
  calf_compute_moments,
  calf_loss,
} from "./client.js";
export type {
  CalfFailure,
  FailureCode,
  LossOk,
  LossOptions,
  MomentsOk,
  Shape,
} from "./types.js";
export { isFailure } from "./types.js";
