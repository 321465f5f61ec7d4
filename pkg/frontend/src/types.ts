/** Wire types for the claimlens HTTP API. */

export interface SentenceSpan {
  index: number;
  char_start: number;
  char_end: number;
  token_start: number;
  token_end: number;
}

export interface IngestResponse {
  doc_id: string;
  sentences: SentenceSpan[];
  cached: boolean;
  timings: Record<string, number>;
}

export type Role = "premise" | "contradiction";
export type Direction = "outgoing" | "incoming" | "max_both";
export type PolicyMode = "absolute" | "relative" | "top_m";

export interface Policy {
  mode: PolicyMode;
  params: Record<string, number>;
  direction?: Direction;
}

export interface Annotation {
  index: number;
  role: Role;
  saliency: number;
  nli_confidence: number;
  passed_fusion: boolean;
}

export interface SaliencyStats {
  mean: number;
  std: number;
}

export interface AnalysisResult {
  doc_id: string;
  target: number;
  policy: Required<Policy>;
  stats: SaliencyStats;
  annotations: Annotation[];
  timings: Record<string, number>;
}

export interface SaliencyResponse {
  n: number;
  matrix: number[][];
  stats: SaliencyStats & { included: string };
}

export interface HealthResponse {
  status: string;
  models: Record<string, string>;
  documents: number;
}

export interface ApiErrorBody {
  error: { code: string; stage: string; message: string };
}
