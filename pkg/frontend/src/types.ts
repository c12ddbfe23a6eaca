// Shapes of the review service's JSON payloads. The UI passes these through
// untouched: every displayed number comes from the service.

export type Verdict = "Type4Clone" | "Type3Clone" | "NonClone";

export const LABEL_TAXONOMY = [
  "modifier",
  "safemath",
  "call_super",
  "call_internal",
  "diff_algo",
  "spec_impl",
  "add_check",
] as const;

export type Label = (typeof LABEL_TAXONOMY)[number];

export interface FunctionPayload {
  function_id: string;
  function_code?: string;
  function_comment?: string | null;
  contract_name?: string;
  function_name?: string;
  solidity_version?: string;
  function_visibility?: string;
  [key: string]: unknown;
}

export interface Progress {
  pairs: number;
  judged: Record<string, number>;
  resolutions: number;
  expected_judgments: number;
}

export interface PairPayload {
  done: false;
  pair_id: string;
  set: string;
  stripe: string | null;
  cd_s: number;
  cm_s: number | null;
  same_name: boolean;
  signature_compatible: boolean;
  functions: { a: FunctionPayload; b: FunctionPayload };
  progress: Progress;
}

export interface DonePayload {
  done: true;
  progress: Progress;
}

export type NextPayload = PairPayload | DonePayload;

export interface JudgmentBody {
  pair_id: string;
  rater_id: string;
  verdict: Verdict;
  labels: Label[];
  note: string;
  coherent: boolean | null;
  complete: boolean | null;
}

export interface AgreementReport {
  kappa: number;
  observed_agreement: number;
  expected_agreement: number;
  conflicts: string[];
  n_pairs: number;
}

export interface MetricsReport {
  tp: number;
  fp: number;
  fn: number;
  tn: number;
  precision: number | null;
  recall: number | null;
  f1: number | null;
  specificity: number | null;
  accuracy: number | null;
}

export interface ConflictEntry {
  pair_id: string;
  verdicts: Record<string, string>;
}

export interface SessionStatus {
  session_id: string;
  name: string;
  raters: string[];
  mode: string;
  progress: Progress;
  conflicts: number;
}
