// Wire types mirroring the creation-service JSON bodies.

export type Color = "red" | "yellow" | "green";

export interface Recommendation {
  kind: string;
  detail: string;
}

export interface ComponentReport {
  score: number;
  percentile: number;
  color: Color;
  feedback: string;
  recommendations: Recommendation[];
}

export interface TermDetail {
  token_pmi: [string, number][];
  nearest_lexical: [string, number];
  nearest_semantic: [string, number];
}

export interface QualityReport {
  components: Record<string, ComponentReport>;
  composite: number;
  dataset_size_at_eval: number;
  terms?: TermDetail;
}

export interface SampleRecord {
  id: string;
  fields: Record<string, string>;
  label: string;
  split?: string;
}

export interface Decision {
  verdict: "accept" | "reject";
  feedback: string;
  validator_id: string;
}

export type DraftStatus = "draft" | "submitted" | "accepted" | "rejected" | "discarded";

export interface DraftRecord {
  draft_id: string;
  sample: SampleRecord;
  report: QualityReport;
  created_at: string;
  status: DraftStatus;
  sample_id: string | null;
  decision: Decision | null;
}

export interface QueueItem {
  sample: SampleRecord;
  sample_id: string;
  report: QualityReport;
}

export interface DatasetStats {
  size: number;
  trajectory: Record<string, number | null>[];
  acceptance_rate: number;
  accepted: number;
  rejected: number;
  queue_length: number;
}

export type Granularity = "component" | "term";
