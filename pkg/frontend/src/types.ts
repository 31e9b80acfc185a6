/** Payload shapes of the daemon API this console renders from. */

export interface InteractionRecord {
  interaction_id: string;
  ts: string;
  surface: string;
  human_text: string;
  agent_text: string;
  archetype: string | null;
  depth: string;
  truncated: boolean;
  error: string | null;
  scored: boolean;
}

export interface StreamRecord {
  seq: number;
  ts: string;
  author: string;
  model_id: string | null;
  payload: Record<string, unknown>;
}

export interface VaultDoc {
  path: string;
  kind: string;
  frontmatter: Record<string, string | number | boolean>;
  body: string;
}

export interface EntropyPoint {
  iso_week: string;
  entropy_bits: number;
  event_count: number;
}

export interface ConditionResult {
  condition: string;
  title: string;
  passed: boolean;
  evidence: string[];
  note: string;
}

export interface ConformanceReport {
  passed: boolean;
  overall: boolean;
  failing: string[];
  conditions: ConditionResult[];
}

export interface Verdict {
  run_id: string;
  skill_id: string;
  kind: string;
  before_metric: number | null;
  after_metric: number | null;
  paired_samples: number;
  delta: number;
  assessment: string;
  ts: string;
}

export interface Constitution {
  version: string;
  principles: { id: number; title: string; text: string }[];
  path: string;
}

export interface AdrDecision {
  adr_id: string;
  status: string;
  constitution_version?: string;
}

export type WeeklyShares = Record<string, Record<string, number>>;
