/** Types for the service wire schema (see docs/wire-schema.md). */

export interface PropertyInfo {
  key: string;
  unit: string;
  polarity: "higher" | "lower";
  observed_min: number | null;
  observed_max: number | null;
}

export interface PriorityEntry {
  key: string;
  slider: number;
  included?: boolean;
}

export interface HeuristicDoc {
  enabled: boolean;
  margin?: number;
}

export interface SearchRequestDoc {
  query?: string;
  priorities: PriorityEntry[];
  scale?: number;
  n?: number;
  ideal?: Record<string, number>;
  heuristic?: HeuristicDoc;
}

export interface RankedEntryDoc {
  uid: string;
  cpwi: number;
  sensor_type: string;
  region: string;
  values: Record<string, number>;
}

export interface SearchResponseDoc {
  snapshot_id: string;
  n: number;
  count: number;
  shortfall: boolean;
  entries: RankedEntryDoc[];
  weights: Record<string, number>;
  diagnostics: {
    candidates_before: number;
    candidates_after_prune: number;
    excluded_missing_property: number;
    heuristic_enabled: boolean;
    margin: number | null;
  };
  timing_ms: Record<string, number>;
}

export interface SimulateRequestDoc {
  strategy: string;
  k?: number;
  nodes?: number;
  latency_ms?: number;
  bandwidth_MBps?: number;
  processing_ms?: number;
  record_size_bytes?: number;
  request: SearchRequestDoc;
}

export interface SimulateOutcomeDoc {
  strategy: string;
  k: number | null;
  result: { truncated_to: number; entries: { uid: string; cpwi: number }[] };
  total_time_ns: number;
  rounds: number;
  sri_processing_ns: number;
  remote_component_ns: number | null;
  total_bytes: number;
  bytes_by_link: { src: number; dst: number; bytes: number }[];
  events: {
    kind: string;
    src: number;
    dst: number;
    start_ns: number;
    end_ns: number;
    bytes: number;
    label: string;
  }[];
}

export interface ErrorBody {
  type: string;
  message: string;
  line?: number;
  column?: number;
  expected?: string[];
}
