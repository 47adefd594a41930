/** Translate panel state into wire documents.
 *
 * The console never ranks or prunes anything itself, so these builders are
 * the only place panel state meets the wire schema: excluded properties are
 * omitted from priorities entirely, ideals are sent only for included
 * properties, and the heuristic block is absent when pruning is off.
 */

import type { PanelState, Strategy } from "./state.js";
import type { SearchRequestDoc, SimulateRequestDoc } from "./wire.js";

export function buildSearchRequest(state: PanelState): SearchRequestDoc {
  const doc: SearchRequestDoc = {
    priorities: state.order
      .filter((key) => state.rows[key].included)
      .map((key) => ({ key, slider: state.rows[key].slider })),
    scale: state.scale,
    n: state.n,
  };

  const query = state.filterText.trim();
  if (query !== "") doc.query = query;

  const ideal: Record<string, number> = {};
  for (const key of state.order) {
    const row = state.rows[key];
    if (row.included && row.ideal !== null) ideal[key] = row.ideal;
  }
  if (Object.keys(ideal).length > 0) doc.ideal = ideal;

  if (state.heuristicEnabled)
    doc.heuristic = { enabled: true, margin: state.marginM };

  return doc;
}

export interface ClusterParams {
  nodes?: number;
  latency_ms?: number;
  bandwidth_MBps?: number;
  processing_ms?: number;
  record_size_bytes?: number;
}

/** One strategy's simulate document; k travels only with parallel_k. */
export function buildSimulateRequest(
  state: PanelState,
  strategy: Exclude<Strategy, "local">,
  k: number | null,
  cluster: ClusterParams = {},
): SimulateRequestDoc {
  const doc: SimulateRequestDoc = {
    strategy,
    ...cluster,
    request: buildSearchRequest(state),
  };
  if (strategy === "parallel_k" && k !== null) doc.k = k;
  return doc;
}
