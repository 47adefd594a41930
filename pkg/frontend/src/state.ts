/** Panel state: everything the user can set, and nothing the service owns.
 *
 * State is immutable; every update helper returns a fresh object so the app
 * can schedule a search per change and serialize the panel to the URL
 * fragment without defensive copying.
 */

export type Scale = 100 | 1000 | 10000;
export const SCALES: readonly Scale[] = [100, 1000, 10000];

export type Strategy = "local" | "chain" | "parallel" | "parallel_k";
export const STRATEGIES: readonly Strategy[] = [
  "local",
  "chain",
  "parallel",
  "parallel_k",
];

export interface PropertyRow {
  included: boolean;
  slider: number; // clamped to [1, scale]
  ideal: number | null; // native units; null defers to the service default
}

export interface PanelState {
  order: string[]; // catalogue order, drives rendering
  rows: Record<string, PropertyRow>;
  scale: Scale;
  heuristicEnabled: boolean;
  marginM: number; // [0, 100]
  n: number;
  strategy: Strategy;
  k: number | null;
  filterText: string;
}

export function clampSlider(value: number, scale: Scale): number {
  if (!Number.isFinite(value)) return 1;
  return Math.min(Math.max(value, 1), scale);
}

/** All properties included, sliders at rest, margin 50, n 50. */
export function defaultPanel(keys: readonly string[]): PanelState {
  const rows: Record<string, PropertyRow> = {};
  for (const key of keys) rows[key] = { included: true, slider: 1, ideal: null };
  return {
    order: [...keys],
    rows,
    scale: 100,
    heuristicEnabled: true,
    marginM: 50,
    n: 50,
    strategy: "local",
    k: null,
    filterText: "",
  };
}

function withRow(
  state: PanelState,
  key: string,
  patch: Partial<PropertyRow>,
): PanelState {
  const row = state.rows[key];
  if (row === undefined) return state;
  return { ...state, rows: { ...state.rows, [key]: { ...row, ...patch } } };
}

export function withIncluded(
  state: PanelState,
  key: string,
  included: boolean,
): PanelState {
  return withRow(state, key, { included });
}

export function withSlider(
  state: PanelState,
  key: string,
  value: number,
): PanelState {
  return withRow(state, key, { slider: clampSlider(value, state.scale) });
}

export function withIdeal(
  state: PanelState,
  key: string,
  value: number | null,
): PanelState {
  const ideal = value !== null && Number.isFinite(value) ? value : null;
  return withRow(state, key, { ideal });
}

/** Changing the scale re-clamps every slider into the new [1, scale]. */
export function withScale(state: PanelState, scale: Scale): PanelState {
  const rows: Record<string, PropertyRow> = {};
  for (const key of state.order) {
    const row = state.rows[key];
    rows[key] = { ...row, slider: clampSlider(row.slider, scale) };
  }
  return { ...state, scale, rows };
}

export function withHeuristic(state: PanelState, enabled: boolean): PanelState {
  return { ...state, heuristicEnabled: enabled };
}

export function withMargin(state: PanelState, margin: number): PanelState {
  const m = Number.isFinite(margin) ? Math.min(Math.max(margin, 0), 100) : 50;
  return { ...state, marginM: m };
}

export function withN(state: PanelState, n: number): PanelState {
  const whole = Number.isFinite(n) ? Math.max(Math.round(n), 1) : state.n;
  return { ...state, n: whole };
}

export function withFilter(state: PanelState, text: string): PanelState {
  return { ...state, filterText: text };
}

export function withStrategy(state: PanelState, strategy: Strategy): PanelState {
  return { ...state, strategy };
}

export function withK(state: PanelState, k: number | null): PanelState {
  if (k === null || !Number.isFinite(k)) return { ...state, k: null };
  return { ...state, k: Math.max(Math.round(k), 1) };
}

// -- URL fragment ----------------------------------------------------------
// The whole panel round-trips through location.hash so a reload (or a pasted
// link) reproduces the identical request.

export function encodeFragment(state: PanelState): string {
  const doc = {
    order: state.order,
    rows: state.rows,
    scale: state.scale,
    heuristicEnabled: state.heuristicEnabled,
    marginM: state.marginM,
    n: state.n,
    strategy: state.strategy,
    k: state.k,
    filterText: state.filterText,
  };
  return "#" + encodeURIComponent(JSON.stringify(doc));
}

function isRow(raw: unknown): raw is PropertyRow {
  if (typeof raw !== "object" || raw === null) return false;
  const row = raw as Record<string, unknown>;
  return (
    typeof row.included === "boolean" &&
    typeof row.slider === "number" &&
    (row.ideal === null || typeof row.ideal === "number")
  );
}

/** Parse a fragment back into panel state; null when malformed or stale. */
export function decodeFragment(fragment: string): PanelState | null {
  const raw = fragment.startsWith("#") ? fragment.slice(1) : fragment;
  if (!raw) return null;
  let doc: unknown;
  try {
    doc = JSON.parse(decodeURIComponent(raw));
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const d = doc as Record<string, unknown>;
  if (!Array.isArray(d.order) || d.order.some((k) => typeof k !== "string"))
    return null;
  if (typeof d.rows !== "object" || d.rows === null) return null;
  const order = d.order as string[];
  const rawRows = d.rows as Record<string, unknown>;
  const scale = SCALES.find((s) => s === d.scale);
  const strategy = STRATEGIES.find((s) => s === d.strategy);
  if (scale === undefined || strategy === undefined) return null;
  if (
    typeof d.heuristicEnabled !== "boolean" ||
    typeof d.marginM !== "number" ||
    typeof d.n !== "number" ||
    (d.k !== null && typeof d.k !== "number") ||
    typeof d.filterText !== "string"
  )
    return null;

  const rows: Record<string, PropertyRow> = {};
  for (const key of order) {
    const row = rawRows[key];
    if (!isRow(row)) return null;
    rows[key] = {
      included: row.included,
      slider: clampSlider(row.slider, scale),
      ideal: row.ideal,
    };
  }
  let state: PanelState = {
    order,
    rows,
    scale,
    heuristicEnabled: d.heuristicEnabled,
    marginM: d.marginM,
    n: d.n,
    strategy,
    k: d.k as number | null,
    filterText: d.filterText,
  };
  state = withMargin(state, state.marginM);
  state = withN(state, state.n);
  state = withK(state, state.k);
  return state;
}
