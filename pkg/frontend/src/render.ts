/** DOM rendering. Display-only by contract: every number shown is copied
 * from a service response field, and rows keep the exact response order.
 * The only presentation the console adds is rank position and movement
 * versus the previous response.
 */

import type { PanelState } from "./state.js";
import type { SearchResponseDoc, SimulateOutcomeDoc } from "./wire.js";
import { ServiceError } from "./client.js";

function formatScore(score: number): string {
  return score.toFixed(6);
}

function formatValue(value: number): string {
  return String(value);
}

function cell(
  doc: Document,
  tag: "td" | "th",
  text: string,
  className?: string,
): HTMLTableCellElement {
  const el = doc.createElement(tag);
  el.textContent = text;
  if (className !== undefined) el.className = className;
  return el;
}

function deltaText(uid: string, index: number, previousOrder: string[] | null): string {
  if (previousOrder === null) return "";
  const before = previousOrder.indexOf(uid);
  if (before === -1) return "new";
  const moved = before - index; // positive means the sensor climbed
  if (moved === 0) return "=";
  return moved > 0 ? `+${moved}` : String(moved);
}

/** The ranked table. Rows follow response.entries order exactly; columns for
 * properties the user weighted carry the "weighted" class.
 */
export function renderRankingTable(
  doc: Document,
  response: SearchResponseDoc,
  state: PanelState,
  previousOrder: string[] | null,
): HTMLTableElement {
  const table = doc.createElement("table");
  table.className = "ranking";

  const keys = state.order.filter(
    (key) => response.entries.length === 0 || key in response.entries[0].values,
  );
  const weighted = new Set(
    state.order.filter((key) => state.rows[key].included),
  );

  const head = doc.createElement("thead");
  const headRow = doc.createElement("tr");
  headRow.append(
    cell(doc, "th", "#"),
    cell(doc, "th", "moved"),
    cell(doc, "th", "uid"),
    cell(doc, "th", "score"),
    cell(doc, "th", "type"),
    cell(doc, "th", "region"),
  );
  for (const key of keys)
    headRow.append(cell(doc, "th", key, weighted.has(key) ? "weighted" : undefined));
  head.append(headRow);
  table.append(head);

  const body = doc.createElement("tbody");
  response.entries.forEach((entry, index) => {
    const row = doc.createElement("tr");
    row.dataset.uid = entry.uid;
    row.append(
      cell(doc, "td", String(index + 1)),
      cell(doc, "td", deltaText(entry.uid, index, previousOrder), "delta"),
      cell(doc, "td", entry.uid),
      cell(doc, "td", formatScore(entry.cpwi)),
      cell(doc, "td", entry.sensor_type),
      cell(doc, "td", entry.region),
    );
    for (const key of keys)
      row.append(
        cell(
          doc,
          "td",
          formatValue(entry.values[key]),
          weighted.has(key) ? "weighted" : undefined,
        ),
      );
    body.append(row);
  });
  table.append(body);
  return table;
}

/** Row order of a rendered ranking table, for movement marks next render. */
export function tableOrder(table: HTMLTableElement): string[] {
  return Array.from(table.querySelectorAll("tbody tr")).map(
    (row) => (row as HTMLElement).dataset.uid ?? "",
  );
}

/** Side-by-side strategy costs, verbatim from the simulate payloads. */
export function renderCompareTable(
  doc: Document,
  outcomes: SimulateOutcomeDoc[],
  highlight?: string,
): HTMLTableElement {
  const table = doc.createElement("table");
  table.className = "compare";

  const rows: [string, (o: SimulateOutcomeDoc) => string][] = [
    ["strategy", (o) => o.strategy],
    ["k", (o) => (o.k === null ? "-" : String(o.k))],
    ["total time (ns)", (o) => String(o.total_time_ns)],
    ["bytes moved", (o) => String(o.total_bytes)],
    ["rounds", (o) => String(o.rounds)],
    ["top uids", (o) => o.result.entries.map((e) => e.uid).join(" ")],
  ];

  const body = doc.createElement("tbody");
  for (const [label, pick] of rows) {
    const tr = doc.createElement("tr");
    tr.append(cell(doc, "th", label));
    for (const outcome of outcomes)
      tr.append(
        cell(doc, "td", pick(outcome), outcome.strategy === highlight ? "chosen" : undefined),
      );
    body.append(tr);
  }
  table.append(body);
  return table;
}

export type FieldName =
  | "filter"
  | "k"
  | "margin"
  | "n"
  | "priorities"
  | "form";

/** Which control a service error points at, so the app can highlight it. */
export function errorField(error: ServiceError): FieldName {
  if (error.type === "ParseError" || error.type === "InvalidFilter") return "filter";
  if (error.type === "InvalidK") return "k";
  if (error.type === "EmptyPriority") return "priorities";
  const message = error.message.toLowerCase();
  if (message.includes("margin")) return "margin";
  if (message.includes("k ")) return "k";
  if (/\bn\b/.test(message)) return "n";
  if (message.includes("slider") || message.includes("priorit") || message.includes("scale"))
    return "priorities";
  return "form";
}

export function renderErrorBanner(doc: Document, error: ServiceError): HTMLElement {
  const banner = doc.createElement("div");
  banner.className = "banner error";
  let text = `${error.type}: ${error.message}`;
  if (error.line !== undefined && error.column !== undefined)
    text += ` (line ${error.line}, column ${error.column})`;
  banner.textContent = text;
  return banner;
}

export function renderRetryBanner(doc: Document, onRetry: () => void): HTMLElement {
  const banner = doc.createElement("div");
  banner.className = "banner retry";
  const label = doc.createElement("span");
  label.textContent = "service unreachable ";
  const button = doc.createElement("button");
  button.type = "button";
  button.textContent = "retry";
  button.addEventListener("click", onRetry);
  banner.append(label, button);
  return banner;
}
