// Scripted browser session against the real service on a seeded
// 10,000-sensor corpus: check three properties, drag their sliders, set the
// margin to 50 and n to 20, then verify the rendered rows follow the
// response order exactly and that the margin-100 toggle renders the same
// table as switching the heuristic off.

import { execFile, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { boot, type AppHandle } from "../src/app.js";
import { renderRankingTable, tableOrder } from "../src/render.js";

const run = promisify(execFile);
const PORT = 18000 + (process.pid % 2000);
const BASE = `http://127.0.0.1:${PORT}`;

let workdir: string;
let service: ChildProcess | null = null;

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "console-session-"));
  const corpus = join(workdir, "sensors.jsonl");
  await run("python3", [
    "-m", "sensorsearch", "generate",
    "--count", "10000", "--seed", "42", "--out", corpus,
  ]);
  service = spawn(
    "python3",
    ["-m", "sensorsearch", "serve", "--port", String(PORT), "--corpus", corpus],
    { stdio: "ignore" },
  );
  for (let attempt = 0; ; attempt++) {
    try {
      const response = await fetch(`${BASE}/properties`);
      if (response.ok) break;
    } catch {
      /* not up yet */
    }
    if (attempt > 120) throw new Error("service never came up");
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
}, 60_000);

afterAll(() => {
  service?.kill();
  rmSync(workdir, { recursive: true, force: true });
});

function control(kind: string, key: string): HTMLInputElement {
  return document.querySelector(`input.${kind}[data-key="${key}"]`) as HTMLInputElement;
}

function field(id: string): HTMLInputElement {
  return document.getElementById(id) as HTMLInputElement;
}

function set(el: HTMLInputElement, value: string): void {
  el.value = value;
  el.dispatchEvent(new Event("input", { bubbles: true }));
}

function check(el: HTMLInputElement, checked: boolean): void {
  el.checked = checked;
  el.dispatchEvent(new Event("change", { bubbles: true }));
}

function resultsTable(): HTMLTableElement {
  return document.querySelector("#results table") as HTMLTableElement;
}

/** Cell texts per row with the movement column dropped; movement is
 * relative to the previous request by design, so it is presentation state
 * rather than response content.
 */
function contentRows(table: HTMLTableElement): string[][] {
  return Array.from(table.querySelectorAll("tbody tr")).map((tr) =>
    Array.from(tr.querySelectorAll("td"))
      .filter((td) => !td.classList.contains("delta"))
      .map((td) => td.textContent ?? ""),
  );
}

describe("scripted session", () => {
  let handle: AppHandle;

  it("drives the panel and renders rows in response order", async () => {
    document.body.innerHTML = '<div id="app"></div>';
    window.history.replaceState(null, "", "#");
    handle = await boot(document, window, BASE);

    // Check exactly three properties.
    for (const key of handle.state().order)
      check(control("include", key), false);
    for (const key of ["accuracy", "reliability", "response_time"])
      check(control("include", key), true);

    // Drag their sliders.
    set(control("slider", "accuracy"), "90");
    set(control("slider", "reliability"), "40");
    set(control("slider", "response_time"), "70");

    // Margin 50, 20 results.
    check(field("heuristic"), true);
    set(field("margin"), "50");
    set(field("n"), "20");
    await handle.flush();

    const request = handle.lastRequest()!;
    expect(request.priorities).toEqual([
      { key: "accuracy", slider: 90 },
      { key: "reliability", slider: 40 },
      { key: "response_time", slider: 70 },
    ]);
    expect(request.heuristic).toEqual({ enabled: true, margin: 50 });
    expect(request.n).toBe(20);

    const response = handle.lastResponse()!;
    expect(response.count).toBe(20);
    expect(response.diagnostics.heuristic_enabled).toBe(true);
    expect(response.diagnostics.margin).toBe(50);

    // The rendered row order is exactly the response order.
    const table = resultsTable();
    expect(tableOrder(table)).toEqual(response.entries.map((e) => e.uid));

    // Spot-check that shown numbers come from the response.
    const firstCells = Array.from(
      table.querySelector("tbody tr")!.querySelectorAll("td"),
    ).map((td) => td.textContent);
    expect(firstCells[2]).toBe(response.entries[0].uid);
    expect(firstCells[3]).toBe(response.entries[0].cpwi.toFixed(6));
  });

  it("margin 100 renders a table identical to heuristic off", async () => {
    const previousOrder = tableOrder(resultsTable());

    set(field("margin"), "100");
    await handle.flush();
    const atM100 = handle.lastResponse()!;
    const stateAtM100 = handle.state();
    const liveM100 = contentRows(resultsTable());

    check(field("heuristic"), false);
    await handle.flush();
    const heuristicOff = handle.lastResponse()!;
    const liveOff = contentRows(resultsTable());

    expect(handle.lastRequest()!.heuristic).toBeUndefined();
    expect(atM100.entries).toEqual(heuristicOff.entries);
    expect(liveM100).toEqual(liveOff);

    // Pure-renderer identity: same inputs except the response, identical
    // markup byte for byte.
    const a = renderRankingTable(document, atM100, stateAtM100, previousOrder);
    const b = renderRankingTable(document, heuristicOff, stateAtM100, previousOrder);
    expect(a.outerHTML).toBe(b.outerHTML);
  });

  it("strategy comparison shows one uid list across strategies", async () => {
    set(field("k"), "5");
    await handle.flush();
    await handle.compare();
    const outcomes = handle.lastOutcomes()!;
    expect(outcomes.map((o) => o.strategy)).toEqual(["chain", "parallel", "parallel_k"]);
    const uidLists = outcomes.map((o) => o.result.entries.map((e) => e.uid).join(" "));
    expect(uidLists[0]).toBe(uidLists[1]);
    expect(uidLists[1]).toBe(uidLists[2]);
    const compareTable = document.querySelector("#compare-view table")!;
    expect(compareTable.textContent).toContain(String(outcomes[0].total_time_ns));
  });
});
