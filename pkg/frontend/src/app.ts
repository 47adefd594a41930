/** Panel wiring: build the controls, translate input events into state
 * updates, keep the URL fragment in sync, and re-render the ranked table
 * from each service response. Searches are debounced while the user drags,
 * and only the latest in-flight request is allowed to paint.
 */

import {
  Client,
  LatestWins,
  ServiceError,
  ServiceUnreachable,
  debounce,
} from "./client.js";
import { buildSearchRequest, buildSimulateRequest } from "./request.js";
import {
  errorField,
  renderCompareTable,
  renderErrorBanner,
  renderRankingTable,
  renderRetryBanner,
  tableOrder,
  type FieldName,
} from "./render.js";
import {
  decodeFragment,
  defaultPanel,
  encodeFragment,
  SCALES,
  STRATEGIES,
  withFilter,
  withHeuristic,
  withIdeal,
  withIncluded,
  withK,
  withMargin,
  withN,
  withScale,
  withSlider,
  type PanelState,
  type Scale,
  type Strategy,
} from "./state.js";
import type { SearchRequestDoc, SearchResponseDoc, SimulateOutcomeDoc } from "./wire.js";

export const DEBOUNCE_MS = 200;
const DEMO_CORPUS = { generate: { count: 10_000, seed: 42 } };

interface WindowLike {
  location: { hash: string };
  history?: { replaceState(data: unknown, title: string, url: string): void };
}

export interface AppHandle {
  state(): PanelState;
  lastRequest(): SearchRequestDoc | null;
  lastResponse(): SearchResponseDoc | null;
  lastOutcomes(): SimulateOutcomeDoc[] | null;
  /** Run any debounced search now and wait for its render to settle. */
  flush(): Promise<void>;
  compare(): Promise<void>;
  client: Client;
}

function labeled(doc: Document, text: string, control: HTMLElement): HTMLLabelElement {
  const label = doc.createElement("label");
  label.append(text + " ", control);
  return label;
}

export async function boot(
  doc: Document,
  win: WindowLike,
  baseUrl: string,
  fetchImpl?: typeof fetch,
): Promise<AppHandle> {
  const client = new Client(baseUrl, fetchImpl);
  const root = doc.getElementById("app") ?? doc.body;
  root.replaceChildren();

  const banners = doc.createElement("div");
  banners.id = "banners";
  const panel = doc.createElement("form");
  panel.id = "panel";
  panel.addEventListener("submit", (event) => event.preventDefault());
  const results = doc.createElement("div");
  results.id = "results";
  const compareView = doc.createElement("div");
  compareView.id = "compare-view";
  root.append(banners, panel, results, compareView);

  let properties;
  try {
    properties = await client.properties();
  } catch (error) {
    if (error instanceof ServiceUnreachable) {
      banners.replaceChildren(
        renderRetryBanner(doc, () => void boot(doc, win, baseUrl, fetchImpl)),
      );
      throw error;
    }
    throw error;
  }
  // The catalogue lists every known property; the panel offers the ones the
  // loaded corpus actually observes (bounds established), or everything when
  // no corpus has been loaded yet.
  const observed = properties.filter(
    (p) => p.observed_min !== null && p.observed_max !== null,
  );
  const keys = (observed.length > 0 ? observed : properties).map((p) => p.key);
  let state = decodeFragment(win.location.hash) ?? defaultPanel(keys);

  // -- controls ------------------------------------------------------------

  const propTable = doc.createElement("table");
  propTable.className = "properties";
  const includes = new Map<string, HTMLInputElement>();
  const sliders = new Map<string, HTMLInputElement>();
  const ideals = new Map<string, HTMLInputElement>();
  for (const key of state.order) {
    const row = doc.createElement("tr");
    const include = doc.createElement("input");
    include.type = "checkbox";
    include.className = "include";
    include.dataset.key = key;
    const slider = doc.createElement("input");
    slider.type = "range";
    slider.className = "slider";
    slider.dataset.key = key;
    slider.min = "1";
    slider.step = "1";
    const ideal = doc.createElement("input");
    ideal.type = "number";
    ideal.className = "ideal";
    ideal.dataset.key = key;
    ideal.placeholder = "best";
    includes.set(key, include);
    sliders.set(key, slider);
    ideals.set(key, ideal);
    for (const control of [include, slider, ideal] as HTMLElement[]) {
      const td = doc.createElement("td");
      td.append(control);
      row.append(td);
    }
    const name = doc.createElement("td");
    name.textContent = key;
    row.prepend(name);
    propTable.append(row);
  }

  const scaleSelect = doc.createElement("select");
  scaleSelect.id = "scale";
  for (const scale of SCALES) {
    const option = doc.createElement("option");
    option.value = String(scale);
    option.textContent = String(scale);
    scaleSelect.append(option);
  }
  const filterInput = doc.createElement("input");
  filterInput.type = "text";
  filterInput.id = "filter";
  filterInput.placeholder = "type = temperature and accuracy >= 60";
  const nInput = doc.createElement("input");
  nInput.type = "number";
  nInput.id = "n";
  nInput.min = "1";
  const heuristicInput = doc.createElement("input");
  heuristicInput.type = "checkbox";
  heuristicInput.id = "heuristic";
  const marginInput = doc.createElement("input");
  marginInput.type = "range";
  marginInput.id = "margin";
  marginInput.min = "0";
  marginInput.max = "100";
  const strategySelect = doc.createElement("select");
  strategySelect.id = "strategy";
  for (const strategy of STRATEGIES) {
    const option = doc.createElement("option");
    option.value = strategy;
    option.textContent = strategy;
    strategySelect.append(option);
  }
  const kInput = doc.createElement("input");
  kInput.type = "number";
  kInput.id = "k";
  kInput.min = "1";
  const compareButton = doc.createElement("button");
  compareButton.type = "button";
  compareButton.id = "compare";
  compareButton.textContent = "compare strategies";

  panel.append(
    propTable,
    labeled(doc, "filter", filterInput),
    labeled(doc, "scale", scaleSelect),
    labeled(doc, "results", nInput),
    labeled(doc, "prune", heuristicInput),
    labeled(doc, "margin", marginInput),
    labeled(doc, "strategy", strategySelect),
    labeled(doc, "k", kInput),
    compareButton,
  );

  const fields: Record<FieldName, HTMLElement> = {
    filter: filterInput,
    k: kInput,
    margin: marginInput,
    n: nInput,
    priorities: propTable,
    form: panel,
  };

  function paintControls(): void {
    for (const key of state.order) {
      const row = state.rows[key];
      includes.get(key)!.checked = row.included;
      const slider = sliders.get(key)!;
      slider.max = String(state.scale);
      slider.value = String(row.slider);
      ideals.get(key)!.value = row.ideal === null ? "" : String(row.ideal);
    }
    scaleSelect.value = String(state.scale);
    filterInput.value = state.filterText;
    nInput.value = String(state.n);
    heuristicInput.checked = state.heuristicEnabled;
    marginInput.value = String(state.marginM);
    marginInput.disabled = !state.heuristicEnabled;
    strategySelect.value = state.strategy;
    kInput.value = state.k === null ? "" : String(state.k);
  }

  // -- search loop ----------------------------------------------------------

  const latest = new LatestWins();
  let previousOrder: string[] | null = null;
  let lastRequest: SearchRequestDoc | null = null;
  let lastResponse: SearchResponseDoc | null = null;
  let lastOutcomes: SimulateOutcomeDoc[] | null = null;
  let inflight: Promise<void> = Promise.resolve();

  function clearFeedback(): void {
    banners.replaceChildren();
    for (const element of Object.values(fields)) element.classList.remove("invalid");
  }

  function showFailure(error: unknown, retry: () => void): void {
    clearFeedback();
    if (error instanceof ServiceError) {
      if (error.status === 409) {
        const banner = doc.createElement("div");
        banner.className = "banner error";
        const button = doc.createElement("button");
        button.type = "button";
        button.textContent = "generate demo corpus";
        button.addEventListener("click", () => {
          void client.loadCorpus(DEMO_CORPUS).then(retry);
        });
        banner.append("no corpus loaded ", button);
        banners.replaceChildren(banner);
        return;
      }
      banners.replaceChildren(renderErrorBanner(doc, error));
      fields[errorField(error)].classList.add("invalid");
    } else if (error instanceof ServiceUnreachable) {
      banners.replaceChildren(renderRetryBanner(doc, retry));
    } else {
      throw error;
    }
  }

  async function runSearch(): Promise<void> {
    const request = buildSearchRequest(state);
    lastRequest = request;
    try {
      const response = await latest.run((signal) => client.search(request, signal));
      if (response === undefined) return; // a newer request took over
      lastResponse = response;
      clearFeedback();
      const table = renderRankingTable(doc, response, state, previousOrder);
      results.replaceChildren(table);
      previousOrder = tableOrder(table);
    } catch (error) {
      showFailure(error, () => {
        inflight = runSearch();
      });
    }
  }

  const scheduleSearch = debounce(() => {
    inflight = runSearch();
  }, DEBOUNCE_MS);

  function syncFragment(): void {
    const fragment = encodeFragment(state);
    if (win.history !== undefined) win.history.replaceState(null, "", fragment);
    else win.location.hash = fragment;
  }

  function update(next: PanelState): void {
    state = next;
    paintControls();
    syncFragment();
    scheduleSearch();
  }

  // -- event wiring ----------------------------------------------------------

  for (const [key, input] of includes)
    input.addEventListener("change", () => update(withIncluded(state, key, input.checked)));
  for (const [key, input] of sliders)
    input.addEventListener("input", () => update(withSlider(state, key, Number(input.value))));
  for (const [key, input] of ideals)
    input.addEventListener("input", () =>
      update(withIdeal(state, key, input.value === "" ? null : Number(input.value))),
    );
  scaleSelect.addEventListener("change", () =>
    update(withScale(state, Number(scaleSelect.value) as Scale)),
  );
  filterInput.addEventListener("input", () => update(withFilter(state, filterInput.value)));
  nInput.addEventListener("input", () => update(withN(state, Number(nInput.value))));
  heuristicInput.addEventListener("change", () =>
    update(withHeuristic(state, heuristicInput.checked)),
  );
  marginInput.addEventListener("input", () => update(withMargin(state, Number(marginInput.value))));
  strategySelect.addEventListener("change", () =>
    update(withStrategyChecked(state, strategySelect.value)),
  );
  kInput.addEventListener("input", () =>
    update(withK(state, kInput.value === "" ? null : Number(kInput.value))),
  );
  compareButton.addEventListener("click", () => void runCompare());

  function withStrategyChecked(current: PanelState, raw: string): PanelState {
    const strategy = STRATEGIES.find((s) => s === raw) ?? "local";
    return { ...current, strategy: strategy as Strategy };
  }

  async function runCompare(): Promise<void> {
    const k = state.k ?? 5;
    try {
      const outcomes: SimulateOutcomeDoc[] = [];
      for (const strategy of ["chain", "parallel", "parallel_k"] as const) {
        const doc_ = buildSimulateRequest(state, strategy, strategy === "parallel_k" ? k : null);
        outcomes.push(await client.simulate(doc_));
      }
      lastOutcomes = outcomes;
      clearFeedback();
      compareView.replaceChildren(renderCompareTable(doc, outcomes, state.strategy));
    } catch (error) {
      showFailure(error, () => void runCompare());
    }
  }

  paintControls();
  syncFragment();
  inflight = runSearch();
  await inflight;

  return {
    state: () => state,
    lastRequest: () => lastRequest,
    lastResponse: () => lastResponse,
    lastOutcomes: () => lastOutcomes,
    flush: async (): Promise<void> => {
      scheduleSearch.flush();
      await inflight;
    },
    compare: runCompare,
    client,
  };
}
