import { describe, expect, it } from "vitest";

import { buildSearchRequest } from "../src/request.js";
import {
  clampSlider,
  decodeFragment,
  defaultPanel,
  encodeFragment,
  withIdeal,
  withIncluded,
  withK,
  withMargin,
  withN,
  withScale,
  withSlider,
} from "../src/state.js";

const KEYS = ["availability", "accuracy", "reliability", "response_time", "frequency"];

describe("defaultPanel", () => {
  it("includes every property with sliders at rest", () => {
    const state = defaultPanel(KEYS);
    expect(state.order).toEqual(KEYS);
    for (const key of KEYS)
      expect(state.rows[key]).toEqual({ included: true, slider: 1, ideal: null });
    expect(state.scale).toBe(100);
    expect(state.heuristicEnabled).toBe(true);
    expect(state.marginM).toBe(50);
    expect(state.n).toBe(50);
    expect(state.strategy).toBe("local");
    expect(state.k).toBeNull();
    expect(state.filterText).toBe("");
  });
});

describe("clamping", () => {
  it("pins sliders into [1, scale]", () => {
    expect(clampSlider(0, 100)).toBe(1);
    expect(clampSlider(-5, 100)).toBe(1);
    expect(clampSlider(101, 100)).toBe(100);
    expect(clampSlider(50, 100)).toBe(50);
    expect(clampSlider(Number.NaN, 100)).toBe(1);
    expect(clampSlider(8000, 1000)).toBe(1000);
  });

  it("withSlider clamps against the current scale", () => {
    const state = defaultPanel(KEYS);
    expect(withSlider(state, "accuracy", 250).rows.accuracy.slider).toBe(100);
    expect(withSlider(state, "accuracy", 0).rows.accuracy.slider).toBe(1);
  });

  it("shrinking the scale re-clamps every slider", () => {
    let state = withScale(defaultPanel(KEYS), 1000);
    state = withSlider(state, "accuracy", 800);
    state = withSlider(state, "frequency", 30);
    const shrunk = withScale(state, 100);
    expect(shrunk.rows.accuracy.slider).toBe(100);
    expect(shrunk.rows.frequency.slider).toBe(30);
  });

  it("growing the scale keeps slider positions", () => {
    let state = withSlider(defaultPanel(KEYS), "accuracy", 73);
    state = withScale(state, 10000);
    expect(state.rows.accuracy.slider).toBe(73);
  });

  it("margin clamps to [0, 100] and n to whole numbers >= 1", () => {
    const state = defaultPanel(KEYS);
    expect(withMargin(state, -3).marginM).toBe(0);
    expect(withMargin(state, 140).marginM).toBe(100);
    expect(withN(state, 0).n).toBe(1);
    expect(withN(state, 7.4).n).toBe(7);
    expect(withN(state, Number.NaN).n).toBe(state.n);
    expect(withK(state, 0).k).toBe(1);
    expect(withK(state, null).k).toBeNull();
  });

  it("non-finite ideals reset to the service default", () => {
    const state = defaultPanel(KEYS);
    expect(withIdeal(state, "accuracy", Number.NaN).rows.accuracy.ideal).toBeNull();
    expect(withIdeal(state, "accuracy", 42).rows.accuracy.ideal).toBe(42);
  });

  it("updates leave the original state untouched", () => {
    const state = defaultPanel(KEYS);
    withSlider(state, "accuracy", 90);
    withIncluded(state, "accuracy", false);
    expect(state.rows.accuracy).toEqual({ included: true, slider: 1, ideal: null });
  });

  it("unknown keys are ignored", () => {
    const state = defaultPanel(KEYS);
    expect(withSlider(state, "nope", 50)).toBe(state);
  });
});

describe("fragment round trip", () => {
  function busyState() {
    let state = defaultPanel(KEYS);
    state = withScale(state, 1000);
    state = withSlider(state, "accuracy", 900);
    state = withSlider(state, "response_time", 444);
    state = withIncluded(state, "frequency", false);
    state = withIdeal(state, "reliability", 97.5);
    state = withMargin(state, 25);
    state = withN(state, 20);
    state = withK(state, 5);
    state = { ...state, strategy: "parallel_k", filterText: "accuracy >= 60" };
    return state;
  }

  it("decode(encode(state)) reproduces the state", () => {
    const state = busyState();
    expect(decodeFragment(encodeFragment(state))).toEqual(state);
  });

  it("a reload reproduces the identical search request", () => {
    const state = busyState();
    const reloaded = decodeFragment(encodeFragment(state));
    expect(reloaded).not.toBeNull();
    expect(buildSearchRequest(reloaded!)).toEqual(buildSearchRequest(state));
  });

  it("rejects garbage fragments", () => {
    expect(decodeFragment("")).toBeNull();
    expect(decodeFragment("#")).toBeNull();
    expect(decodeFragment("#not-json")).toBeNull();
    expect(decodeFragment("#" + encodeURIComponent('{"order": 1}'))).toBeNull();
    expect(decodeFragment("#" + encodeURIComponent('["array"]'))).toBeNull();
    expect(decodeFragment("#%7B")).toBeNull();
  });

  it("rejects fragments with missing or malformed rows", () => {
    const noRow = { ...defaultPanel(KEYS), rows: {} };
    expect(decodeFragment(encodeFragment(noRow))).toBeNull();
    const crafted = encodeFragment(defaultPanel(KEYS)).replace(
      encodeURIComponent('"included":true'),
      encodeURIComponent('"included":"yes"'),
    );
    expect(decodeFragment(crafted)).toBeNull();
  });

  it("rejects unknown scales and strategies", () => {
    const badScale = JSON.parse(
      decodeURIComponent(encodeFragment(defaultPanel(KEYS)).slice(1)),
    );
    badScale.scale = 7;
    expect(decodeFragment("#" + encodeURIComponent(JSON.stringify(badScale)))).toBeNull();
    badScale.scale = 100;
    badScale.strategy = "warp";
    expect(decodeFragment("#" + encodeURIComponent(JSON.stringify(badScale)))).toBeNull();
  });

  it("clamps out-of-range numbers smuggled into a fragment", () => {
    const doc = JSON.parse(
      decodeURIComponent(encodeFragment(defaultPanel(KEYS)).slice(1)),
    );
    doc.marginM = 250;
    doc.rows.accuracy.slider = 9999;
    doc.n = -4;
    const state = decodeFragment("#" + encodeURIComponent(JSON.stringify(doc)));
    expect(state).not.toBeNull();
    expect(state!.marginM).toBe(100);
    expect(state!.rows.accuracy.slider).toBe(100);
    expect(state!.n).toBe(1);
  });
});
