import { describe, expect, it } from "vitest";

import type { Forecast, Insight, Option } from "../src/api.js";
import {
  escapeHtml,
  forecastRow,
  formatPercent,
  insightRow,
  kindLabel,
  optionRow,
  quantilesOrdered,
  severityBand,
  sortInsights,
  validateAlternative,
} from "../src/model.js";

function insight(overrides: Partial<Insight>): Insight {
  return {
    uuid: "ins-1",
    kind: "organizational_downtime",
    date: "2019-10-01T13:00:00.000Z",
    severity: 0.5,
    description: "shift understaffed",
    refers_to: [],
    ...overrides,
  };
}

describe("severity presentation", () => {
  it("maps severities to bands at the documented thresholds", () => {
    expect(severityBand(0.1)).toBe("low");
    expect(severityBand(0.25)).toBe("medium");
    expect(severityBand(0.5)).toBe("high");
    expect(severityBand(0.75)).toBe("critical");
    expect(severityBand(1.0)).toBe("critical");
  });

  it("renders percentages rounded to whole numbers", () => {
    expect(formatPercent(0.5)).toBe("50%");
    expect(formatPercent(2 / 3)).toBe("67%");
    expect(formatPercent(0)).toBe("0%");
  });
});

describe("insight board", () => {
  it("sorts by severity desc, then date, then uuid", () => {
    const rows = sortInsights([
      insight({ uuid: "c", severity: 0.5, date: "2019-10-02T00:00:00Z" }),
      insight({ uuid: "a", severity: 0.5, date: "2019-10-01T00:00:00Z" }),
      insight({ uuid: "b", severity: 0.9 }),
      insight({ uuid: "d", severity: 0.5, date: "2019-10-01T00:00:00Z" }),
    ]);
    expect(rows.map((r) => r.uuid)).toEqual(["b", "a", "d", "c"]);
  });

  it("does not mutate its input", () => {
    const input = [insight({ uuid: "z", severity: 0.1 }), insight({ uuid: "y" })];
    sortInsights(input);
    expect(input[0].uuid).toBe("z");
  });

  it("derives every displayed field from the payload", () => {
    const row = insightRow(
      insight({ severity: 0.6, description: "late orders" }),
    );
    expect(row).toEqual({
      uuid: "ins-1",
      title: "Organizational downtime",
      date: "2019-10-01 13:00",
      severity: "60%",
      band: "high",
      description: "late orders",
    });
  });

  it("falls back to the raw kind for unknown kinds", () => {
    expect(kindLabel("demand_spike")).toBe("Demand spike");
    expect(kindLabel("something_new")).toBe("something_new");
  });
});

describe("option panel", () => {
  const option: Option = {
    option_uuid: "opt-1",
    description: "update the production schedule",
    accepted: 3,
    rejected: 1,
    score: 4 / 6,
    creative: false,
  };

  it("formats the score and tally from the payload", () => {
    expect(optionRow(option)).toEqual({
      uuid: "opt-1",
      description: "update the production schedule",
      score: "67%",
      tally: "3 accepted / 1 rejected",
      creative: false,
    });
  });

  it("carries the creative flag through", () => {
    expect(optionRow({ ...option, creative: true }).creative).toBe(true);
  });

  it("blocks blank alternative text client-side", () => {
    expect(validateAlternative("")).toBeNull();
    expect(validateAlternative("   \n\t")).toBeNull();
    expect(validateAlternative("  borrow staff ")).toBe("borrow staff");
  });
});

describe("forecast explorer", () => {
  const completion: Forecast = {
    uuid: "fc-sim-wo-1",
    model_uuid: "sim-model-1",
    kind: "completion_time",
    properties: {
      work_order_uuid: "wo-1",
      p10: "2019-10-01T12:00:00.000Z",
      p50: "2019-10-01T14:00:00.000Z",
      p90: "2019-10-01T20:00:00.000Z",
      low_confidence: false,
      trials: 2000,
    },
  };

  it("shows completion quantiles keyed by work order", () => {
    const row = forecastRow(completion);
    expect(row.subject).toBe("work order wo-1");
    expect(row.kind).toBe("completion time");
    expect(row.values).toBe(
      "p10 2019-10-01T12:00:00.000Z · p50 2019-10-01T14:00:00.000Z · p90 2019-10-01T20:00:00.000Z",
    );
    expect(row.warning).toBeNull();
  });

  it("flags low-confidence completion forecasts", () => {
    const row = forecastRow({
      ...completion,
      properties: { ...completion.properties, low_confidence: true },
    });
    expect(row.warning).toBe("low confidence");
  });

  it("checks p10 <= p50 <= p90 for both numbers and timestamps", () => {
    expect(quantilesOrdered({ p10: 1, p50: 2, p90: 3 })).toBe(true);
    expect(quantilesOrdered({ p10: 3, p50: 2, p90: 1 })).toBe(false);
    expect(quantilesOrdered(completion.properties)).toBe(true);
    expect(
      quantilesOrdered({ ...completion.properties, p90: "2019-10-01T01:00:00.000Z" }),
    ).toBe(false);
    expect(quantilesOrdered({})).toBe(true);
  });

  it("shows demand forecasts as material → client with the value", () => {
    const row = forecastRow({
      uuid: "fc-dem-1",
      model_uuid: "reg-model-h1",
      kind: "demand",
      properties: {
        material_uuid: "m-1",
        client_uuid: "c-1",
        target_date: "2019-07-01",
        value: 4.25,
        clamped: false,
      },
    });
    expect(row).toEqual({
      uuid: "fc-dem-1",
      subject: "m-1 → c-1",
      kind: "demand 2019-07-01",
      values: "4.25",
      warning: null,
    });
  });

  it("flags clamped demand values", () => {
    const row = forecastRow({
      uuid: "fc-dem-2",
      model_uuid: "reg-model-h2",
      kind: "demand",
      properties: { material_uuid: "m", client_uuid: "c", value: 0, clamped: true },
    });
    expect(row.warning).toBe("clamped to 0");
  });
});

describe("escapeHtml", () => {
  it("escapes markup-significant characters", () => {
    expect(escapeHtml(`<b a="1">&`)).toBe("&lt;b a=&quot;1&quot;&gt;&amp;");
  });
});
