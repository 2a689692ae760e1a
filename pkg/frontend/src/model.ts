/** Pure view-model logic: everything the DOM layer displays is computed
 * here so it can be tested without a browser. */

import type { Forecast, Insight, Option } from "./api.js";

export type SeverityBand = "critical" | "high" | "medium" | "low";

export function severityBand(severity: number): SeverityBand {
  if (severity >= 0.75) return "critical";
  if (severity >= 0.5) return "high";
  if (severity >= 0.25) return "medium";
  return "low";
}

export function formatPercent(value: number): string {
  return `${Math.round(value * 100)}%`;
}

export const KIND_LABELS: Record<string, string> = {
  organizational_downtime: "Organizational downtime",
  stockout_risk: "Stockout risk",
  demand_spike: "Demand spike",
  stale_model: "Stale model",
};

export function kindLabel(kind: string): string {
  return KIND_LABELS[kind] ?? kind;
}

/** Most severe first; ties broken by date then uuid (mirrors the API's
 * contract so a stale or merged list still renders in a stable order). */
export function sortInsights(insights: Insight[]): Insight[] {
  return [...insights].sort(
    (a, b) =>
      b.severity - a.severity ||
      a.date.localeCompare(b.date) ||
      a.uuid.localeCompare(b.uuid),
  );
}

export interface InsightRow {
  uuid: string;
  title: string;
  date: string;
  severity: string;
  band: SeverityBand;
  description: string;
}

export function insightRow(insight: Insight): InsightRow {
  return {
    uuid: insight.uuid,
    title: kindLabel(insight.kind),
    date: insight.date.slice(0, 16).replace("T", " "),
    severity: formatPercent(insight.severity),
    band: severityBand(insight.severity),
    description: insight.description,
  };
}

export interface OptionRow {
  uuid: string;
  description: string;
  score: string;
  tally: string;
  creative: boolean;
}

export function optionRow(option: Option): OptionRow {
  return {
    uuid: option.option_uuid,
    description: option.description,
    score: formatPercent(option.score),
    tally: `${option.accepted} accepted / ${option.rejected} rejected`,
    creative: option.creative,
  };
}

/** Client-side guard for the "alternative" verdict: the engine rejects
 * blank text, so refuse to send it in the first place. */
export function validateAlternative(text: string): string | null {
  return text.trim().length > 0 ? text.trim() : null;
}

export interface ForecastRow {
  uuid: string;
  subject: string;
  kind: string;
  values: string;
  warning: string | null;
}

function num(props: Record<string, unknown>, key: string): number | null {
  const value = props[key];
  return typeof value === "number" ? value : null;
}

function hoursLabel(props: Record<string, unknown>): string | null {
  const p10 = props["p10"];
  const p50 = props["p50"];
  const p90 = props["p90"];
  if (p10 == null || p50 == null || p90 == null) return null;
  return `p10 ${p10} · p50 ${p50} · p90 ${p90}`;
}

export function forecastRow(forecast: Forecast): ForecastRow {
  const props = forecast.properties;
  if (forecast.kind === "completion_time") {
    const subject = String(props["work_order_uuid"] ?? forecast.uuid);
    const warning = [
      props["low_confidence"] ? "low confidence" : null,
      quantilesOrdered(props) ? null : "quantiles out of order",
    ]
      .filter((w) => w !== null)
      .join("; ");
    return {
      uuid: forecast.uuid,
      subject: `work order ${subject}`,
      kind: "completion time",
      values: hoursLabel(props) ?? "(no quantiles)",
      warning: warning || null,
    };
  }
  const material = String(props["material_uuid"] ?? "?");
  const client = String(props["client_uuid"] ?? "?");
  const value = num(props, "value");
  const clamped = props["clamped"] === true;
  return {
    uuid: forecast.uuid,
    subject: `${material} → ${client}`,
    kind: `demand ${String(props["target_date"] ?? "")}`.trim(),
    values: value === null ? "(no value)" : `${value}`,
    warning: clamped ? "clamped to 0" : null,
  };
}

/** True when p10 <= p50 <= p90 (string timestamps compare lexically,
 * numbers numerically); forecasts without quantiles pass. */
export function quantilesOrdered(props: Record<string, unknown>): boolean {
  const p10 = props["p10"];
  const p50 = props["p50"];
  const p90 = props["p90"];
  if (p10 == null || p50 == null || p90 == null) return true;
  if (typeof p10 === "number" && typeof p50 === "number" && typeof p90 === "number") {
    return p10 <= p50 && p50 <= p90;
  }
  return String(p10) <= String(p50) && String(p50) <= String(p90);
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
