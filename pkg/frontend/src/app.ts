/** DOM wiring: insight board, option panel, forecast explorer. All
 * displayed values come from the view-model functions in model.ts. */

import { ApiClient, ApiError, type Insight } from "./api.js";
import {
  escapeHtml,
  forecastRow,
  insightRow,
  optionRow,
  sortInsights,
  validateAlternative,
} from "./model.js";

const POLL_MS = 10_000;

export class Dashboard {
  private selected: string | null = null;
  private insights: Insight[] = [];

  constructor(
    private readonly api: ApiClient,
    private readonly root: Document,
  ) {}

  async start(): Promise<void> {
    await this.refresh();
    setInterval(() => void this.refresh(), POLL_MS);
  }

  private el(id: string): HTMLElement {
    const element = this.root.getElementById(id);
    if (!element) throw new Error(`missing #${id}`);
    return element;
  }

  private async refresh(): Promise<void> {
    try {
      const [health, insights] = await Promise.all([
        this.api.health(),
        this.api.insights(),
      ]);
      this.el("banner").hidden = true;
      this.el("health").textContent =
        `${health.nodes} nodes · ${health.edges} relationships · v${health.version}`;
      this.insights = sortInsights(insights);
      this.renderInsights();
      await this.renderForecasts();
      if (this.selected) await this.renderOptions(this.selected);
    } catch (error) {
      this.showError(error, "server unreachable — retrying");
    }
  }

  private showError(error: unknown, fallback: string): void {
    const banner = this.el("banner");
    banner.hidden = false;
    banner.textContent =
      error instanceof ApiError ? `[${error.code}] ${error.message}` : fallback;
  }

  private renderInsights(): void {
    const board = this.el("insights");
    board.innerHTML = this.insights
      .map((insight) => {
        const row = insightRow(insight);
        const active = insight.uuid === this.selected ? " active" : "";
        return `<li class="insight ${row.band}${active}" data-uuid="${escapeHtml(row.uuid)}">
          <span class="badge">${row.severity}</span>
          <strong>${escapeHtml(row.title)}</strong>
          <time>${escapeHtml(row.date)}</time>
          <p>${escapeHtml(row.description)}</p>
        </li>`;
      })
      .join("");
    for (const item of Array.from(board.querySelectorAll<HTMLElement>(".insight"))) {
      item.addEventListener("click", () => {
        this.selected = item.dataset.uuid ?? null;
        this.renderInsights();
        if (this.selected) void this.renderOptions(this.selected);
      });
    }
  }

  private async renderOptions(insightUuid: string): Promise<void> {
    const panel = this.el("options");
    try {
      const options = await this.api.options(insightUuid);
      panel.innerHTML =
        options
          .map((option) => {
            const row = optionRow(option);
            const badge = row.creative ? `<span class="creative">creative</span>` : "";
            return `<li data-uuid="${escapeHtml(row.uuid)}">
              <span class="score">${row.score}</span>
              ${escapeHtml(row.description)} ${badge}
              <small>${escapeHtml(row.tally)}</small>
              <button data-verdict="accepted">accept</button>
              <button data-verdict="rejected">reject</button>
            </li>`;
          })
          .join("") +
        `<li class="alternative">
          <input id="alt-text" placeholder="suggest an alternative action" />
          <button id="alt-send">send</button>
        </li>`;
      for (const button of Array.from(
        panel.querySelectorAll<HTMLButtonElement>("button[data-verdict]"),
      )) {
        button.addEventListener("click", () =>
          void this.sendVerdict(insightUuid, button),
        );
      }
      this.el("alt-send").addEventListener("click", () =>
        void this.sendAlternative(insightUuid),
      );
    } catch (error) {
      this.showError(error, "could not load options");
    }
  }

  private async sendVerdict(insightUuid: string, button: HTMLButtonElement): Promise<void> {
    const optionUuid = button.closest("li")?.getAttribute("data-uuid");
    if (!optionUuid) return;
    try {
      await this.api.sendFeedback({
        insight_uuid: insightUuid,
        verdict: button.dataset.verdict as "accepted" | "rejected",
        user: "dashboard",
        option_uuid: optionUuid,
      });
      await this.renderOptions(insightUuid);
    } catch (error) {
      this.showError(error, "feedback failed");
    }
  }

  private async sendAlternative(insightUuid: string): Promise<void> {
    const input = this.el("alt-text") as HTMLInputElement;
    const text = validateAlternative(input.value);
    if (text === null) {
      this.showError(new ApiError(0, "ui.blank", "alternative text is required"), "");
      return;
    }
    try {
      await this.api.sendFeedback({
        insight_uuid: insightUuid,
        verdict: "alternative",
        user: "dashboard",
        alternative_text: text,
      });
      await this.renderOptions(insightUuid);
    } catch (error) {
      this.showError(error, "feedback failed");
    }
  }

  private async renderForecasts(): Promise<void> {
    const explorer = this.el("forecasts");
    const forecasts = await this.api.forecasts();
    explorer.innerHTML = forecasts
      .map((forecast) => {
        const row = forecastRow(forecast);
        const warning = row.warning
          ? `<span class="warning">${escapeHtml(row.warning)}</span>`
          : "";
        return `<tr>
          <td>${escapeHtml(row.subject)}</td>
          <td>${escapeHtml(row.kind)}</td>
          <td>${escapeHtml(row.values)} ${warning}</td>
        </tr>`;
      })
      .join("");
  }
}
