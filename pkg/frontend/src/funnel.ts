/**
 * Funnel panel: bar view of the stage counts, startup/residual split, and a
 * what-if mode that re-runs the funnel server-side with a stage disabled.
 * All counts are rendered verbatim from the API payload.
 */

import { Api, ApiError, FunnelPayload, StageConfigEntry } from "./api.js";
import { ViewState } from "./state.js";

export class FunnelPanel {
  private disabled = new Set<string>();
  private baseline: StageConfigEntry[] | null = null;
  private readonly bars: HTMLElement;
  private readonly split: HTMLElement;
  private readonly whatIf: HTMLElement;
  private readonly staleFlag: HTMLElement;

  constructor(
    root: HTMLElement,
    private readonly api: Api,
    private readonly state: ViewState,
    private readonly onError: (message: string) => void,
  ) {
    root.innerHTML = "";
    this.staleFlag = el("div", "stale-indicator");
    this.staleFlag.hidden = true;
    this.staleFlag.textContent = "showing an older revision — refresh pending";
    this.bars = el("div", "funnel-bars");
    this.split = el("div", "funnel-split");
    this.whatIf = el("div", "what-if");
    root.append(this.staleFlag, this.bars, this.split, this.whatIf);
  }

  async refresh(): Promise<void> {
    let payload: FunnelPayload;
    try {
      payload = await this.api.funnel(this.activeConfig());
    } catch (error) {
      this.onError(error instanceof ApiError ? error.message : "API unreachable");
      return;
    }
    if (this.baseline === null) {
      // remember the server's stage list so what-if can subtract from it
      this.baseline = payload.stages.map((s) => ({
        id: s.stage_id,
        name: s.name,
        op: s.op,
        tags: s.tags,
      }));
      this.renderWhatIfToggles();
    }
    this.state.revision = payload.revision;
    this.render(payload);
    this.staleFlag.hidden = !this.state.stale;
  }

  private activeConfig(): StageConfigEntry[] | undefined {
    if (!this.baseline || this.disabled.size === 0) return undefined;
    return this.baseline.filter((s) => !this.disabled.has(s.id));
  }

  private render(payload: FunnelPayload): void {
    this.bars.innerHTML = "";
    const widest = Math.max(1, ...payload.stages.map((s) => s.input_count));
    for (const stage of payload.stages) {
      const row = el("div", "funnel-stage");
      row.dataset.stageId = stage.stage_id;
      const label = el("span", "stage-label");
      label.textContent = stage.stage_id;
      const bar = el("div", "stage-bar");
      bar.style.width = `${(stage.output_count / widest) * 100}%`;
      const count = el("span", "stage-count");
      count.textContent = `${stage.input_count} → ${stage.output_count}`;
      count.dataset.inputCount = String(stage.input_count);
      count.dataset.outputCount = String(stage.output_count);
      row.append(label, bar, count);
      this.bars.appendChild(row);
    }
    this.split.innerHTML = "";
    if (payload.startup_split) {
      const startup = el("span", "split-startup");
      startup.textContent = `startup ${payload.startup_split.startup_count}`;
      startup.dataset.count = String(payload.startup_split.startup_count);
      const residual = el("span", "split-residual");
      residual.textContent = `residual ${payload.startup_split.residual_count}`;
      residual.dataset.count = String(payload.startup_split.residual_count);
      this.split.append(startup, residual);
      this.state.residualIds = new Set(payload.startup_split.residual_ids);
    }
  }

  private renderWhatIfToggles(): void {
    this.whatIf.innerHTML = "";
    const caption = el("span", "what-if-caption");
    caption.textContent = "what-if: disable a stage";
    this.whatIf.appendChild(caption);
    for (const stage of this.baseline ?? []) {
      const label = el("label", "what-if-toggle");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.dataset.stageId = stage.id;
      box.addEventListener("change", () => {
        if (box.checked) this.disabled.add(stage.id);
        else this.disabled.delete(stage.id);
        void this.refresh();
      });
      label.appendChild(box);
      label.append(stage.id);
      this.whatIf.appendChild(label);
    }
  }
}

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}
