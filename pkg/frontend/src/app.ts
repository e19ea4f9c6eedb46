/**
 * Dashboard bootstrap: header with revision and completeness-free counters,
 * monitor browser, question flow and funnel panel wired to one Api instance.
 * After every accepted mutation the panels refetch, so each number on screen
 * is an API response for the revision shown in the header.
 */

import { Api, ApiError } from "./api.js";
import { FunnelPanel } from "./funnel.js";
import { MonitorBrowser } from "./monitors.js";
import { QuestionFlow } from "./questions.js";
import { ViewState } from "./state.js";

export interface App {
  state: ViewState;
  refreshAll: () => Promise<void>;
  monitors: MonitorBrowser;
  questions: QuestionFlow;
  funnel: FunnelPanel;
}

export function mountApp(root: HTMLElement, api: Api = new Api()): App {
  const state = new ViewState();
  root.innerHTML = "";

  const banner = element("div", "error-banner");
  banner.hidden = true;
  const header = element("header", "app-header");
  const title = element("span", "app-title");
  title.textContent = "safescope review";
  const revisionBadge = element("span", "revision-badge");
  const exportButton = document.createElement("button");
  exportButton.className = "export-report";
  exportButton.textContent = "export report";
  header.append(title, revisionBadge, exportButton);

  const main = element("main", "app-main");
  const monitorsRoot = element("section", "panel monitors-panel");
  const questionsRoot = element("section", "panel questions-panel");
  const funnelRoot = element("section", "panel funnel-panel");
  main.append(monitorsRoot, questionsRoot, funnelRoot);
  root.append(banner, header, main);

  const showError = (message: string): void => {
    banner.hidden = false;
    banner.textContent = `API problem: ${message}`;
  };
  const clearError = (): void => {
    banner.hidden = true;
    banner.textContent = "";
  };

  const funnel = new FunnelPanel(funnelRoot, api, state, showError);
  const monitors = new MonitorBrowser(monitorsRoot, api, state, showError);
  const questions = new QuestionFlow(
    questionsRoot,
    api,
    state,
    async (newRevision) => {
      state.revision = newRevision;
      await refreshAll();
    },
    showError,
  );

  async function refreshAll(): Promise<void> {
    clearError();
    try {
      const health = await api.health();
      state.healthRevision = health.revision;
      state.revision = health.revision;
      revisionBadge.textContent = `revision ${health.revision}`;
      revisionBadge.dataset.revision = String(health.revision);
    } catch (error) {
      showError(error instanceof ApiError ? error.message : "API unreachable");
      return;
    }
    // funnel first: it feeds residual ids into the question ordering
    await funnel.refresh();
    await monitors.refresh();
    await questions.refresh();
  }

  exportButton.addEventListener("click", () => {
    void (async () => {
      try {
        const report = await api.report();
        const blob = new Blob([JSON.stringify(report, null, 2)], {
          type: "application/json",
        });
        const link = document.createElement("a");
        link.href = URL.createObjectURL(blob);
        link.download = "subsystem_report.json";
        link.click();
        URL.revokeObjectURL(link.href);
      } catch (error) {
        showError(error instanceof ApiError ? error.message : "API unreachable");
      }
    })();
  });

  return { state, refreshAll, monitors, questions, funnel };
}

function element(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}
