/** Monitor browser: conjunctive tag/lamp filters, id-ordered pages, tag badges. */

import { Api, ApiError, MonitorItem } from "./api.js";
import { ViewState } from "./state.js";

const TAG_OPTIONS = [
  "",
  "DRIVER_INTERFACE",
  "VEHICLE_LEVEL",
  "YELLOW_DEFERRABLE",
  "RED_IMMEDIATE",
  "TRAILER_EXCLUDED",
  "STARTUP_CHECKABLE",
  "NEEDS_ADI_REQUIREMENT",
];
const LAMP_OPTIONS = ["", "RED", "YELLOW", "NONE"];

export class MonitorBrowser {
  private page = 1;
  private readonly list: HTMLElement;
  private readonly status: HTMLElement;
  private readonly pager: HTMLElement;

  constructor(
    root: HTMLElement,
    private readonly api: Api,
    private readonly state: ViewState,
    private readonly onError: (message: string) => void,
    private readonly onSelect: (monitorId: string) => void = () => {},
  ) {
    root.innerHTML = "";
    root.appendChild(this.filterBar());
    this.status = el("div", "monitor-status");
    this.list = el("ul", "monitor-list");
    this.pager = el("div", "monitor-pager");
    root.append(this.status, this.list, this.pager);
  }

  private filterBar(): HTMLElement {
    const bar = el("div", "filter-bar");
    bar.appendChild(
      select("tag-filter", TAG_OPTIONS, (value) => {
        this.state.filters.tag = value;
        this.page = 1;
        void this.refresh();
      }),
    );
    bar.appendChild(
      select("lamp-filter", LAMP_OPTIONS, (value) => {
        this.state.filters.lamp = value;
        this.page = 1;
        void this.refresh();
      }),
    );
    const clear = el("button", "clear-filters");
    clear.textContent = "clear filters";
    clear.addEventListener("click", () => {
      this.state.filters.tag = "";
      this.state.filters.lamp = "";
      this.page = 1;
      for (const dropdown of bar.querySelectorAll("select")) dropdown.value = "";
      void this.refresh();
    });
    bar.appendChild(clear);
    return bar;
  }

  async refresh(): Promise<void> {
    let pageData;
    try {
      pageData = await this.api.monitors({
        tag: this.state.filters.tag,
        lamp: this.state.filters.lamp,
        page: this.page,
      });
    } catch (error) {
      this.onError(error instanceof ApiError ? error.message : "API unreachable");
      return;
    }
    this.status.textContent = `${pageData.total} monitors (page ${pageData.page})`;
    this.status.dataset.total = String(pageData.total);
    this.list.innerHTML = "";
    for (const monitor of pageData.monitors) {
      this.list.appendChild(this.row(monitor));
    }
    this.renderPager(pageData.total, pageData.page, pageData.page_size);
  }

  private row(monitor: MonitorItem): HTMLElement {
    const item = el("li", "monitor-row");
    item.dataset.monitorId = monitor.id;
    const head = el("div", "monitor-head");
    const name = el("span", "monitor-id");
    name.textContent = monitor.id;
    const lamp = el("span", `lamp lamp-${monitor.lamp.toLowerCase()}`);
    lamp.textContent = monitor.lamp;
    head.append(name, lamp);
    const description = el("div", "monitor-description");
    description.textContent = monitor.description;
    const badges = el("div", "tag-badges");
    for (const tag of monitor.tags) {
      const badge = el("span", "tag-badge");
      badge.textContent = tag;
      badges.appendChild(badge);
    }
    item.append(head, description, badges);
    item.addEventListener("click", () => {
      this.state.selectedMonitor = monitor.id;
      this.onSelect(monitor.id);
    });
    return item;
  }

  private renderPager(total: number, page: number, pageSize: number): void {
    this.pager.innerHTML = "";
    const pages = Math.max(1, Math.ceil(total / pageSize));
    const previous = el("button", "page-prev");
    previous.textContent = "prev";
    previous.disabled = page <= 1;
    previous.addEventListener("click", () => {
      this.page = page - 1;
      void this.refresh();
    });
    const next = el("button", "page-next");
    next.textContent = "next";
    next.disabled = page >= pages;
    next.addEventListener("click", () => {
      this.page = page + 1;
      void this.refresh();
    });
    const label = el("span", "page-label");
    label.textContent = `${page} / ${pages}`;
    this.pager.append(previous, label, next);
  }
}

function el(tag: string, className: string): HTMLElement & { disabled?: boolean } {
  const node = document.createElement(tag);
  node.className = className;
  return node as HTMLElement & { disabled?: boolean };
}

function select(
  className: string,
  options: string[],
  onChange: (value: string) => void,
): HTMLSelectElement {
  const dropdown = document.createElement("select");
  dropdown.className = className;
  for (const option of options) {
    const entry = document.createElement("option");
    entry.value = option;
    entry.textContent = option || "(any)";
    dropdown.appendChild(entry);
  }
  dropdown.addEventListener("change", () => onChange(dropdown.value));
  return dropdown;
}
