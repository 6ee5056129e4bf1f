// Application wiring: toolbar actions, graph view, info panel, diff view.

import { ApiClient, ApiError } from "./api.js";
import { DagView } from "./dagview.js";
import { DiffView } from "./diffview.js";
import { NodePanel } from "./nodepanel.js";

export class App {
  readonly api: ApiClient;
  readonly dagView: DagView;
  readonly nodePanel: NodePanel;
  readonly diffView: DiffView;
  private readonly banner: HTMLElement;
  private readonly status: HTMLElement;

  constructor(readonly root: HTMLElement, apiBase = "") {
    this.api = new ApiClient(apiBase);
    root.innerHTML = `
      <header class="toolbar">
        <span class="project-name"></span>
        <button data-action="refresh">Refresh</button>
        <button data-action="diff">Diff</button>
        <button data-action="merge">Merge</button>
        <button data-action="commit">Commit</button>
        <button data-action="push">Push</button>
        <button data-action="pull">Pull</button>
        <span class="selection-hint"></span>
      </header>
      <div class="banner" hidden></div>
      <main>
        <section class="dag-container"></section>
        <aside class="node-panel"></aside>
      </main>
      <section class="diff-container"></section>
    `;
    this.banner = root.querySelector(".banner") as HTMLElement;
    this.status = root.querySelector(".selection-hint") as HTMLElement;
    this.dagView = new DagView(root.querySelector(".dag-container") as HTMLElement, this.api, {
      onSelect: (_id, selected) => {
        this.status.textContent = selected.length
          ? `selected: ${selected.join(", ")}`
          : "";
      },
      onOpenInfo: (id) => void this.openInfo(id),
    });
    this.nodePanel = new NodePanel(root.querySelector(".node-panel") as HTMLElement, this.api, {
      onChanged: () => void this.refresh(),
      onError: (message) => this.showError(message),
    });
    this.diffView = new DiffView(root.querySelector(".diff-container") as HTMLElement, this.api);

    for (const button of Array.from(root.querySelectorAll("button[data-action]"))) {
      button.addEventListener("click", () =>
        void this.runAction((button as HTMLElement).dataset.action!),
      );
    }
  }

  async refresh(): Promise<void> {
    try {
      const dag = await this.api.getDag();
      this.hideError();
      (this.root.querySelector(".project-name") as HTMLElement).textContent = dag.project;
      this.dagView.render(dag);
    } catch (err) {
      this.showError(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
    }
  }

  async openInfo(id: number): Promise<void> {
    try {
      await this.nodePanel.open(id);
    } catch (err) {
      this.showError(String(err));
    }
  }

  private async runAction(action: string): Promise<void> {
    const picked = this.dagView.selected;
    try {
      switch (action) {
        case "refresh":
          await this.refresh();
          break;
        case "diff":
          if (picked.length !== 2) throw new Error("select a source and a target node");
          await this.diffView.open(picked[0], picked[1]);
          break;
        case "merge":
          if (picked.length !== 2) throw new Error("select the two nodes to merge");
          await this.api.merge(picked[0], picked[1]);
          await this.refresh();
          break;
        case "commit": {
          const message = this.root.ownerDocument.defaultView?.prompt?.("Commit message") ?? "";
          await this.api.commit(message || "milestone");
          break;
        }
        case "push":
          await this.api.push();
          break;
        case "pull":
          await this.api.pull();
          await this.refresh();
          break;
      }
      if (action !== "refresh") this.hideError();
    } catch (err) {
      this.showError(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
    }
  }

  showError(message: string): void {
    this.banner.textContent = message;
    this.banner.hidden = false;
  }

  hideError(): void {
    this.banner.hidden = true;
    this.banner.textContent = "";
  }
}

export async function boot(root: HTMLElement, apiBase = ""): Promise<App> {
  const app = new App(root, apiBase);
  await app.refresh();
  return app;
}

// browser entry point; tests drive boot() directly instead
const autoRoot = typeof document !== "undefined" ? document.getElementById("app") : null;
if (autoRoot) {
  void boot(autoRoot);
}
