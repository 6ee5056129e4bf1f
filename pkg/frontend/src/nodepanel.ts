// Node info panel: revision image, metadata, annotation editor, and the
// "start a branch from here" form.

import { ApiError, type ApiClient } from "./api.js";

// operation name -> parameter fields offered by the branch form
export const BRANCH_OPS: Record<string, string[]> = {
  Invert: [],
  Mirror: [],
  Flip: [],
  Transpose: [],
  BlackWhite: [],
  Sepia: [],
  Histogram: [],
  Reset: [],
  Brightness: ["factor"],
  Solarize: ["threshold"],
  Posterize: ["bits"],
  Scale: ["scale_w", "scale_h"],
  Crop: ["x0", "y0", "w", "h"],
  Text: ["x0", "y0", "text", "scale", "color"],
  Brush: ["points", "radius", "color"],
};

export interface NodePanelHandlers {
  onChanged?: () => void;
  onError?: (message: string) => void;
}

export class NodePanel {
  constructor(
    readonly container: HTMLElement,
    readonly api: ApiClient,
    readonly handlers: NodePanelHandlers = {},
  ) {}

  async open(id: number): Promise<void> {
    const doc = this.container.ownerDocument;
    const node = await this.api.getNode(id);
    this.container.textContent = "";
    this.container.classList.add("open");

    const title = doc.createElement("h2");
    title.className = "panel-title";
    title.textContent = `Node ${node.id}: ${node.summary}`;
    this.container.appendChild(title);

    const image = doc.createElement("img");
    image.className = "panel-image";
    image.src = node.image;
    this.container.appendChild(image);

    const meta = doc.createElement("dl");
    meta.className = "panel-meta";
    const rows: Array<[string, string]> = [
      ["author", node.author],
      ["time", node.timestamp],
      ["size", `${node.width}×${node.height}`],
      ["parents", node.parents.join(", ") || "(root)"],
    ];
    for (const [key, value] of rows) {
      const dt = doc.createElement("dt");
      dt.textContent = key;
      const dd = doc.createElement("dd");
      dd.textContent = value;
      dd.setAttribute("data-meta", key);
      meta.append(dt, dd);
    }
    this.container.appendChild(meta);

    // annotation editor
    const noteBox = doc.createElement("textarea");
    noteBox.className = "panel-note";
    noteBox.value = node.note;
    this.container.appendChild(noteBox);
    const saveNote = doc.createElement("button");
    saveNote.className = "panel-save-note";
    saveNote.textContent = "Save note";
    saveNote.addEventListener("click", async () => {
      try {
        await this.api.annotate(node.id, noteBox.value);
        this.handlers.onChanged?.();
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          // another writer got there first: reload the panel and say so
          await this.open(node.id);
          this.handlers.onError?.("note not saved: another writer holds the project; panel reloaded");
        } else {
          this.handlers.onError?.(String(err));
        }
      }
    });
    this.container.appendChild(saveNote);

    // branch form
    const form = doc.createElement("form");
    form.className = "panel-branch";
    const opSelect = doc.createElement("select");
    opSelect.className = "branch-op";
    for (const name of Object.keys(BRANCH_OPS)) {
      const option = doc.createElement("option");
      option.value = name;
      option.textContent = name;
      opSelect.appendChild(option);
    }
    form.appendChild(opSelect);

    const paramBox = doc.createElement("div");
    paramBox.className = "branch-params";
    form.appendChild(paramBox);

    const renderParams = () => {
      paramBox.textContent = "";
      for (const key of BRANCH_OPS[opSelect.value]) {
        const label = doc.createElement("label");
        label.textContent = key;
        const input = doc.createElement("input");
        input.name = key;
        input.setAttribute("data-param", key);
        label.appendChild(input);
        paramBox.appendChild(label);
      }
    };
    opSelect.addEventListener("change", renderParams);
    renderParams();

    const branchButton = doc.createElement("button");
    branchButton.type = "submit";
    branchButton.className = "branch-submit";
    branchButton.textContent = "Start branch";
    form.appendChild(branchButton);
    form.addEventListener("submit", async (event) => {
      event.preventDefault();
      const params: Record<string, string> = {};
      for (const input of Array.from(paramBox.querySelectorAll("input"))) {
        if (input.value !== "") params[input.name] = input.value;
      }
      try {
        await this.api.branch(node.id, opSelect.value, params);
        this.handlers.onChanged?.();
      } catch (err) {
        this.handlers.onError?.(String(err));
      }
    });
    this.container.appendChild(form);
  }

  close(): void {
    this.container.textContent = "";
    this.container.classList.remove("open");
  }
}
