// Side-by-side diff with sequential replay: source pane left, target pane
// right, and a slider that walks the recorded steps one at a time.

import type { ApiClient } from "./api.js";
import type { DiffPayload } from "./types.js";

export class DiffView {
  constructor(
    readonly container: HTMLElement,
    readonly api: ApiClient,
  ) {}

  async open(src: number, dst: number): Promise<DiffPayload> {
    const doc = this.container.ownerDocument;
    const payload = await this.api.getDiff(src, dst);
    this.container.textContent = "";
    this.container.classList.add("open");

    const header = doc.createElement("div");
    header.className = "diff-header";
    header.textContent =
      `Diff ${src} → ${dst}: ${payload.steps.length} step(s)` +
      (payload.pixel_delta ? `, ${payload.pixel_delta.count} pixel(s) changed` : "");
    this.container.appendChild(header);

    const panes = doc.createElement("div");
    panes.className = "diff-panes";

    const srcPane = doc.createElement("img");
    srcPane.className = "diff-pane diff-src";
    srcPane.src = this.api.imageUrl(src);
    panes.appendChild(srcPane);

    const framePane = doc.createElement("img");
    framePane.className = "diff-pane diff-frame";
    framePane.src = this.api.frameUrl(src, dst, 0);
    panes.appendChild(framePane);

    const dstPane = doc.createElement("img");
    dstPane.className = "diff-pane diff-dst";
    dstPane.src = this.api.imageUrl(dst);
    panes.appendChild(dstPane);

    this.container.appendChild(panes);

    const controls = doc.createElement("div");
    controls.className = "diff-controls";
    const slider = doc.createElement("input");
    slider.type = "range";
    slider.className = "diff-slider";
    slider.min = "0";
    slider.max = String(payload.steps.length);
    slider.step = "1";
    slider.value = "0";
    controls.appendChild(slider);

    const caption = doc.createElement("span");
    caption.className = "diff-caption";
    controls.appendChild(caption);
    this.container.appendChild(controls);

    const update = () => {
      const k = Number(slider.value);
      framePane.src = this.api.frameUrl(src, dst, k);
      caption.textContent =
        k === 0 ? `state of node ${src}` : `after step ${k}: ${payload.steps[k - 1].summary}`;
    };
    slider.addEventListener("input", update);
    update();
    return payload;
  }

  close(): void {
    this.container.textContent = "";
    this.container.classList.remove("open");
  }
}
