// SVG rendering of the history graph: numbered thumbnails, parent edges,
// click to select, double-click for the node info panel.

import type { DagPayload } from "./types.js";
import type { ApiClient } from "./api.js";
import { computeLayout } from "./layout.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const CELL_W = 96;
const CELL_H = 84;
const NODE_SIZE = 48;
const PAD = 24;

export interface DagViewHandlers {
  onSelect?: (id: number, selected: number[]) => void;
  onOpenInfo?: (id: number) => void;
}

export class DagView {
  readonly selected: number[] = [];

  constructor(
    readonly container: HTMLElement,
    readonly api: ApiClient,
    readonly handlers: DagViewHandlers = {},
  ) {}

  render(dag: DagPayload): void {
    const doc = this.container.ownerDocument;
    this.container.textContent = "";
    const layout = computeLayout(dag.nodes.map((n) => ({ id: n.id, parents: n.parents })));

    const svg = doc.createElementNS(SVG_NS, "svg");
    svg.setAttribute("class", "dag-svg");
    svg.setAttribute("width", String(dag.nodes.length * CELL_W + PAD * 2));
    svg.setAttribute("height", String(layout.laneCount * CELL_H + PAD * 2));

    const cx = (col: number) => PAD + col * CELL_W + NODE_SIZE / 2;
    const cy = (lane: number) => PAD + lane * CELL_H + NODE_SIZE / 2;

    for (const [parent, child] of layout.edges) {
      const p = layout.positions.get(parent)!;
      const c = layout.positions.get(child)!;
      const path = doc.createElementNS(SVG_NS, "path");
      const x1 = cx(p.col) + NODE_SIZE / 2;
      const y1 = cy(p.lane);
      const x2 = cx(c.col) - NODE_SIZE / 2;
      const y2 = cy(c.lane);
      const mid = (x1 + x2) / 2;
      path.setAttribute("d", `M ${x1} ${y1} C ${mid} ${y1}, ${mid} ${y2}, ${x2} ${y2}`);
      path.setAttribute("class", "dag-edge");
      path.setAttribute("data-edge", `${parent}-${child}`);
      svg.appendChild(path);
    }

    for (const node of dag.nodes) {
      const place = layout.positions.get(node.id)!;
      const group = doc.createElementNS(SVG_NS, "g");
      group.setAttribute("class", "dag-node" + (dag.heads.includes(node.id) ? " head" : ""));
      group.setAttribute("data-node-id", String(node.id));
      group.setAttribute(
        "transform",
        `translate(${cx(place.col) - NODE_SIZE / 2}, ${cy(place.lane) - NODE_SIZE / 2})`,
      );

      const frame = doc.createElementNS(SVG_NS, "rect");
      frame.setAttribute("width", String(NODE_SIZE));
      frame.setAttribute("height", String(NODE_SIZE));
      frame.setAttribute("class", "dag-node-frame");
      group.appendChild(frame);

      const image = doc.createElementNS(SVG_NS, "image");
      image.setAttribute("href", node.thumbnail);
      image.setAttribute("width", String(NODE_SIZE));
      image.setAttribute("height", String(NODE_SIZE));
      image.setAttribute("preserveAspectRatio", "xMidYMid meet");
      group.appendChild(image);

      const label = doc.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(NODE_SIZE / 2));
      label.setAttribute("y", String(NODE_SIZE + 14));
      label.setAttribute("class", "dag-node-number");
      label.textContent = String(node.id);
      group.appendChild(label);

      const title = doc.createElementNS(SVG_NS, "title");
      title.textContent = `${node.id}: ${node.summary} (${node.author}, ${node.timestamp})`;
      group.appendChild(title);

      group.addEventListener("click", () => this.toggleSelect(node.id));
      group.addEventListener("dblclick", () => this.handlers.onOpenInfo?.(node.id));
      svg.appendChild(group);
    }

    this.container.appendChild(svg);
    this.refreshSelection();
  }

  toggleSelect(id: number): void {
    const index = this.selected.indexOf(id);
    if (index !== -1) {
      this.selected.splice(index, 1);
    } else {
      this.selected.push(id);
      while (this.selected.length > 2) this.selected.shift();
    }
    this.refreshSelection();
    this.handlers.onSelect?.(id, [...this.selected]);
  }

  private refreshSelection(): void {
    for (const group of Array.from(this.container.querySelectorAll("g.dag-node"))) {
      const id = Number(group.getAttribute("data-node-id"));
      group.classList.toggle("selected", this.selected.includes(id));
    }
  }
}
