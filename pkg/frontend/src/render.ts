/** SVG graph and panel rendering.  Pure DOM, no framework. */

import { Evidence } from "./lookup.js";
import { Recommendation, Session, whatIf } from "./session.js";
import { Bundle, NodeDoc } from "./types.js";

interface Layout {
  pos: Map<string, { x: number; y: number }>;
  width: number;
  height: number;
}

const NODE_W = 110;
const NODE_H = 34;
const GAP_X = 28;
const GAP_Y = 52;

/** Layer nodes by longest distance from the root. */
export function layout(bundle: Bundle): Layout {
  const depth = new Map<string, number>();
  const order: string[] = [];
  const visit = (id: string, d: number) => {
    if ((depth.get(id) ?? -1) >= d) return;
    depth.set(id, d);
    for (const c of bundle.nodes.get(id)!.children) visit(c, d + 1);
  };
  visit(bundle.root, 0);
  for (const id of bundle.nodes.keys()) order.push(id);
  order.sort((a, b) => (depth.get(a)! - depth.get(b)!) || a.localeCompare(b));

  const layers = new Map<number, string[]>();
  for (const id of order) {
    const d = depth.get(id)!;
    if (!layers.has(d)) layers.set(d, []);
    layers.get(d)!.push(id);
  }
  const maxPerLayer = Math.max(...[...layers.values()].map((l) => l.length));
  const width = maxPerLayer * (NODE_W + GAP_X) + GAP_X;
  const height = layers.size * (NODE_H + GAP_Y) + GAP_Y;
  const pos = new Map<string, { x: number; y: number }>();
  for (const [d, ids] of layers) {
    const rowWidth = ids.length * (NODE_W + GAP_X) - GAP_X;
    const x0 = (width - rowWidth) / 2;
    ids.forEach((id, i) => {
      pos.set(id, { x: x0 + i * (NODE_W + GAP_X), y: GAP_Y + d * (NODE_H + GAP_Y) });
    });
  }
  return { pos, width, height };
}

function nodeText(node: NodeDoc): string {
  return node.label.length ? node.label.join(", ") : "(done)";
}

const SVG_NS = "http://www.w3.org/2000/svg";

export function renderGraph(svg: SVGSVGElement, session: Session): void {
  const { bundle, state } = session;
  const lay = layout(bundle);
  svg.setAttribute("viewBox", `0 0 ${lay.width} ${lay.height}`);
  svg.innerHTML = "";

  const visited = new Set(state.path);
  for (const node of bundle.nodes.values()) {
    const from = lay.pos.get(node.id)!;
    for (const c of node.children) {
      const to = lay.pos.get(c)!;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(from.x + NODE_W / 2));
      line.setAttribute("y1", String(from.y + NODE_H));
      line.setAttribute("x2", String(to.x + NODE_W / 2));
      line.setAttribute("y2", String(to.y));
      const walked = visited.has(node.id) && visited.has(c) &&
        state.path.indexOf(c) === state.path.indexOf(node.id) + 1;
      line.setAttribute("class", walked ? "edge walked" : "edge");
      svg.appendChild(line);
    }
  }

  for (const node of bundle.nodes.values()) {
    const p = lay.pos.get(node.id)!;
    const g = document.createElementNS(SVG_NS, "g");
    const classes = ["node", node.kind];
    if (node.id === state.cursor) classes.push("cursor");
    else if (visited.has(node.id)) classes.push("visited");
    g.setAttribute("class", classes.join(" "));

    if (node.kind === "decision") {
      const rect = document.createElementNS(SVG_NS, "rect");
      rect.setAttribute("x", String(p.x));
      rect.setAttribute("y", String(p.y));
      rect.setAttribute("width", String(NODE_W));
      rect.setAttribute("height", String(NODE_H));
      rect.setAttribute("rx", "4");
      g.appendChild(rect);
    } else {
      const ell = document.createElementNS(SVG_NS, "ellipse");
      ell.setAttribute("cx", String(p.x + NODE_W / 2));
      ell.setAttribute("cy", String(p.y + NODE_H / 2));
      ell.setAttribute("rx", String(NODE_W / 2));
      ell.setAttribute("ry", String(NODE_H / 2));
      g.appendChild(ell);
      const inner = document.createElementNS(SVG_NS, "ellipse");
      inner.setAttribute("cx", String(p.x + NODE_W / 2));
      inner.setAttribute("cy", String(p.y + NODE_H / 2));
      inner.setAttribute("rx", String(NODE_W / 2 - 3));
      inner.setAttribute("ry", String(NODE_H / 2 - 3));
      inner.setAttribute("class", "inner");
      g.appendChild(inner);
    }
    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("x", String(p.x + NODE_W / 2));
    text.setAttribute("y", String(p.y + NODE_H / 2 + 4));
    text.setAttribute("text-anchor", "middle");
    text.textContent = nodeText(node);
    g.appendChild(text);
    svg.appendChild(g);
  }
}

export function describeRecommendation(bundle: Bundle, rec: Recommendation): string {
  switch (rec.type) {
    case "done":
      return "The strategy has run to completion.";
    case "observe": {
      const name = bundle.variables.get(rec.variable)?.name ?? rec.variable;
      return `Record the outcome of ${name} (${rec.variable}).`;
    }
    case "decide": {
      const name = bundle.variables.get(rec.variable)?.name ?? rec.variable;
      return `Recommended: ${name} (${rec.variable}) = ${rec.stateLabel}.`;
    }
  }
}

export function renderEvidence(el: HTMLElement, bundle: Bundle, evidence: Evidence): void {
  el.innerHTML = "";
  for (const [v, s] of Object.entries(evidence)) {
    const label = bundle.variables.get(v)?.states?.[s] ?? String(s);
    const li = document.createElement("li");
    li.textContent = `${v} = ${label}`;
    el.appendChild(li);
  }
}

export function renderWhatIf(el: HTMLElement, session: Session): void {
  el.innerHTML = "";
  const w = whatIf(session);
  if (w.kind === "none") {
    el.textContent = "No alternatives to compare here.";
    return;
  }
  const table = document.createElement("table");
  const head = document.createElement("tr");
  head.innerHTML = w.kind === "decision"
    ? "<th>option</th><th>value</th><th></th>"
    : "<th>branch</th><th>value</th><th></th>";
  table.appendChild(head);
  if (w.kind === "decision") {
    for (const opt of w.options) {
      const tr = document.createElement("tr");
      const mark = opt.state === w.recommended ? "← recommended" : "";
      tr.innerHTML = `<td>${w.variable} = ${opt.label}</td>` +
        `<td>${opt.value === null ? "-" : opt.value.toFixed(4)}</td><td>${mark}</td>`;
      if (opt.state === w.recommended) tr.className = "best";
      table.appendChild(tr);
    }
  } else {
    for (const opt of w.options) {
      const tr = document.createElement("tr");
      const mark = opt.child === w.chosen ? "← taken" : "";
      tr.innerHTML = `<td>continue at ${opt.child}</td>` +
        `<td>${opt.value === null ? "-" : opt.value.toFixed(4)}</td><td>${mark}</td>`;
      if (opt.child === w.chosen) tr.className = "best";
      table.appendChild(tr);
    }
  }
  el.appendChild(table);
}
