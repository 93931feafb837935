/** Browser wiring: file loading, panels, event input, undo. */

import {
  advance,
  loadBundle,
  NavigationError,
  recommendation,
  Session,
  undo,
} from "./session.js";
import {
  describeRecommendation,
  renderEvidence,
  renderGraph,
  renderWhatIf,
} from "./render.js";
import { BundleError } from "./types.js";

let session: Session | null = null;

const $ = (id: string) => document.getElementById(id)!;

function refresh(): void {
  const errorEl = $("error");
  errorEl.textContent = "";
  if (!session) return;
  const { bundle, state } = session;
  $("meu").textContent = `Strategy value: ${bundle.meu.toPrecision(12)}`;
  $("recommendation").textContent =
    describeRecommendation(bundle, recommendation(session));
  renderGraph($("graph") as unknown as SVGSVGElement, session);
  renderEvidence($("evidence"), bundle, state.evidence);
  renderWhatIf($("whatif"), session);
  ($("undo") as HTMLButtonElement).disabled = session.trail.length === 0;
  $("offpolicy").textContent = state.offPolicy.length
    ? `Off-policy steps: ${state.offPolicy.join(", ")}`
    : "";

  const inputs = $("inputs");
  inputs.innerHTML = "";
  if (state.finished) return;
  const node = bundle.nodes.get(state.cursor)!;
  const candidates = node.kind === "observation" ? state.pending : state.pending.slice(0, 1);
  for (const v of candidates) {
    const variable = bundle.variables.get(v)!;
    const row = document.createElement("div");
    row.className = "input-row";
    const span = document.createElement("span");
    span.textContent = `${variable.name ?? v} (${v}): `;
    row.appendChild(span);
    variable.states!.forEach((label, s) => {
      const btn = document.createElement("button");
      btn.textContent = label;
      btn.onclick = () => {
        try {
          session = advance(session!, { variable: v, state: s });
        } catch (e) {
          if (e instanceof NavigationError) {
            $("error").textContent = e.message;
            return;
          }
          throw e;
        }
        refresh();
      };
      row.appendChild(btn);
    });
    inputs.appendChild(row);
  }
}

function load(text: string): void {
  try {
    session = loadBundle(JSON.parse(text));
  } catch (e) {
    session = null;
    $("error").textContent = e instanceof BundleError
      ? `Could not load bundle: ${e.message}`
      : `Could not load bundle: ${String(e)}`;
    return;
  }
  refresh();
}

($("file") as HTMLInputElement).addEventListener("change", (ev) => {
  const input = ev.target as HTMLInputElement;
  const file = input.files?.[0];
  if (!file) return;
  file.text().then(load);
});

$("undo").addEventListener("click", () => {
  if (!session || session.trail.length === 0) return;
  session = undo(session);
  refresh();
});
