/**
 * Flat-table index math shared by the session engine and the what-if panel.
 * Tables are row-major with the last domain variable varying fastest.
 */

import { Bundle, PolicyDoc, StepPolicyDoc, TableDoc } from "./types.js";

export type Evidence = Readonly<Record<string, number>>;

export function flatIndex(domain: string[], cards: number[], evidence: Evidence): number {
  let idx = 0;
  for (let i = 0; i < domain.length; i++) {
    const v = domain[i];
    const s = evidence[v];
    if (s === undefined) {
      throw new Error(`value for ${v} is not known yet`);
    }
    idx = idx * cards[i] + s;
  }
  return idx;
}

export function policyChoice(p: PolicyDoc, evidence: Evidence): number {
  return p.choices[flatIndex(p.domain, p.cards, evidence)];
}

export function stepChoice(sp: StepPolicyDoc, evidence: Evidence): string {
  return sp.choices[flatIndex(sp.domain, sp.cards, evidence)];
}

export function tableAt(bundle: Bundle, t: TableDoc, evidence: Evidence): number {
  const cards = t.domain.map((v) => bundle.cards.get(v)!);
  return t.values[flatIndex(t.domain, cards, evidence)];
}

/** Utility of each alternative state of a pending decision, from the
 * pre-argmax table stored with its policy. */
export function decisionAlternatives(
  bundle: Bundle, p: PolicyDoc, evidence: Evidence,
): { state: number; label: string; value: number | null }[] {
  const card = bundle.cards.get(p.decision)!;
  const states = bundle.variables.get(p.decision)!.states!;
  const out = [];
  for (let s = 0; s < card; s++) {
    let value: number | null = null;
    if (p.values) {
      value = tableAt(bundle, p.values, { ...evidence, [p.decision]: s });
    }
    out.push({ state: s, label: states[s], value });
  }
  return out;
}

/** Per-branch utility totals at a step-policy node. */
export function branchAlternatives(
  bundle: Bundle, sp: StepPolicyDoc, evidence: Evidence,
): { child: string; value: number | null }[] {
  return sp.children.map((child) => {
    const bv = sp.branch_values.find((b) => b.child === child);
    return { child, value: bv ? tableAt(bundle, bv, evidence) : null };
  });
}
