/**
 * Session engine: a live traversal of a solved strategy.
 *
 * The cursor walks the bundle's graph.  Observation labels wait for recorded
 * outcomes, decision labels recommend the policy's choice (recording a
 * different state is allowed and flagged), and branch nodes follow the
 * step-policy unless the user steers into a sibling.  Every recommendation is
 * a pure table lookup; nothing is re-solved here.
 */

import {
  branchAlternatives,
  decisionAlternatives,
  Evidence,
  policyChoice,
  stepChoice,
} from "./lookup.js";
import { Bundle, BundleError, NodeDoc, policyKey, validateBundle } from "./types.js";

export class NavigationError extends Error {}

export interface AdvanceEvent {
  variable: string;
  state: number;
}

export interface SessionState {
  cursor: string;
  /** Label variables still to record at the cursor, in forward order. */
  pending: string[];
  evidence: Evidence;
  /** Variables whose recorded value deviated from the recommendation, and
   * branch nodes where the user overrode the step-policy. */
  offPolicy: string[];
  /** The last branch crossing, kept for what-if reads and overrides. */
  lastBranch: { at: string; chosen: string } | null;
  /** Node ids visited so far, root first. */
  path: string[];
  finished: boolean;
}

export interface Session {
  bundle: Bundle;
  state: SessionState;
  trail: SessionState[];
}

export type Recommendation =
  | { type: "observe"; variable: string }
  | { type: "decide"; variable: string; state: number; stateLabel: string }
  | { type: "done" };

function orderedLabel(node: NodeDoc): string[] {
  if (node.kind === "decision") {
    return [...(node.decision_order ?? [...node.label].sort())];
  }
  return [...node.label].sort();
}

/** Advance the cursor while nothing needs recording: empty labels pass
 * through, single children are entered, branches follow the step-policy. */
function settle(bundle: Bundle, state: SessionState): SessionState {
  let { cursor, pending, lastBranch, finished } = state;
  const path = [...state.path];
  while (!finished && pending.length === 0) {
    const node = bundle.nodes.get(cursor)!;
    if (node.children.length === 0) {
      finished = true;
      break;
    }
    let next: string;
    if (node.children.length === 1) {
      next = node.children[0];
    } else {
      next = stepChoice(bundle.steps.get(node.id)!, state.evidence);
      lastBranch = { at: node.id, chosen: next };
    }
    cursor = next;
    path.push(next);
    pending = orderedLabel(bundle.nodes.get(next)!);
  }
  return { ...state, cursor, pending, lastBranch, path, finished };
}

export function loadBundle(doc: unknown): Session {
  const bundle = validateBundle(doc);
  const root = bundle.nodes.get(bundle.root)!;
  const state = settle(bundle, {
    cursor: bundle.root,
    pending: orderedLabel(root),
    evidence: {},
    offPolicy: [],
    lastBranch: null,
    path: [bundle.root],
    finished: false,
  });
  return { bundle, state, trail: [] };
}

export function recommendation(session: Session): Recommendation {
  const { bundle, state } = session;
  if (state.finished) return { type: "done" };
  const node = bundle.nodes.get(state.cursor)!;
  const variable = state.pending[0];
  if (node.kind === "observation") {
    return { type: "observe", variable };
  }
  const policy = bundle.policies.get(policyKey(node.id, variable))!;
  const choice = policyChoice(policy, state.evidence);
  const labels = bundle.variables.get(variable)!.states!;
  return { type: "decide", variable, state: choice, stateLabel: labels[choice] };
}

function recordAt(bundle: Bundle, state: SessionState, event: AdvanceEvent,
                  extraOffPolicy: string[]): SessionState {
  const node = bundle.nodes.get(state.cursor)!;
  const offPolicy = [...state.offPolicy, ...extraOffPolicy];
  if (node.kind === "decision") {
    const policy = bundle.policies.get(policyKey(node.id, event.variable))!;
    if (policyChoice(policy, state.evidence) !== event.state) {
      offPolicy.push(event.variable);
    }
  }
  const next: SessionState = {
    ...state,
    offPolicy,
    pending: state.pending.filter((v) => v !== event.variable),
    evidence: { ...state.evidence, [event.variable]: event.state },
  };
  return settle(bundle, next);
}

/** Record an observation outcome or a decision state and move the cursor.
 *
 * The event's variable must be pending at the cursor, or pending at a sibling
 * of the cursor under the last branch node (an explicit override of the
 * step-policy).  Anything else, in particular an observable that has not been
 * released yet, is rejected with an explanation.
 */
export function advance(session: Session, event: AdvanceEvent): Session {
  const { bundle, state } = session;
  if (state.finished) {
    throw new NavigationError("the strategy has run to completion");
  }
  const card = bundle.cards.get(event.variable);
  if (card === undefined) {
    throw new NavigationError(`unknown variable ${event.variable}`);
  }
  if (event.state < 0 || event.state >= card) {
    throw new NavigationError(`${event.variable} has no state ${event.state}`);
  }

  const node = bundle.nodes.get(state.cursor)!;
  const acceptable = node.kind === "observation"
    ? state.pending.includes(event.variable)
    : state.pending[0] === event.variable;
  if (acceptable) {
    const next = recordAt(bundle, state, event, []);
    return { bundle, state: next, trail: [...session.trail, state] };
  }

  // steering into a sibling branch: rewind the last automatic branch choice
  if (state.lastBranch && state.cursor === state.lastBranch.chosen) {
    const branchNode = bundle.nodes.get(state.lastBranch.at)!;
    for (const childId of branchNode.children) {
      if (childId === state.cursor) continue;
      const child = bundle.nodes.get(childId)!;
      const label = orderedLabel(child);
      const fits = child.kind === "observation"
        ? label.includes(event.variable)
        : label[0] === event.variable;
      if (fits) {
        const rerouted: SessionState = {
          ...state,
          cursor: childId,
          pending: label,
          lastBranch: { at: branchNode.id, chosen: childId },
          path: [...state.path.slice(0, -1), childId],
        };
        const next = recordAt(bundle, rerouted, event, [branchNode.id]);
        return { bundle, state: next, trail: [...session.trail, state] };
      }
    }
  }

  if (state.pending.length > 0) {
    throw new NavigationError(
      `${event.variable} is not up next: the current step covers ` +
      `${state.pending.join(", ")} (observations become available only once ` +
      `all their ancestor decisions are taken)`);
  }
  throw new NavigationError(`${event.variable} cannot be recorded here`);
}

export function undo(session: Session): Session {
  if (session.trail.length === 0) {
    throw new NavigationError("nothing to undo");
  }
  return {
    bundle: session.bundle,
    state: session.trail[session.trail.length - 1],
    trail: session.trail.slice(0, -1),
  };
}

export type WhatIf =
  | { kind: "decision"; variable: string; recommended: number;
      options: { state: number; label: string; value: number | null }[] }
  | { kind: "branch"; at: string; chosen: string;
      options: { child: string; value: number | null }[] }
  | { kind: "none" };

/** Read-only comparison of the alternatives at the cursor: the pending
 * decision's per-state utilities, or the per-branch totals of the last
 * branch crossing.  No session state changes. */
export function whatIf(session: Session): WhatIf {
  const { bundle, state } = session;
  if (!state.finished) {
    const node = bundle.nodes.get(state.cursor)!;
    if (node.kind === "decision" && state.pending.length > 0) {
      const variable = state.pending[0];
      const policy = bundle.policies.get(policyKey(node.id, variable))!;
      return {
        kind: "decision",
        variable,
        recommended: policyChoice(policy, state.evidence),
        options: decisionAlternatives(bundle, policy, state.evidence),
      };
    }
  }
  if (state.lastBranch) {
    const sp = session.bundle.steps.get(state.lastBranch.at)!;
    return {
      kind: "branch",
      at: state.lastBranch.at,
      chosen: state.lastBranch.chosen,
      options: branchAlternatives(bundle, sp, state.evidence),
    };
  }
  return { kind: "none" };
}

export { BundleError };
