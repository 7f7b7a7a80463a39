// User-goal checklist: the human evaluator's task card.
// Items tick themselves off as the conversation covers them.

import type { MessageReply } from "./api.js";

export interface DomainGoal {
  informables?: Record<string, string>;
  requestables?: string[];
  booking?: Record<string, string>;
}

export interface Goal {
  domains: Record<string, DomainGoal>;
}

export interface GoalItem {
  domain: string;
  kind: "inform" | "request" | "book";
  label: string;
  /** substring of the belief / response that marks the item satisfied */
  needle: string;
  done: boolean;
}

export function goalItems(goal: Goal): GoalItem[] {
  const items: GoalItem[] = [];
  for (const [domain, dg] of Object.entries(goal.domains)) {
    for (const [slot, value] of Object.entries(dg.informables ?? {})) {
      items.push({
        domain,
        kind: "inform",
        label: `tell the system: ${slot} = ${value}`,
        needle: `${slot} = ${value}`,
        done: false,
      });
    }
    for (const slot of dg.requestables ?? []) {
      items.push({
        domain,
        kind: "request",
        label: `find out the ${slot}`,
        needle: `the ${slot} is`,
        done: false,
      });
    }
    if (dg.booking) {
      const pairs = Object.entries(dg.booking)
        .map(([s, v]) => `${s} = ${v}`)
        .join(" , ");
      items.push({
        domain,
        kind: "book",
        label: `book it (${pairs})`,
        needle: "booking was successful",
        done: false,
      });
    }
  }
  return items;
}

/** Mark goal items satisfied by one system turn; returns true if anything changed. */
export function updateGoalItems(items: GoalItem[], reply: MessageReply): boolean {
  let changed = false;
  for (const item of items) {
    if (item.done) continue;
    const haystack =
      item.kind === "inform"
        ? reply.belief
        : `${reply.raw_response} ${reply.response}`;
    if (haystack.includes(item.needle)) {
      item.done = true;
      changed = true;
    }
  }
  return changed;
}

export function parseGoal(jsonText: string): Goal {
  const parsed = JSON.parse(jsonText) as unknown;
  // accept either one goal object or a goal-file array (first entry)
  const obj = Array.isArray(parsed) ? parsed[0] : parsed;
  if (!obj || typeof obj !== "object" || !("domains" in obj)) {
    throw new Error("not a goal: expected an object with a 'domains' map");
  }
  return obj as Goal;
}
