/** Keyboard shortcuts for the review loop.
 *
 *   a        accept current item and advance
 *   n / j    next item        p / k    previous item
 *   s        save staged edits
 *   1-4      tag the focused QA with M / V / P / R
 *   Escape   clear the staged token selection
 *
 * Shortcuts are suppressed while typing in a form field.
 */

import { CATEGORIES, type Category } from "./types.js";

export type KeyAction =
  | { kind: "accept-next" }
  | { kind: "next" }
  | { kind: "previous" }
  | { kind: "save" }
  | { kind: "clear-selection" }
  | { kind: "category"; category: Category };

export interface KeyEventLike {
  key: string;
  ctrlKey?: boolean;
  metaKey?: boolean;
  altKey?: boolean;
  targetTag?: string; // lowercase tag name of the event target
}

const EDITABLE_TAGS = new Set(["input", "textarea", "select"]);

export function actionFor(event: KeyEventLike): KeyAction | null {
  if (event.ctrlKey || event.metaKey || event.altKey) {
    return null;
  }
  if (event.targetTag && EDITABLE_TAGS.has(event.targetTag)) {
    return event.key === "Escape" ? { kind: "clear-selection" } : null;
  }
  switch (event.key) {
    case "a":
      return { kind: "accept-next" };
    case "n":
    case "j":
      return { kind: "next" };
    case "p":
    case "k":
      return { kind: "previous" };
    case "s":
      return { kind: "save" };
    case "Escape":
      return { kind: "clear-selection" };
    default: {
      const slot = Number(event.key);
      if (Number.isInteger(slot) && slot >= 1 && slot <= CATEGORIES.length) {
        return { kind: "category", category: CATEGORIES[slot - 1] };
      }
      return null;
    }
  }
}
