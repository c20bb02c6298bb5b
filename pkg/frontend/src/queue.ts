/** Review queue ordering and navigation.
 *
 * Items are visited in (sentence id, predicate index) order — the numeric
 * suffix is compared as a number, so "s2#9" comes before "s2#10".
 */

import type { ItemSummary } from "./types.js";

export function splitKey(key: string): { sentenceId: string; predicateIndex: number } {
  const at = key.lastIndexOf("#");
  if (at === -1) {
    return { sentenceId: key, predicateIndex: -1 };
  }
  const tail = key.slice(at + 1);
  const index = /^\d+$/.test(tail) ? Number(tail) : -1;
  return index >= 0
    ? { sentenceId: key.slice(0, at), predicateIndex: index }
    : { sentenceId: key, predicateIndex: -1 };
}

export function compareKeys(a: string, b: string): number {
  const ka = splitKey(a);
  const kb = splitKey(b);
  if (ka.sentenceId !== kb.sentenceId) {
    return ka.sentenceId < kb.sentenceId ? -1 : 1;
  }
  return ka.predicateIndex - kb.predicateIndex;
}

export interface QueueFilter {
  status?: "pending" | "reviewed";
  language?: string;
}

export function orderQueue(items: ItemSummary[], filter: QueueFilter = {}): ItemSummary[] {
  return items
    .filter((item) => !filter.status || item.status === filter.status)
    .filter((item) => !filter.language || item.language === filter.language)
    .slice()
    .sort((a, b) => compareKeys(a.key, b.key));
}

/** Next item after `currentKey` in queue order, wrapping; null when empty. */
export function nextKey(queue: ItemSummary[], currentKey: string | null): string | null {
  if (queue.length === 0) {
    return null;
  }
  if (currentKey === null) {
    return queue[0].key;
  }
  const at = queue.findIndex((item) => item.key === currentKey);
  if (at === -1) {
    // current item left the queue (e.g. it was just reviewed under a
    // pending-only filter): resume at the first key sorting after it
    const after = queue.find((item) => compareKeys(item.key, currentKey) > 0);
    return (after ?? queue[0]).key;
  }
  return queue[(at + 1) % queue.length].key;
}

export function previousKey(queue: ItemSummary[], currentKey: string | null): string | null {
  if (queue.length === 0) {
    return null;
  }
  if (currentKey === null) {
    return queue[queue.length - 1].key;
  }
  const at = queue.findIndex((item) => item.key === currentKey);
  if (at === -1) {
    return queue[0].key;
  }
  return queue[(at - 1 + queue.length) % queue.length].key;
}

export function isComplete(items: ItemSummary[]): boolean {
  return items.length > 0 && items.every((item) => item.status === "reviewed");
}
