/** Review view model: token-click span staging, local edit buffers, and the
 * save/conflict state machine.
 *
 * Spans are half-open token ranges [start, end). All staged spans are
 * validated against the token count of the server-provided record — the UI
 * never constructs an out-of-bounds span, whatever order tokens are clicked
 * in. Edits are staged locally and sent one at a time on save; a 409 puts the
 * model into "conflict" so the view can offer reload-and-merge.
 */

import type { ApiClient, SaveResult } from "./api.js";
import type { Category, EditOp, ItemDetail } from "./types.js";

export interface Span {
  start: number; // inclusive token index
  end: number; // exclusive token index
}

export function spanWithinBounds(span: Span, nTokens: number): boolean {
  return (
    Number.isInteger(span.start) &&
    Number.isInteger(span.end) &&
    span.start >= 0 &&
    span.start < span.end &&
    span.end <= nTokens
  );
}

/** Two-click span selection: first click anchors, second click completes.
 * Clicking tokens in either order yields the same half-open range. */
export class SpanSelection {
  private anchor: number | null = null;
  private staged: Span | null = null;

  constructor(readonly nTokens: number) {
    if (!Number.isInteger(nTokens) || nTokens <= 0) {
      throw new RangeError(`token count must be a positive integer, got ${nTokens}`);
    }
  }

  clickToken(index: number): Span {
    if (!Number.isInteger(index) || index < 0 || index >= this.nTokens) {
      throw new RangeError(`token index ${index} outside [0, ${this.nTokens})`);
    }
    if (this.anchor === null) {
      this.anchor = index;
      this.staged = { start: index, end: index + 1 };
    } else {
      const lo = Math.min(this.anchor, index);
      const hi = Math.max(this.anchor, index);
      this.staged = { start: lo, end: hi + 1 };
      this.anchor = null;
    }
    return this.staged;
  }

  current(): Span | null {
    return this.staged;
  }

  isAnchored(): boolean {
    return this.anchor !== null;
  }

  clear(): void {
    this.anchor = null;
    this.staged = null;
  }
}

export type HighlightKind = "predicate" | "answer" | "staged";

export interface Highlight {
  kind: HighlightKind;
  span: Span;
  qaIndex?: number;
}

export type ConflictState = { message: string; currentVersion: number } | null;

/** Queue of staged edits for one item plus the save workflow. */
export class ReviewModel {
  private staged: EditOp[] = [];
  private conflictState: ConflictState = null;

  constructor(
    private readonly api: ApiClient,
    public item: ItemDetail,
  ) {}

  get key(): string {
    return this.item.key;
  }

  get nTokens(): number {
    return this.item.record.tokens.length;
  }

  get dirty(): boolean {
    return this.staged.length > 0;
  }

  /** Unsaved edits block navigation (the view shows a confirm instead). */
  canNavigate(): boolean {
    return !this.dirty && this.conflictState === null;
  }

  conflict(): ConflictState {
    return this.conflictState;
  }

  pendingEdits(): readonly EditOp[] {
    return this.staged;
  }

  private requireQaIndex(qaIndex: number): void {
    if (!Number.isInteger(qaIndex) || qaIndex < 0 || qaIndex >= this.item.record.qas.length) {
      throw new RangeError(`qa index ${qaIndex} outside the record's QA list`);
    }
  }

  private requireSpan(span: Span): void {
    if (!spanWithinBounds(span, this.nTokens)) {
      throw new RangeError(
        `span [${span.start}, ${span.end}) outside token bounds for ${this.nTokens} tokens`,
      );
    }
  }

  stageAccept(): void {
    this.staged.push({ action: "accept" });
  }

  stageQuestionEdit(qaIndex: number, question: string, flag?: "minor" | "substantial"): void {
    this.requireQaIndex(qaIndex);
    if (!question.trim()) {
      throw new RangeError("question text must be non-empty");
    }
    this.staged.push({ action: "edit_question", qa_index: qaIndex, question, flag });
  }

  stageAnswerEdit(qaIndex: number, answerIndex: number, span: Span): void {
    this.requireQaIndex(qaIndex);
    this.requireSpan(span);
    this.staged.push({
      action: "edit_answer",
      qa_index: qaIndex,
      answer_index: answerIndex,
      start: span.start,
      end: span.end,
    });
  }

  stageDelete(qaIndex: number): void {
    this.requireQaIndex(qaIndex);
    this.staged.push({ action: "delete_qa", qa_index: qaIndex });
  }

  stageAdd(question: string, spans: Span[], questionEn = ""): void {
    if (!question.trim()) {
      throw new RangeError("question text must be non-empty");
    }
    if (spans.length === 0) {
      throw new RangeError("a new QA needs at least one answer span");
    }
    for (const span of spans) {
      this.requireSpan(span);
    }
    this.staged.push({
      action: "add_qa",
      question,
      question_en: questionEn,
      answers: spans.map((s) => ({ start: s.start, end: s.end })),
    });
  }

  discardStaged(): void {
    this.staged = [];
  }

  /** Highlight ranges for the sentence view, derived from the server record
   * (predicate + saved answers) plus any locally staged spans. */
  highlights(stagedSelection: Span | null): Highlight[] {
    const out: Highlight[] = [];
    const record = this.item.record;
    out.push({
      kind: "predicate",
      span: { start: record.predicate.index, end: record.predicate.index + 1 },
    });
    record.qas.forEach((qa, qaIndex) => {
      for (const answer of qa.answers) {
        out.push({ kind: "answer", span: { start: answer.start, end: answer.end }, qaIndex });
      }
    });
    if (stagedSelection !== null) {
      this.requireSpan(stagedSelection);
      out.push({ kind: "staged", span: stagedSelection });
    }
    return out;
  }

  /** Send staged edits in order. Stops at the first conflict, leaving the
   * unsent edits staged so reload-and-merge can replay them. */
  async save(): Promise<SaveResult | null> {
    let last: SaveResult | null = null;
    while (this.staged.length > 0) {
      const edit = this.staged[0];
      const result = await this.api.saveEdit(this.key, this.item.version, edit);
      if (!result.ok) {
        this.conflictState = { message: result.message, currentVersion: result.currentVersion };
        return result;
      }
      this.item = result.item;
      this.staged.shift();
      last = result;
    }
    return last;
  }

  async tagCategory(qaIndex: number, category: Category): Promise<SaveResult> {
    this.requireQaIndex(qaIndex);
    const result = await this.api.tagCategory(this.key, qaIndex, this.item.version, category);
    if (!result.ok) {
      this.conflictState = { message: result.message, currentVersion: result.currentVersion };
    } else {
      this.item = result.item;
    }
    return result;
  }

  /** Merge path after a conflict: re-fetch the item (adopting the server's
   * version and record) and keep the staged edits queued for a retry. */
  async reloadAndMerge(): Promise<void> {
    this.item = await this.api.getItem(this.key);
    this.conflictState = null;
  }
}

/** Writing direction for the sentence view, from the record's language code. */
export function directionFor(language: string): "rtl" | "ltr" {
  return ["he", "ar", "fa", "ur", "yi"].includes(language) ? "rtl" : "ltr";
}
