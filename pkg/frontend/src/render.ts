/** DOM rendering for the review screen. Pure functions from state to
 * elements; all interaction is delegated to callbacks so the logic layer
 * stays testable without a browser. */

import type { Highlight, ReviewModel, Span } from "./model.js";
import { directionFor } from "./model.js";
import type { Progress, QAData } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function coveredBy(highlights: Highlight[], index: number, kind: string): boolean {
  return highlights.some(
    (h) => h.kind === kind && index >= h.span.start && index < h.span.end,
  );
}

export function renderSentence(
  model: ReviewModel,
  stagedSelection: Span | null,
  onTokenClick: (index: number) => void,
): HTMLElement {
  const record = model.item.record;
  const container = el("div", "sentence");
  container.dir = directionFor(record.language);
  const highlights = model.highlights(stagedSelection);
  record.tokens.forEach((surface, index) => {
    const token = el("span", "token", surface);
    token.dataset.index = String(index);
    if (coveredBy(highlights, index, "predicate")) token.classList.add("predicate");
    if (coveredBy(highlights, index, "answer")) token.classList.add("answer");
    if (coveredBy(highlights, index, "staged")) token.classList.add("staged");
    token.addEventListener("click", () => onTokenClick(index));
    container.appendChild(token);
    container.appendChild(document.createTextNode(" "));
  });
  return container;
}

export interface QACallbacks {
  onEditQuestion(qaIndex: number, question: string): void;
  onDelete(qaIndex: number): void;
  onUseSelectionAsAnswer(qaIndex: number, answerIndex: number): void;
  onCategory(qaIndex: number, category: string): void;
}

export function renderQaList(qas: QAData[], callbacks: QACallbacks): HTMLElement {
  const list = el("ol", "qa-list");
  qas.forEach((qa, qaIndex) => {
    const row = el("li", "qa");
    const question = el("input") as HTMLInputElement;
    question.value = qa.question;
    question.addEventListener("change", () => callbacks.onEditQuestion(qaIndex, question.value));
    row.appendChild(question);

    qa.answers.forEach((answer, answerIndex) => {
      const chip = el("span", "answer-chip", `${answer.text} [${answer.start},${answer.end})`);
      const replace = el("button", "small", "⇐ selection");
      replace.title = "replace this answer with the staged token selection";
      replace.addEventListener("click", () =>
        callbacks.onUseSelectionAsAnswer(qaIndex, answerIndex),
      );
      chip.appendChild(replace);
      row.appendChild(chip);
    });

    const flags = qa.flags.length ? el("span", "flags", qa.flags.join(" ")) : null;
    if (flags) row.appendChild(flags);

    const remove = el("button", "small danger", "delete");
    remove.addEventListener("click", () => callbacks.onDelete(qaIndex));
    row.appendChild(remove);

    const tags = el("span", "categories");
    for (const category of ["M", "V", "P", "R"]) {
      const tag = el("button", "small", category);
      tag.addEventListener("click", () => callbacks.onCategory(qaIndex, category));
      tags.appendChild(tag);
    }
    row.appendChild(tags);
    list.appendChild(row);
  });
  return list;
}

export function renderAddForm(onAdd: (question: string) => void): HTMLElement {
  const form = el("div", "add-qa");
  const question = el("input") as HTMLInputElement;
  question.placeholder = "new question (answer = staged selection)";
  const add = el("button", "small", "add QA");
  add.addEventListener("click", () => onAdd(question.value));
  form.appendChild(question);
  form.appendChild(add);
  return form;
}

export function renderConflictPrompt(
  message: string,
  currentVersion: number,
  onReloadAndMerge: () => void,
  onDiscard: () => void,
): HTMLElement {
  const overlay = el("div", "conflict");
  overlay.appendChild(el("p", "conflict-message", message));
  overlay.appendChild(
    el(
      "p",
      undefined,
      `The item changed on the server (now at version ${currentVersion}). ` +
        "Reload it and re-apply your staged edits, or discard them.",
    ),
  );
  const merge = el("button", undefined, "Reload and merge");
  merge.addEventListener("click", onReloadAndMerge);
  const discard = el("button", "danger", "Discard my edits");
  discard.addEventListener("click", onDiscard);
  overlay.appendChild(merge);
  overlay.appendChild(discard);
  return overlay;
}

export function renderCompletion(progress: Progress): HTMLElement {
  const panel = el("div", "completion");
  panel.appendChild(el("h2", undefined, "Queue complete"));
  panel.appendChild(
    el("p", undefined, `${progress.reviewed} of ${progress.items} items reviewed.`),
  );
  return panel;
}

export function renderProgress(progress: Progress): HTMLElement {
  const bar = el("div", "progress");
  bar.textContent = `${progress.reviewed}/${progress.items} reviewed · ${progress.pending} pending`;
  return bar;
}
