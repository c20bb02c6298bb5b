/** Browser entry point: wires the API client, review model, queue and
 * keyboard map to the DOM. Everything interesting lives in the imported
 * modules; this file is intentionally thin glue. */

import { ApiClient } from "./api.js";
import { ReviewModel, SpanSelection } from "./model.js";
import { isComplete, nextKey, orderQueue, previousKey } from "./queue.js";
import { actionFor } from "./keyboard.js";
import type { KeyEventLike } from "./keyboard.js";
import {
  renderAddForm,
  renderCompletion,
  renderConflictPrompt,
  renderProgress,
  renderQaList,
  renderSentence,
} from "./render.js";
import type { Category, ItemSummary } from "./types.js";

const api = new ApiClient((input, init) => fetch(input, init));

interface AppState {
  queue: ItemSummary[];
  model: ReviewModel | null;
  selection: SpanSelection | null;
}

const state: AppState = { queue: [], model: null, selection: null };

function root(): HTMLElement {
  const node = document.getElementById("app");
  if (!node) throw new Error("missing #app container");
  return node;
}

function statusLine(text: string): void {
  const line = document.getElementById("status");
  if (line) line.textContent = text;
}

async function refreshQueue(): Promise<void> {
  state.queue = orderQueue(await api.listItems());
}

async function openItem(key: string): Promise<void> {
  const item = await api.getItem(key);
  state.model = new ReviewModel(api, item);
  state.selection = new SpanSelection(item.record.tokens.length);
  draw();
}

function guardedNavigate(target: string | null): void {
  const model = state.model;
  if (model && !model.canNavigate()) {
    statusLine("unsaved edits — save or discard before moving on");
    return;
  }
  if (target) void openItem(target);
}

async function saveCurrent(): Promise<boolean> {
  const model = state.model;
  if (!model) return false;
  await model.save();
  if (model.conflict()) {
    draw();
    return false;
  }
  await refreshQueue();
  draw();
  statusLine("saved");
  return true;
}

function handleKey(event: KeyboardEvent): void {
  const like: KeyEventLike = {
    key: event.key,
    ctrlKey: event.ctrlKey,
    metaKey: event.metaKey,
    altKey: event.altKey,
    targetTag: (event.target as HTMLElement | null)?.tagName?.toLowerCase(),
  };
  const action = actionFor(like);
  if (!action || !state.model) return;
  event.preventDefault();
  const key = state.model.key;
  switch (action.kind) {
    case "accept-next":
      state.model.stageAccept();
      void saveCurrent().then((saved) => {
        if (saved) guardedNavigate(nextKey(state.queue, key));
      });
      break;
    case "next":
      guardedNavigate(nextKey(state.queue, key));
      break;
    case "previous":
      guardedNavigate(previousKey(state.queue, key));
      break;
    case "save":
      void saveCurrent();
      break;
    case "clear-selection":
      state.selection?.clear();
      draw();
      break;
    case "category":
      void tagFirstQa(action.category);
      break;
  }
}

async function tagFirstQa(category: Category): Promise<void> {
  const model = state.model;
  if (!model || model.item.record.qas.length === 0) return;
  await model.tagCategory(0, category);
  draw();
}

function draw(): void {
  const container = root();
  container.textContent = "";
  const model = state.model;
  if (!model) {
    container.appendChild(
      isComplete(state.queue)
        ? renderCompletion(progressFromQueue())
        : renderProgress(progressFromQueue()),
    );
    return;
  }

  const conflict = model.conflict();
  if (conflict) {
    container.appendChild(
      renderConflictPrompt(
        conflict.message,
        conflict.currentVersion,
        () => void model.reloadAndMerge().then(draw),
        () => {
          model.discardStaged();
          void model.reloadAndMerge().then(draw);
        },
      ),
    );
    return;
  }

  const header = document.createElement("div");
  header.className = "item-header";
  header.textContent = `${model.key} · ${model.item.status} · v${model.item.version}`;
  container.appendChild(header);

  const selection = state.selection;
  container.appendChild(
    renderSentence(model, selection?.current() ?? null, (index) => {
      selection?.clickToken(index);
      draw();
    }),
  );

  container.appendChild(
    renderQaList(model.item.record.qas, {
      onEditQuestion: (qaIndex, question) => {
        model.stageQuestionEdit(qaIndex, question);
        draw();
      },
      onDelete: (qaIndex) => {
        model.stageDelete(qaIndex);
        draw();
      },
      onUseSelectionAsAnswer: (qaIndex, answerIndex) => {
        const span = selection?.current();
        if (!span) {
          statusLine("click tokens to select a span first");
          return;
        }
        model.stageAnswerEdit(qaIndex, answerIndex, span);
        selection?.clear();
        draw();
      },
      onCategory: (qaIndex, category) => {
        void model.tagCategory(qaIndex, category as Category).then(draw);
      },
    }),
  );

  container.appendChild(
    renderAddForm((question) => {
      const span = selection?.current();
      if (!span) {
        statusLine("select an answer span before adding a QA");
        return;
      }
      try {
        model.stageAdd(question, [span]);
      } catch (error) {
        statusLine(error instanceof RangeError ? error.message : String(error));
        return;
      }
      selection?.clear();
      draw();
    }),
  );

  const save = document.createElement("button");
  save.textContent = model.dirty ? "Save edits" : "Saved";
  save.disabled = !model.dirty;
  save.addEventListener("click", () => void saveCurrent());
  container.appendChild(save);

  container.appendChild(renderProgress(progressFromQueue()));
  if (isComplete(state.queue)) container.appendChild(renderCompletion(progressFromQueue()));
}

function progressFromQueue(): { items: number; reviewed: number; pending: number } {
  const reviewed = state.queue.filter((item) => item.status === "reviewed").length;
  return { items: state.queue.length, reviewed, pending: state.queue.length - reviewed };
}

async function start(): Promise<void> {
  document.addEventListener("keydown", handleKey);
  await refreshQueue();
  if (state.queue.length > 0) {
    await openItem(state.queue[0].key);
  } else {
    draw();
  }
}

void start();
