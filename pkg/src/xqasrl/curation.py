"""Gold-set curation store: review state, audited edits, journal persistence.

Items are keyed by record id. Every mutation appends one line to a JSONL
journal; replaying the journal over an empty store reproduces the exact state
(crash recovery = replay). Writes are guarded by per-item optimistic
versioning. Error categories are kept on the QA itself as a namespaced flag
("category:M" etc.) so they survive QA-index shifts and ride along in exports.
"""

from __future__ import annotations

import datetime as _dt
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from .corpus import TokenSpan
from .dataset import record_from_dict, record_to_dict
from .projection import Answer, ProjectedQA, ProjectedRecord

STATUS_PENDING = "pending"
STATUS_REVIEWED = "reviewed"

FLAG_SUBSTANTIAL = "substantial"
FLAG_MINOR = "minor"

ACTION_ACCEPT = "accept"
ACTION_EDIT_QUESTION = "edit_question"
ACTION_EDIT_ANSWER = "edit_answer"
ACTION_DELETE_QA = "delete_qa"
ACTION_ADD_QA = "add_qa"
ACTION_TAG_CATEGORY = "tag_category"
EDIT_ACTIONS = (ACTION_ACCEPT, ACTION_EDIT_QUESTION, ACTION_EDIT_ANSWER, ACTION_DELETE_QA, ACTION_ADD_QA)

ERROR_CATEGORIES = ("M", "V", "P", "R")
CATEGORY_FLAG_PREFIX = "category:"


class CurationError(Exception):
    pass


class ItemNotFound(CurationError):
    pass


class VersionConflict(CurationError):
    pass


class EditValidationError(CurationError):
    pass


@dataclass(frozen=True)
class AuditEntry:
    timestamp: str
    action: str
    qa_index: int | None = None
    flag: str | None = None
    category: str | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "action": self.action,
            "qa_index": self.qa_index,
            "flag": self.flag,
            "category": self.category,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AuditEntry":
        return cls(
            timestamp=d["timestamp"],
            action=d["action"],
            qa_index=d.get("qa_index"),
            flag=d.get("flag"),
            category=d.get("category"),
            detail=d.get("detail", ""),
        )


@dataclass
class CurationItem:
    record: ProjectedRecord
    status: str = STATUS_PENDING
    version: int = 0
    edits: list = field(default_factory=list)
    # snapshot of the record as imported; re-imports are judged against this,
    # not the (possibly edited) current record, so restarting with the same
    # --import-records file stays a no-op after curation has begun
    imported: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "key": self.record.record_id,
            "status": self.status,
            "version": self.version,
            "record": record_to_dict(self.record),
            "edits": [e.to_dict() for e in self.edits],
        }

    def summary(self) -> dict:
        return {
            "key": self.record.record_id,
            "status": self.status,
            "version": self.version,
            "language": self.record.sentence.language,
            "predicate": self.record.sentence.tokens[self.record.predicate.token_index].surface,
            "n_qas": len(self.record.qas),
        }


def _with_flag(flags: tuple, flag: str | None) -> tuple:
    if flag is None or flag in flags:
        return flags
    return flags + (flag,)


def _set_category_flag(flags: tuple, category: str) -> tuple:
    kept = tuple(f for f in flags if not f.startswith(CATEGORY_FLAG_PREFIX))
    return kept + (f"{CATEGORY_FLAG_PREFIX}{category}",)


def qa_category(qa: ProjectedQA) -> str | None:
    for flag in qa.flags:
        if flag.startswith(CATEGORY_FLAG_PREFIX):
            return flag[len(CATEGORY_FLAG_PREFIX) :]
    return None


class CurationStore:
    """In-memory item map plus an append-only journal on disk."""

    def __init__(self, journal_path=None, clock=time.time):
        self.items: dict[str, CurationItem] = {}
        self._clock = clock
        self._journal_path = Path(journal_path) if journal_path else None

    # -- persistence ------------------------------------------------------

    @classmethod
    def load(cls, data_dir, clock=time.time) -> "CurationStore":
        data_dir = Path(data_dir)
        data_dir.mkdir(parents=True, exist_ok=True)
        journal = data_dir / "journal.jsonl"
        store = cls(journal_path=None, clock=clock)
        if journal.exists():
            with open(journal, "r", encoding="utf-8") as fh:
                for line_no, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        op = json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise CurationError(f"corrupt journal line {line_no}: {exc}") from exc
                    store._apply_op(op)
        store._journal_path = journal  # start journaling only after replay
        return store

    def _journal(self, op: dict) -> None:
        if self._journal_path is None:
            return
        with open(self._journal_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(op, ensure_ascii=False))
            fh.write("\n")
            fh.flush()

    def _now(self) -> str:
        return _dt.datetime.fromtimestamp(self._clock(), tz=_dt.timezone.utc).isoformat()

    def _apply_op(self, op: dict) -> None:
        kind = op.get("op")
        if kind == "import":
            record = record_from_dict(op["record"])
            self.items[record.record_id] = CurationItem(record=record, imported=op["record"])
        elif kind == "edit":
            self._apply_edit_internal(op["key"], op["edit"], op["timestamp"])
        elif kind == "category":
            self._apply_category_internal(op["key"], op["qa_index"], op["category"], op["timestamp"])
        else:
            raise CurationError(f"unknown journal op {kind!r}")

    # -- operations -------------------------------------------------------

    def import_records(self, records) -> int:
        records = list(records)
        conflicts = []
        fresh = []
        for record in records:
            key = record.record_id
            existing = self.items.get(key)
            if existing is None:
                fresh.append(record)
            elif existing.imported != record_to_dict(record):
                conflicts.append(key)
        if conflicts:
            raise CurationError(f"conflicting re-import for keys: {', '.join(sorted(conflicts))}")
        seen_new = set()
        for record in fresh:
            if record.record_id in seen_new:
                raise CurationError(f"conflicting re-import for keys: {record.record_id}")
            seen_new.add(record.record_id)
        for record in fresh:
            as_dict = record_to_dict(record)
            self.items[record.record_id] = CurationItem(record=record, imported=as_dict)
            self._journal({"op": "import", "record": as_dict})
        return len(fresh)

    def get(self, key: str) -> CurationItem:
        item = self.items.get(key)
        if item is None:
            raise ItemNotFound(f"no item with key {key!r}")
        return item

    def list_items(self, status: str | None = None, language: str | None = None) -> list[CurationItem]:
        out = []
        for key in sorted(self.items):
            item = self.items[key]
            if status and item.status != status:
                continue
            if language and item.record.sentence.language != language:
                continue
            out.append(item)
        return out

    def apply_edit(self, key: str, edit: dict, expected_version: int) -> CurationItem:
        item = self.get(key)
        if expected_version != item.version:
            raise VersionConflict(
                f"item {key} is at version {item.version}, edit targeted {expected_version}"
            )
        timestamp = self._now()
        self._mutate(item, edit, timestamp)
        self._journal({"op": "edit", "key": key, "edit": edit, "timestamp": timestamp})
        return item

    def tag_error_category(self, key: str, qa_index: int, category: str, expected_version: int) -> CurationItem:
        item = self.get(key)
        if expected_version != item.version:
            raise VersionConflict(
                f"item {key} is at version {item.version}, edit targeted {expected_version}"
            )
        timestamp = self._now()
        self._apply_category_internal(key, qa_index, category, timestamp)
        self._journal(
            {"op": "category", "key": key, "qa_index": qa_index, "category": category, "timestamp": timestamp}
        )
        return item

    def export_gold(self, status: str = STATUS_REVIEWED) -> list[ProjectedRecord]:
        return [item.record for item in self.list_items(status=status)]

    def category_distribution(self) -> dict:
        counts = {c: 0 for c in ERROR_CATEGORIES}
        for item in self.items.values():
            for qa in item.record.qas:
                category = qa_category(qa)
                if category:
                    counts[category] += 1
        total = sum(counts.values())
        return {
            c: {"count": n, "ratio": (n / total) if total else 0.0} for c, n in counts.items()
        }

    def progress(self) -> dict:
        reviewed = sum(1 for item in self.items.values() if item.status == STATUS_REVIEWED)
        return {"items": len(self.items), "reviewed": reviewed, "pending": len(self.items) - reviewed}

    # -- mutation internals -------------------------------------------------

    def _apply_edit_internal(self, key: str, edit: dict, timestamp: str) -> None:
        self._mutate(self.get(key), edit, timestamp)

    def _apply_category_internal(self, key: str, qa_index: int, category: str, timestamp: str) -> None:
        item = self.get(key)
        if category not in ERROR_CATEGORIES:
            raise EditValidationError(f"unknown category {category!r}")
        qas = list(item.record.qas)
        if not 0 <= qa_index < len(qas):
            raise EditValidationError(f"qa index {qa_index} out of range")
        qa = qas[qa_index]
        qas[qa_index] = replace(qa, flags=_set_category_flag(qa.flags, category))
        item.record.qas = tuple(qas)
        item.edits.append(
            AuditEntry(timestamp=timestamp, action=ACTION_TAG_CATEGORY, qa_index=qa_index, category=category)
        )
        item.version += 1
        item.status = STATUS_REVIEWED

    def _mutate(self, item: CurationItem, edit: dict, timestamp: str) -> None:
        action = edit.get("action")
        if action not in EDIT_ACTIONS:
            raise EditValidationError(f"unknown edit action {action!r}")
        record = item.record
        qas = list(record.qas)
        qa_index = edit.get("qa_index")
        flag = edit.get("flag")
        if flag not in (None, FLAG_MINOR, FLAG_SUBSTANTIAL):
            raise EditValidationError(f"unknown flag {flag!r}")

        def need_index():
            if qa_index is None or not 0 <= qa_index < len(qas):
                raise EditValidationError(f"qa index {qa_index!r} out of range")
            return qa_index

        if action == ACTION_ACCEPT:
            flag = None
        elif action == ACTION_EDIT_QUESTION:
            i = need_index()
            question = edit.get("question")
            if not question or not isinstance(question, str):
                raise EditValidationError("edit_question requires a non-empty question")
            flag = flag or FLAG_MINOR
            qa = qas[i]
            qas[i] = replace(
                qa, question=question, source="manual", flags=_with_flag(qa.flags, flag)
            )
        elif action == ACTION_EDIT_ANSWER:
            i = need_index()
            answer_index = edit.get("answer_index", 0)
            qa = qas[i]
            if not 0 <= answer_index < len(qa.answers):
                raise EditValidationError(f"answer index {answer_index!r} out of range")
            span = self._span_from_edit(edit, record)
            flag = flag or FLAG_MINOR
            answers = list(qa.answers)
            answers[answer_index] = Answer.from_span(span, record.sentence)
            qas[i] = replace(
                qa, answers=tuple(answers), source="manual", flags=_with_flag(qa.flags, flag)
            )
        elif action == ACTION_DELETE_QA:
            i = need_index()
            del qas[i]
            flag = FLAG_SUBSTANTIAL
        elif action == ACTION_ADD_QA:
            question = edit.get("question")
            if not question or not isinstance(question, str):
                raise EditValidationError("add_qa requires a non-empty question")
            raw_answers = edit.get("answers")
            if not raw_answers:
                raise EditValidationError("add_qa requires at least one answer span")
            answers = tuple(
                Answer.from_span(self._span_from_edit(a, record), record.sentence)
                for a in raw_answers
            )
            flag = FLAG_SUBSTANTIAL
            qas.append(
                ProjectedQA(
                    question=question,
                    question_en=edit.get("question_en", ""),
                    answers=answers,
                    source="manual",
                    flags=(FLAG_SUBSTANTIAL,),
                )
            )
            qa_index = len(qas) - 1

        record.qas = tuple(qas)
        item.edits.append(
            AuditEntry(
                timestamp=timestamp,
                action=action,
                qa_index=qa_index,
                flag=flag,
                detail=edit.get("detail", ""),
            )
        )
        item.version += 1
        item.status = STATUS_REVIEWED

    @staticmethod
    def _span_from_edit(edit: dict, record: ProjectedRecord) -> TokenSpan:
        try:
            span = TokenSpan(int(edit["start"]), int(edit["end"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise EditValidationError(f"bad span in edit: {exc}") from exc
        try:
            span.check_bounds(len(record.sentence))
        except ValueError as exc:
            raise EditValidationError(str(exc)) from exc
        return span
