/** Wire types mirroring the curation service JSON. */

export interface AnswerData {
  start: number;
  end: number;
  text: string;
}

export interface QAData {
  question: string;
  question_en: string;
  answers: AnswerData[];
  answers_en?: { start: number; end: number }[];
  source: string;
  flags: string[];
  heuristics: string[];
}

export interface RecordData {
  id: string;
  language: string;
  tokens: string[];
  pos: string[];
  predicate: { index: number; kind: string; lemma: string | null };
  qas: QAData[];
  provenance: string;
}

export interface ItemSummary {
  key: string;
  status: "pending" | "reviewed";
  version: number;
  language: string;
  predicate: string;
  n_qas: number;
}

export interface AuditEntryData {
  timestamp: string;
  action: string;
  qa_index: number | null;
  flag: string | null;
  category: string | null;
  detail: string;
}

export interface ItemDetail {
  key: string;
  status: string;
  version: number;
  record: RecordData;
  edits: AuditEntryData[];
}

export interface Progress {
  items: number;
  reviewed: number;
  pending: number;
}

export interface StatsResponse {
  progress: Progress;
  categories: Record<string, { count: number; ratio: number }>;
}

/** One edit operation as the service accepts it (minus the version field). */
export interface EditOp {
  action: "accept" | "edit_question" | "edit_answer" | "delete_qa" | "add_qa";
  qa_index?: number;
  question?: string;
  question_en?: string;
  answer_index?: number;
  start?: number;
  end?: number;
  answers?: { start: number; end: number }[];
  flag?: "minor" | "substantial";
  detail?: string;
}

export const CATEGORIES = ["M", "V", "P", "R"] as const;
export type Category = (typeof CATEGORIES)[number];
