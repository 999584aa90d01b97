/**
 * The editable query draft: facet clauses with slider weights in [0, 10],
 * a fixed result count of 15, and local persistence so a reload restores
 * the last session.
 */

import type { ClausePayload, FacetId, SearchRequest, SearchResponse } from "./api";

export const SLIDER_MAX = 10;
export const RESULT_COUNT = 15;
const STORAGE_KEY = "uisearch.draft.v1";

export interface DraftClause {
  facet: FacetId;
  text: string;
  weight: number; // slider value, 0..10
}

export interface QueryDraft {
  clauses: DraftClause[];
  lastResponse: SearchResponse | null;
}

export function emptyDraft(): QueryDraft {
  return { clauses: [], lastResponse: null };
}

export function hasFacet(draft: QueryDraft, facet: FacetId): boolean {
  return draft.clauses.some((clause) => clause.facet === facet);
}

/** Add a clause; returns false when the facet is already present. */
export function addClause(draft: QueryDraft, clause: DraftClause): boolean {
  if (hasFacet(draft, clause.facet)) return false;
  draft.clauses.push({ ...clause });
  return true;
}

export function removeClause(draft: QueryDraft, facet: FacetId): void {
  draft.clauses = draft.clauses.filter((clause) => clause.facet !== facet);
}

/** Add or overwrite the clause for a facet (used by import/confirm flows). */
export function upsertClause(draft: QueryDraft, clause: DraftClause): void {
  removeClause(draft, clause.facet);
  draft.clauses.push({ ...clause });
}

export function clampWeight(value: number): number {
  if (Number.isNaN(value)) return 0;
  return Math.min(SLIDER_MAX, Math.max(0, value));
}

/** Submittable: at least one clause with positive weight and non-empty text. */
export function canSubmit(draft: QueryDraft): boolean {
  return (
    draft.clauses.length > 0 &&
    draft.clauses.every((clause) => clause.text.trim().length > 0) &&
    draft.clauses.some((clause) => clause.weight > 0)
  );
}

/** Slider values go to the request as-is; the backend normalizes. */
export function toSearchRequest(draft: QueryDraft): SearchRequest {
  const clauses: ClausePayload[] = draft.clauses.map((clause) => ({
    facet: clause.facet,
    text: clause.text,
    weight: clause.weight,
  }));
  return { clauses, k: RESULT_COUNT };
}

/** Normalized weight shares (sum 1) for the bar chart; zeros stay zero. */
export function normalizedShares(draft: QueryDraft): Map<FacetId, number> {
  const total = draft.clauses.reduce((sum, clause) => sum + clause.weight, 0);
  const shares = new Map<FacetId, number>();
  for (const clause of draft.clauses) {
    shares.set(clause.facet, total > 0 ? clause.weight / total : 0);
  }
  return shares;
}

export function saveDraft(draft: QueryDraft, storage: Storage = localStorage): void {
  storage.setItem(STORAGE_KEY, JSON.stringify({ clauses: draft.clauses }));
}

export function loadDraft(storage: Storage = localStorage): QueryDraft {
  const raw = storage.getItem(STORAGE_KEY);
  if (!raw) return emptyDraft();
  try {
    const parsed = JSON.parse(raw) as { clauses?: DraftClause[] };
    const clauses = (parsed.clauses ?? []).filter(
      (clause) =>
        typeof clause.facet === "string" &&
        typeof clause.text === "string" &&
        typeof clause.weight === "number",
    );
    return { clauses: clauses.map((c) => ({ ...c, weight: clampWeight(c.weight) })), lastResponse: null };
  } catch {
    return emptyDraft();
  }
}
