import { FACET_LABELS } from "../api";
import type { QueryDraft } from "../draft";
import { normalizedShares } from "../draft";

/**
 * Stacked bar showing each clause's normalized weight share. Segment widths
 * are percentages of the whole bar, so they always sum to 100% (or the bar
 * is empty when no clause has weight).
 */
export function WeightBar(draft: QueryDraft): HTMLElement {
  const bar = document.createElement("div");
  bar.className = "weight-bar";
  bar.setAttribute("role", "img");
  bar.setAttribute("aria-label", "Normalized clause weights");

  const shares = normalizedShares(draft);
  for (const clause of draft.clauses) {
    const share = shares.get(clause.facet) ?? 0;
    if (share <= 0) continue;
    const segment = document.createElement("span");
    segment.className = "weight-bar__segment";
    segment.dataset.facet = clause.facet;
    const percent = share * 100;
    segment.style.width = `${percent}%`;
    segment.title = `${FACET_LABELS[clause.facet]}: ${percent.toFixed(0)}%`;
    segment.textContent = percent >= 12 ? `${percent.toFixed(0)}%` : "";
    bar.appendChild(segment);
  }
  return bar;
}
