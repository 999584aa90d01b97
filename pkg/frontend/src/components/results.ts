import { FACET_LABELS } from "../api";
import type { FacetId, RankedResult, SearchResponse } from "../api";

export interface ResultsHooks {
  onOpenDetail(screenId: string): void;
}

const score3 = (value: number): string => value.toFixed(3);

function card(result: RankedResult, hooks: ResultsHooks): HTMLElement {
  const element = document.createElement("button");
  element.type = "button";
  element.className = "result-card";
  element.dataset.screenId = result.screen_id;
  element.addEventListener("click", () => hooks.onOpenDetail(result.screen_id));

  const thumb = document.createElement("div");
  thumb.className = "result-card__thumb";
  const image = document.createElement("img");
  image.loading = "lazy";
  image.alt = `screen ${result.screen_id}`;
  image.src = `/screens/${encodeURIComponent(result.screen_id)}/image`;
  image.addEventListener("error", () => {
    image.remove();
    thumb.textContent = result.screen_id.slice(0, 8);
  });
  thumb.appendChild(image);
  element.appendChild(thumb);

  const score = document.createElement("span");
  score.className = "result-card__score";
  score.textContent = score3(result.overall_score);
  element.appendChild(score);

  const id = document.createElement("span");
  id.className = "result-card__id";
  id.textContent = result.screen_id.slice(0, 12);
  element.appendChild(id);

  return element;
}

function section(title: string, results: RankedResult[], hooks: ResultsHooks): HTMLElement {
  const block = document.createElement("section");
  block.className = "results__section";
  const heading = document.createElement("h3");
  heading.textContent = title;
  block.appendChild(heading);
  const strip = document.createElement("div");
  strip.className = "results__strip";
  if (results.length === 0) {
    const empty = document.createElement("p");
    empty.className = "results__empty";
    empty.textContent = "No matches.";
    strip.appendChild(empty);
  }
  for (const result of results) {
    strip.appendChild(card(result, hooks));
  }
  block.appendChild(strip);
  return block;
}

/**
 * Overall matches on top, then one section per queried facet ranked by that
 * facet's similarity alone, in canonical facet order.
 */
export function ResultsPanel(response: SearchResponse | null, hooks: ResultsHooks): HTMLElement {
  const panel = document.createElement("section");
  panel.className = "results";
  panel.setAttribute("aria-label", "Result panel");
  if (!response) {
    const hint = document.createElement("p");
    hint.className = "results__hint";
    hint.textContent = "Build a query and hit Search.";
    panel.appendChild(hint);
    return panel;
  }
  panel.appendChild(section("Overall matches", response.overall, hooks));
  for (const facet of Object.keys(response.per_facet) as FacetId[]) {
    panel.appendChild(section(FACET_LABELS[facet] ?? facet, response.per_facet[facet], hooks));
  }
  return panel;
}
