import { FACET_IDS, FACET_LABELS, facetValueText, fetchFlow } from "../api";
import type { FacetId, RankedResult, ScreenDetail } from "../api";

export interface DetailHooks {
  /** Import the selected facets as clauses; facets already in the draft are
   * replaced only after the user confirms. */
  onImport(selection: { facet: FacetId; text: string }[]): void;
  onOpenDetail(screenId: string): void;
  onClose(): void;
}

function flowStrip(results: RankedResult[], hooks: DetailHooks): HTMLElement {
  const strip = document.createElement("div");
  strip.className = "detail__flow-strip";
  if (results.length === 0) {
    strip.textContent = "No screens found.";
    return strip;
  }
  for (const result of results) {
    const chip = document.createElement("button");
    chip.type = "button";
    chip.className = "detail__flow-chip";
    chip.textContent = `${result.screen_id.slice(0, 10)} (${result.overall_score.toFixed(3)})`;
    chip.addEventListener("click", () => hooks.onOpenDetail(result.screen_id));
    strip.appendChild(chip);
  }
  return strip;
}

/**
 * Screen detail: all 14 facets with values and import checkboxes, the import
 * button, and Find Next / Find Previous flow lookups.
 */
export function DetailPanel(detail: ScreenDetail, hooks: DetailHooks): HTMLElement {
  const panel = document.createElement("aside");
  panel.className = "detail";
  panel.setAttribute("aria-label", "Screen detail");

  const close = document.createElement("button");
  close.type = "button";
  close.className = "detail__close";
  close.textContent = "close";
  close.addEventListener("click", () => hooks.onClose());
  panel.appendChild(close);

  const heading = document.createElement("h2");
  heading.textContent = detail.id;
  panel.appendChild(heading);

  const flowRow = document.createElement("div");
  flowRow.className = "detail__flow";
  const flowHost = document.createElement("div");
  for (const direction of ["next", "previous"] as const) {
    const button = document.createElement("button");
    button.type = "button";
    button.className = `detail__flow-button detail__flow-button--${direction}`;
    button.textContent = direction === "next" ? "Find Next" : "Find Previous";
    const sourceFacet: FacetId = direction === "next" ? "next_screen" : "previous_screen";
    if (!facetValueText(detail.record[sourceFacet])) {
      // the flow endpoint would answer 422 for this screen
      button.disabled = true;
      button.title = `No inferred ${direction} screen for this UI`;
    } else {
      button.addEventListener("click", async () => {
        button.disabled = true;
        try {
          const flow = await fetchFlow(detail.id, direction);
          flowHost.replaceChildren(flowStrip(flow.results, hooks));
        } catch (error) {
          flowHost.replaceChildren();
          const message = document.createElement("p");
          message.className = "detail__flow-error";
          message.textContent = error instanceof Error ? error.message : String(error);
          flowHost.appendChild(message);
        } finally {
          button.disabled = false;
        }
      });
    }
    flowRow.appendChild(button);
  }
  panel.appendChild(flowRow);
  panel.appendChild(flowHost);

  const form = document.createElement("form");
  form.className = "detail__facets";
  const boxes = new Map<FacetId, HTMLInputElement>();
  for (const facet of FACET_IDS) {
    const text = facetValueText(detail.record[facet]);
    const row = document.createElement("div");
    row.className = "detail__facet";
    row.dataset.facet = facet;

    const checkbox = document.createElement("input");
    checkbox.type = "checkbox";
    checkbox.id = `import-${facet}`;
    checkbox.disabled = !text;
    boxes.set(facet, checkbox);
    row.appendChild(checkbox);

    const label = document.createElement("label");
    label.htmlFor = checkbox.id;
    label.className = "detail__facet-name";
    label.textContent = FACET_LABELS[facet];
    row.appendChild(label);

    const value = document.createElement("pre");
    value.className = "detail__facet-value";
    value.textContent = text || "(empty)";
    row.appendChild(value);

    form.appendChild(row);
  }
  panel.appendChild(form);

  const importButton = document.createElement("button");
  importButton.type = "button";
  importButton.className = "detail__import";
  importButton.textContent = "Import selected into query";
  importButton.addEventListener("click", () => {
    const selection = [];
    for (const facet of FACET_IDS) {
      const box = boxes.get(facet)!;
      if (box.checked && !box.disabled) {
        selection.push({ facet, text: facetValueText(detail.record[facet]) });
      }
    }
    if (selection.length > 0) hooks.onImport(selection);
  });
  panel.appendChild(importButton);

  return panel;
}
