import { FACET_IDS, FACET_LABELS, FACET_VOCAB_SECTION } from "../api";
import type { FacetId } from "../api";
import type { QueryDraft } from "../draft";
import { SLIDER_MAX, addClause, canSubmit, clampWeight, hasFacet, removeClause } from "../draft";
import { WeightBar } from "./weightBar";

export interface QueryPanelHooks {
  onChange(): void;
  onSubmit(): void;
  onUploadRequested(): void;
}

/**
 * Clause editor: add/remove facets (unique per draft), describe each in free
 * text (with vocabulary suggestions for categorical facets), weight each with
 * a 0-10 slider, and submit. The weight bar above the search button always
 * reflects the draft's normalized weights.
 */
export function QueryPanel(
  draft: QueryDraft,
  vocab: Record<string, string[]>,
  pending: boolean,
  hooks: QueryPanelHooks,
): HTMLElement {
  const panel = document.createElement("section");
  panel.className = "query-panel";
  panel.setAttribute("aria-label", "Search panel");

  const heading = document.createElement("h2");
  heading.textContent = "Semantic query";
  panel.appendChild(heading);

  const list = document.createElement("div");
  list.className = "query-panel__clauses";
  for (const clause of draft.clauses) {
    list.appendChild(clauseRow(clause.facet, draft, vocab, hooks));
  }
  panel.appendChild(list);

  panel.appendChild(addRow(draft, hooks));
  panel.appendChild(WeightBar(draft));

  const submit = document.createElement("button");
  submit.type = "button";
  submit.className = "query-panel__submit";
  submit.textContent = pending ? "Searching…" : "Search";
  submit.disabled = pending || !canSubmit(draft);
  submit.addEventListener("click", () => hooks.onSubmit());
  panel.appendChild(submit);

  const upload = document.createElement("button");
  upload.type = "button";
  upload.className = "query-panel__upload";
  upload.textContent = "Query by example…";
  upload.addEventListener("click", () => hooks.onUploadRequested());
  panel.appendChild(upload);

  return panel;
}

function clauseRow(
  facet: FacetId,
  draft: QueryDraft,
  vocab: Record<string, string[]>,
  hooks: QueryPanelHooks,
): HTMLElement {
  const clause = draft.clauses.find((c) => c.facet === facet)!;
  const row = document.createElement("div");
  row.className = "clause";
  row.dataset.facet = facet;

  const label = document.createElement("label");
  label.className = "clause__facet";
  label.textContent = FACET_LABELS[facet];
  row.appendChild(label);

  const text = document.createElement("input");
  text.type = "text";
  text.className = "clause__text";
  text.placeholder = "describe what you are looking for";
  text.value = clause.text;
  const section = FACET_VOCAB_SECTION[facet];
  if (section && vocab[section]?.length) {
    const listId = `suggest-${facet}`;
    text.setAttribute("list", listId);
    const datalist = document.createElement("datalist");
    datalist.id = listId;
    for (const entry of vocab[section]) {
      const option = document.createElement("option");
      option.value = entry;
      datalist.appendChild(option);
    }
    row.appendChild(datalist);
  }
  text.addEventListener("input", () => {
    clause.text = text.value;
    hooks.onChange();
  });
  row.appendChild(text);

  const slider = document.createElement("input");
  slider.type = "range";
  slider.className = "clause__weight";
  slider.min = "0";
  slider.max = String(SLIDER_MAX);
  slider.step = "1";
  slider.value = String(clause.weight);
  slider.setAttribute("aria-label", `${FACET_LABELS[facet]} weight`);
  slider.addEventListener("input", () => {
    clause.weight = clampWeight(Number(slider.value));
    hooks.onChange();
  });
  row.appendChild(slider);

  const weightOut = document.createElement("output");
  weightOut.className = "clause__weight-value";
  weightOut.textContent = String(clause.weight);
  row.appendChild(weightOut);

  const remove = document.createElement("button");
  remove.type = "button";
  remove.className = "clause__remove";
  remove.textContent = "×";
  remove.title = "Remove clause";
  remove.addEventListener("click", () => {
    removeClause(draft, facet);
    hooks.onChange();
  });
  row.appendChild(remove);

  return row;
}

function addRow(draft: QueryDraft, hooks: QueryPanelHooks): HTMLElement {
  const row = document.createElement("div");
  row.className = "query-panel__add";

  const select = document.createElement("select");
  select.className = "query-panel__facet-select";
  const placeholder = document.createElement("option");
  placeholder.value = "";
  placeholder.textContent = "Add a semantic…";
  select.appendChild(placeholder);
  for (const facet of FACET_IDS) {
    if (hasFacet(draft, facet)) continue; // uniqueness enforced at add time
    const option = document.createElement("option");
    option.value = facet;
    option.textContent = FACET_LABELS[facet];
    select.appendChild(option);
  }
  select.addEventListener("change", () => {
    const facet = select.value as FacetId | "";
    if (!facet) return;
    addClause(draft, { facet, text: "", weight: 5 });
    hooks.onChange();
  });
  row.appendChild(select);
  return row;
}
