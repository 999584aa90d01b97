import { FACET_IDS, FACET_LABELS, extractFromImage, facetValueText } from "../api";
import type { ExtractResponse, FacetId } from "../api";

export const MAX_UPLOAD_BYTES = 10 * 1024 * 1024;
const ACCEPTED_TYPES = ["image/png", "image/jpeg", "image/webp"];

export interface UploadHooks {
  onImport(selection: { facet: FacetId; text: string }[]): void;
  onClose(): void;
}

function reviewPanel(extracted: ExtractResponse, hooks: UploadHooks): HTMLElement {
  const review = document.createElement("div");
  review.className = "upload__review";

  if (extracted.degraded) {
    const note = document.createElement("p");
    note.className = "upload__degraded";
    note.textContent = "Extraction was partial; review before importing.";
    review.appendChild(note);
  }

  const boxes = new Map<FacetId, HTMLInputElement>();
  for (const facet of FACET_IDS) {
    const text = facetValueText(extracted.record[facet]);
    const row = document.createElement("div");
    row.className = "upload__facet";
    row.dataset.facet = facet;

    const checkbox = document.createElement("input");
    checkbox.type = "checkbox";
    checkbox.id = `review-${facet}`;
    checkbox.checked = Boolean(text);
    checkbox.disabled = !text;
    boxes.set(facet, checkbox);
    row.appendChild(checkbox);

    const label = document.createElement("label");
    label.htmlFor = checkbox.id;
    label.textContent = FACET_LABELS[facet];
    row.appendChild(label);

    const value = document.createElement("span");
    value.className = "upload__facet-value";
    value.textContent = text ? text.slice(0, 120) : "(empty)";
    row.appendChild(value);

    review.appendChild(row);
  }

  const confirm = document.createElement("button");
  confirm.type = "button";
  confirm.className = "upload__confirm";
  confirm.textContent = "Import checked facets";
  confirm.addEventListener("click", () => {
    const selection = [];
    for (const facet of FACET_IDS) {
      const box = boxes.get(facet)!;
      if (box.checked && !box.disabled) {
        selection.push({ facet, text: facetValueText(extracted.record[facet]) });
      }
    }
    hooks.onImport(selection);
    hooks.onClose();
  });
  review.appendChild(confirm);
  return review;
}

/**
 * Query-by-example: upload a screenshot, review the extracted facets with
 * per-facet checkboxes, and import the confirmed ones into the draft.
 * Oversized or unsupported files are rejected client-side with no request.
 */
export function UploadPanel(hooks: UploadHooks): HTMLElement {
  const panel = document.createElement("section");
  panel.className = "upload";
  panel.setAttribute("aria-label", "Query by example");

  const heading = document.createElement("h2");
  heading.textContent = "Query by example";
  panel.appendChild(heading);

  const close = document.createElement("button");
  close.type = "button";
  close.className = "upload__close";
  close.textContent = "close";
  close.addEventListener("click", () => hooks.onClose());
  panel.appendChild(close);

  const status = document.createElement("p");
  status.className = "upload__status";
  panel.appendChild(status);

  const host = document.createElement("div");
  panel.appendChild(host);

  const input = document.createElement("input");
  input.type = "file";
  input.className = "upload__file";
  input.accept = ACCEPTED_TYPES.join(",");
  input.addEventListener("change", async () => {
    const file = input.files?.[0];
    if (!file) return;
    if (file.size > MAX_UPLOAD_BYTES) {
      status.textContent = "File is larger than 10 MB; pick a smaller screenshot.";
      status.classList.add("upload__status--error");
      return;
    }
    if (file.type && !ACCEPTED_TYPES.includes(file.type)) {
      status.textContent = `Unsupported type ${file.type}; use png, jpeg, or webp.`;
      status.classList.add("upload__status--error");
      return;
    }
    status.classList.remove("upload__status--error");
    status.textContent = "Extracting semantics…";
    input.disabled = true;
    try {
      const extracted = await extractFromImage(file);
      status.textContent = extracted.report.is_valid
        ? "Review the extracted facets:"
        : "Extracted with validation findings; review carefully:";
      host.replaceChildren(reviewPanel(extracted, hooks));
    } catch (error) {
      status.classList.add("upload__status--error");
      status.textContent = `Extraction failed: ${error instanceof Error ? error.message : error}. Retry?`;
    } finally {
      input.disabled = false;
    }
  });
  panel.insertBefore(input, status);

  return panel;
}
