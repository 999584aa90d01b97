import { fetchScreen, fetchVocab, runSearch } from "./api";
import type { FacetId, ScreenDetail, SearchResponse } from "./api";
import { DetailPanel } from "./components/detail";
import { QueryPanel } from "./components/queryPanel";
import { ResultsPanel } from "./components/results";
import { UploadPanel } from "./components/upload";
import { canSubmit, hasFacet, loadDraft, saveDraft, toSearchRequest, upsertClause } from "./draft";
import type { QueryDraft } from "./draft";
import "./styles.css";

interface AppState {
  draft: QueryDraft;
  vocab: Record<string, string[]>;
  pending: boolean; // at most one in-flight search
  detail: ScreenDetail | null;
  uploadOpen: boolean;
  banner: string | null;
}

export function createApp(root: HTMLElement): { state: AppState; render: () => void } {
  const state: AppState = {
    draft: loadDraft(),
    vocab: {},
    pending: false,
    detail: null,
    uploadOpen: false,
    banner: null,
  };

  async function submit(): Promise<void> {
    if (state.pending || !canSubmit(state.draft)) return;
    state.pending = true;
    state.banner = null;
    render();
    try {
      const response: SearchResponse = await runSearch(toSearchRequest(state.draft));
      state.draft.lastResponse = response;
    } catch (error) {
      const status = (error as { status?: number }).status ?? 0;
      state.banner =
        status >= 500
          ? `Search failed on the server (${status}); try again.`
          : `Query rejected: ${error instanceof Error ? error.message : error}`;
    } finally {
      state.pending = false;
      saveDraft(state.draft);
      render();
    }
  }

  function importSelection(selection: { facet: FacetId; text: string }[]): void {
    const conflicts = selection.filter((item) => hasFacet(state.draft, item.facet));
    if (conflicts.length > 0) {
      const names = conflicts.map((item) => item.facet).join(", ");
      if (!window.confirm(`Replace existing clause(s) for ${names}?`)) return;
    }
    for (const item of selection) {
      upsertClause(state.draft, { facet: item.facet, text: item.text, weight: 1 });
    }
    saveDraft(state.draft);
    render();
  }

  async function openDetail(screenId: string): Promise<void> {
    try {
      state.detail = await fetchScreen(screenId);
      state.banner = null;
    } catch (error) {
      state.detail = null;
      state.banner = `Screen ${screenId} not found (${error instanceof Error ? error.message : error})`;
    }
    render();
  }

  function render(): void {
    const panels: HTMLElement[] = [];

    if (state.banner) {
      const banner = document.createElement("div");
      banner.className = "banner";
      banner.setAttribute("role", "alert");
      banner.textContent = state.banner;
      panels.push(banner);
    }

    panels.push(
      QueryPanel(state.draft, state.vocab, state.pending, {
        onChange: () => {
          saveDraft(state.draft);
          render();
        },
        onSubmit: () => void submit(),
        onUploadRequested: () => {
          state.uploadOpen = true;
          render();
        },
      }),
    );

    panels.push(
      ResultsPanel(state.draft.lastResponse, {
        onOpenDetail: (id) => void openDetail(id),
      }),
    );

    if (state.detail) {
      panels.push(
        DetailPanel(state.detail, {
          onImport: importSelection,
          onOpenDetail: (id) => void openDetail(id),
          onClose: () => {
            state.detail = null;
            render();
          },
        }),
      );
    }

    if (state.uploadOpen) {
      panels.push(
        UploadPanel({
          onImport: importSelection,
          onClose: () => {
            state.uploadOpen = false;
            render();
          },
        }),
      );
    }

    root.replaceChildren(...panels);
  }

  void fetchVocab()
    .then((vocab) => {
      state.vocab = vocab;
      render();
    })
    .catch(() => {
      // suggestions are a nicety; the console works without them
    });

  render();
  return { state, render };
}

const mount = document.getElementById("app");
if (mount) {
  createApp(mount);
}
