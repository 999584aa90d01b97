// Request contract and weight bar behavior of the search panel.
import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { createApp } from "../src/main";
import { EMPTY_RESPONSE, flush, searchResponse, stubFetch } from "./helpers";

function mount() {
  const root = document.createElement("main");
  document.body.appendChild(root);
  return root;
}

beforeEach(() => {
  localStorage.clear();
  document.body.innerHTML = "";
});

afterEach(() => {
  vi.unstubAllGlobals();
});

function addClauseViaUi(root: HTMLElement, facet: string, text: string, slider: number) {
  const select = root.querySelector<HTMLSelectElement>(".query-panel__facet-select")!;
  select.value = facet;
  select.dispatchEvent(new Event("change"));
  const row = root.querySelector<HTMLElement>(`.clause[data-facet="${facet}"]`)!;
  const input = row.querySelector<HTMLInputElement>(".clause__text")!;
  input.value = text;
  input.dispatchEvent(new Event("input"));
  const range = root
    .querySelector<HTMLElement>(`.clause[data-facet="${facet}"]`)!
    .querySelector<HTMLInputElement>(".clause__weight")!;
  range.value = String(slider);
  range.dispatchEvent(new Event("input"));
}

describe("query panel request contract", () => {
  it("a two-clause draft with sliders 2 and 3 emits exactly one search request with weights 2 and 3", async () => {
    const net = stubFetch({ "/vocab": {}, "/search": searchResponse() });
    const root = mount();
    createApp(root);
    await flush();

    addClauseViaUi(root, "screen_role", "checkout summary", 2);
    addClauseViaUi(root, "mood", "minimal", 3);

    // bar chart shows normalized shares 40% / 60% before submitting
    const segments = [...root.querySelectorAll<HTMLElement>(".weight-bar__segment")];
    expect(segments.map((s) => s.dataset.facet)).toEqual(["screen_role", "mood"]);
    expect(segments.map((s) => s.style.width)).toEqual(["40%", "60%"]);

    root.querySelector<HTMLButtonElement>(".query-panel__submit")!.click();
    await flush();
    await flush();

    const searches = net.searchCalls();
    expect(searches).toHaveLength(1);
    expect(searches[0].body).toEqual({
      clauses: [
        { facet: "screen_role", text: "checkout summary", weight: 2 },
        { facet: "mood", text: "minimal", weight: 3 },
      ],
      k: 15,
    });
  });

  it("single clause submits one clause with k fixed at 15", async () => {
    const net = stubFetch({ "/vocab": {}, "/search": EMPTY_RESPONSE });
    const root = mount();
    createApp(root);
    await flush();

    addClauseViaUi(root, "screen_role", "onboarding walkthrough", 5);
    root.querySelector<HTMLButtonElement>(".query-panel__submit")!.click();
    await flush();

    const searches = net.searchCalls();
    expect(searches).toHaveLength(1);
    expect(searches[0].body).toMatchObject({ k: 15 });
    expect((searches[0].body as { clauses: unknown[] }).clauses).toHaveLength(1);
  });

  it("submit is disabled and no request is sent while all sliders are zero", async () => {
    const net = stubFetch({ "/vocab": {}, "/search": EMPTY_RESPONSE });
    const root = mount();
    createApp(root);
    await flush();

    addClauseViaUi(root, "mood", "calm", 0);
    addClauseViaUi(root, "layout", "grid", 0);

    const submit = root.querySelector<HTMLButtonElement>(".query-panel__submit")!;
    expect(submit.disabled).toBe(true);
    submit.click();
    await flush();
    expect(net.searchCalls()).toHaveLength(0);
  });

  it("empty clause text disables submit", async () => {
    stubFetch({ "/vocab": {} });
    const root = mount();
    createApp(root);
    await flush();

    addClauseViaUi(root, "mood", "", 4);
    expect(root.querySelector<HTMLButtonElement>(".query-panel__submit")!.disabled).toBe(true);
  });

  it("facets are unique: an added facet leaves the selector", async () => {
    stubFetch({ "/vocab": {} });
    const root = mount();
    createApp(root);
    await flush();

    addClauseViaUi(root, "mood", "warm", 2);
    const options = [...root.querySelectorAll<HTMLOptionElement>(".query-panel__facet-select option")];
    expect(options.map((o) => o.value)).not.toContain("mood");
  });

  it("only one search can be in flight at a time", async () => {
    let release: (() => void) | undefined;
    const gate = new Promise<void>((resolve) => {
      release = resolve;
    });
    const calls: string[] = [];
    vi.stubGlobal(
      "fetch",
      vi.fn(async (input: RequestInfo | URL) => {
        const url = String(input).split("?")[0];
        calls.push(url);
        if (url === "/search") {
          await gate;
          return new Response(JSON.stringify(EMPTY_RESPONSE), { status: 200 });
        }
        return new Response("{}", { status: 200 });
      }),
    );

    const root = mount();
    createApp(root);
    await flush();
    addClauseViaUi(root, "mood", "warm", 2);

    const submit = root.querySelector<HTMLButtonElement>(".query-panel__submit")!;
    submit.click();
    await flush();
    // while pending, the button is disabled and re-clicking does nothing
    const pendingButton = root.querySelector<HTMLButtonElement>(".query-panel__submit")!;
    expect(pendingButton.disabled).toBe(true);
    pendingButton.click();
    release!();
    await flush();
    expect(calls.filter((url) => url === "/search")).toHaveLength(1);
  });

  it("weight bar always renders normalized shares of the current draft", async () => {
    stubFetch({ "/vocab": {} });
    const root = mount();
    createApp(root);
    await flush();

    addClauseViaUi(root, "mood", "warm", 1);
    addClauseViaUi(root, "layout", "grid", 1);
    addClauseViaUi(root, "screen_role", "feed", 2);

    const widths = [...root.querySelectorAll<HTMLElement>(".weight-bar__segment")].map(
      (segment) => segment.style.width,
    );
    expect(widths).toEqual(["25%", "25%", "50%"]);
    const total = widths.reduce((sum, width) => sum + parseFloat(width), 0);
    expect(total).toBeCloseTo(100, 6);
  });

  it("draft persists across reloads via local storage", async () => {
    stubFetch({ "/vocab": {} });
    const root = mount();
    createApp(root);
    await flush();
    addClauseViaUi(root, "mood", "bold", 7);

    document.body.innerHTML = "";
    const second = mount();
    const { state } = createApp(second);
    await flush();
    expect(state.draft.clauses).toEqual([{ facet: "mood", text: "bold", weight: 7 }]);
    const row = second.querySelector<HTMLInputElement>('.clause[data-facet="mood"] .clause__text');
    expect(row?.value).toBe("bold");
  });
});
