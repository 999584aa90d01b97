import { vi } from "vitest";

import type { ScreenDetail, SearchResponse } from "../src/api";

export const EMPTY_RESPONSE: SearchResponse = { overall: [], per_facet: {} };

export function searchResponse(): SearchResponse {
  return {
    overall: [
      { screen_id: "s0001", overall_score: 0.91234, facet_scores: { screen_role: 0.95 } },
      { screen_id: "s0002", overall_score: 0.81234, facet_scores: { screen_role: 0.82 } },
    ],
    per_facet: {
      screen_role: [{ screen_id: "s0001", overall_score: 0.95, facet_scores: { screen_role: 0.95 } }],
    },
  };
}

export function screenDetail(): ScreenDetail {
  return {
    id: "s0001",
    image_ref: "img/0001.png",
    ingested_at: "2026-01-01T00:00:00+00:00",
    record: {
      app_category: ["finance"],
      app_description: "A budgeting app.",
      similar_apps: ["LedgerLite: same niche"],
      target_user: { students: "tight budgets" },
      screen_category: ["dashboard"],
      screen_role: "A spending overview dashboard.",
      next_screen: "A transaction list screen.",
      previous_screen: "",
      ui_elements: { chart: "spending over time" },
      action_items: { button: "add expense" },
      layout: ["single column"],
      color_scheme: { "dark theme": "throughout" },
      color_palette: { primary: "midnightblue" },
      mood: { calm: "Soft colors keep focus on numbers." },
    },
    facets_embedded: ["app_category", "screen_role", "mood"],
  };
}

export interface FetchStub {
  calls: { url: string; init?: RequestInit }[];
  searchCalls(): { url: string; body: unknown }[];
}

/**
 * Intercept global fetch. Routes not in `routes` answer 404; every call is
 * recorded for request-contract assertions.
 */
export function stubFetch(routes: Record<string, unknown>): FetchStub {
  const calls: { url: string; init?: RequestInit }[] = [];
  const stub = vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    calls.push({ url, init });
    const path = url.split("?")[0];
    if (path in routes) {
      return new Response(JSON.stringify(routes[path]), {
        status: 200,
        headers: { "content-type": "application/json" },
      });
    }
    return new Response(JSON.stringify({ status: 404, code: "not_found", message: url }), {
      status: 404,
    });
  });
  vi.stubGlobal("fetch", stub);
  return {
    calls,
    searchCalls() {
      return calls
        .filter((call) => call.url.split("?")[0] === "/search")
        .map((call) => ({ url: call.url, body: JSON.parse(String(call.init?.body)) }));
    },
  };
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
