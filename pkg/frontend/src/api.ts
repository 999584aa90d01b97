/**
 * Typed client for the uisearch service JSON API.
 *
 * This module is the console's only gateway to the backend: search, screen
 * detail, flow lookups, vocabularies, and query-by-example extraction.
 */

export const FACET_IDS = [
  "app_category",
  "app_description",
  "similar_apps",
  "target_user",
  "screen_category",
  "screen_role",
  "next_screen",
  "previous_screen",
  "ui_elements",
  "action_items",
  "layout",
  "color_scheme",
  "color_palette",
  "mood",
] as const;

export type FacetId = (typeof FACET_IDS)[number];

export const FACET_LABELS: Record<FacetId, string> = {
  app_category: "App Category",
  app_description: "App Description",
  similar_apps: "Similar Apps",
  target_user: "Target User",
  screen_category: "Screen Category",
  screen_role: "Screen Role",
  next_screen: "Next Screen",
  previous_screen: "Previous Screen",
  ui_elements: "UI Elements",
  action_items: "Action Items",
  layout: "Layout",
  color_scheme: "Color Scheme",
  color_palette: "Color Palette",
  mood: "Mood",
};

/** Which vocabulary section (if any) suggests values for a facet. */
export const FACET_VOCAB_SECTION: Partial<Record<FacetId, string>> = {
  app_category: "app_categories",
  screen_category: "screen_categories",
  ui_elements: "ui_element_types",
  layout: "layouts",
  mood: "moods",
  color_scheme: "color_schemes",
  color_palette: "html_color_names",
};

export interface ClausePayload {
  facet: FacetId;
  text: string;
  weight: number;
}

export interface SearchRequest {
  clauses: ClausePayload[];
  k: number;
  missing_facet_policy?: string;
}

export interface RankedResult {
  screen_id: string;
  overall_score: number;
  facet_scores: Record<string, number>;
}

export interface SearchResponse {
  overall: RankedResult[];
  per_facet: Record<string, RankedResult[]>;
}

/** Facet values in the record JSON: text, list of texts, or key->description. */
export type FacetValue = string | string[] | Record<string, string>;

export interface ScreenDetail {
  id: string;
  image_ref: string;
  ingested_at: string;
  record: Record<string, FacetValue>;
  facets_embedded: string[];
}

export interface ExtractResponse {
  record: Record<string, FacetValue>;
  degraded: boolean;
  attempts: number;
  report: {
    is_valid: boolean;
    hard_errors: [string, string][];
    soft_warnings: [string, string, string | null][];
  };
}

export interface FlowResponse {
  source_screen_id: string;
  direction: string;
  results: RankedResult[];
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseFailure(response: Response): Promise<ApiError> {
  try {
    const body = await response.json();
    return new ApiError(response.status, body.code ?? "unknown", body.message ?? response.statusText);
  } catch {
    return new ApiError(response.status, "unknown", response.statusText);
  }
}

async function getJson<T>(path: string): Promise<T> {
  const response = await fetch(path);
  if (!response.ok) throw await parseFailure(response);
  return (await response.json()) as T;
}

export async function runSearch(request: SearchRequest): Promise<SearchResponse> {
  const response = await fetch("/search", {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(request),
  });
  if (!response.ok) throw await parseFailure(response);
  return (await response.json()) as SearchResponse;
}

export function fetchScreen(id: string): Promise<ScreenDetail> {
  return getJson(`/screens/${encodeURIComponent(id)}`);
}

export function fetchFlow(id: string, direction: "next" | "previous", k = 15): Promise<FlowResponse> {
  return getJson(`/screens/${encodeURIComponent(id)}/flow?direction=${direction}&k=${k}`);
}

export function fetchVocab(): Promise<Record<string, string[]>> {
  return getJson("/vocab");
}

export async function extractFromImage(file: File): Promise<ExtractResponse> {
  const form = new FormData();
  form.append("image", file);
  const response = await fetch("/extract", { method: "POST", body: form });
  if (!response.ok) throw await parseFailure(response);
  return (await response.json()) as ExtractResponse;
}

/** Render a record facet value the way the backend embeds it. */
export function facetValueText(value: FacetValue | undefined): string {
  if (value === undefined) return "";
  if (typeof value === "string") return value;
  if (Array.isArray(value)) return value.join("; ");
  return Object.entries(value)
    .map(([key, description]) => `${key}: ${description}`)
    .join("\n");
}
