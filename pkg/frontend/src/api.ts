/**
 * Typed client for the safescope review API.
 *
 * The UI performs no domain computation: every number it shows comes out of
 * one of these calls. The base URL is configurable at deploy time through a
 * global (`window.SAFESCOPE_API_BASE`) set in index.html.
 */

export interface HealthPayload {
  status: string;
  revision: number;
}

export interface MonitorItem {
  id: string;
  description: string;
  lamp: string;
  location: string | null;
  part_id: string | null;
  dtc_codes: string[];
  affected_functions: string[];
  tags: string[];
}

export interface MonitorsPage {
  monitors: MonitorItem[];
  total: number;
  page: number;
  page_size: number;
  revision: number;
}

export interface QuestionItem {
  id: string;
  step: string;
  target: string;
  target_description: string;
  prompt: string;
  answer_kind: string;
  answered: boolean;
}

export interface QuestionsPayload {
  questions: QuestionItem[];
  total: number;
  revision: number;
}

export interface StagePayload {
  stage_id: string;
  name: string;
  op: string;
  tags: string[];
  input_count: number;
  output_count: number;
  surviving_ids: string[];
  excluded_ids: string[];
}

export interface StartupSplitPayload {
  startup_count: number;
  residual_count: number;
  startup_ids: string[];
  residual_ids: string[];
}

export interface FunnelPayload {
  revision: number;
  stages: StagePayload[];
  symmetry_classes: unknown[];
  startup_split: StartupSplitPayload | null;
}

export interface StageConfigEntry {
  id: string;
  name: string;
  op: string;
  tags?: string[];
}

export type AnswerValue =
  | string
  | boolean
  | { min_ms: number; max_ms: number }
  | {
      id: string;
      kind: string;
      description: string;
      signal_frequency_hz: number | null;
      granularity: string | null;
    }
  | { data_item: string; format: string };

export interface AnswerSubmission {
  question_id: string;
  kind: string;
  value: AnswerValue;
  author: string;
  timestamp: string;
}

export type PostAnswerResult =
  | { kind: "accepted"; new_revision: number }
  | { kind: "stale"; current_revision: number };

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

function defaultBase(): string {
  const override = (globalThis as { SAFESCOPE_API_BASE?: string }).SAFESCOPE_API_BASE;
  return override ?? "/api/v1";
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { error?: string };
      if (body.error) detail = body.error;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class Api {
  constructor(private readonly base: string = defaultBase()) {}

  async health(): Promise<HealthPayload> {
    return asJson(await fetch(`${this.base}/health`));
  }

  async monitors(filters: { tag?: string; lamp?: string; page?: number }): Promise<MonitorsPage> {
    const params = new URLSearchParams();
    if (filters.tag) params.set("tag", filters.tag);
    if (filters.lamp) params.set("lamp", filters.lamp);
    if (filters.page) params.set("page", String(filters.page));
    const query = params.toString();
    return asJson(await fetch(`${this.base}/monitors${query ? `?${query}` : ""}`));
  }

  async questions(status: "pending" | "all" = "pending"): Promise<QuestionsPayload> {
    return asJson(await fetch(`${this.base}/questions?status=${status}`));
  }

  async funnel(stages?: StageConfigEntry[]): Promise<FunnelPayload> {
    const query = stages ? `?stages=${encodeURIComponent(JSON.stringify(stages))}` : "";
    return asJson(await fetch(`${this.base}/funnel${query}`));
  }

  async report(): Promise<unknown> {
    return asJson(await fetch(`${this.base}/report`));
  }

  /** POST an answer under optimistic concurrency. 409 is a normal outcome
   * (someone else answered first) and is returned, not thrown. */
  async postAnswer(answer: AnswerSubmission, revision: number): Promise<PostAnswerResult> {
    const response = await fetch(`${this.base}/answers`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ answer, revision }),
    });
    if (response.status === 409) {
      const body = (await response.json()) as { current_revision: number };
      return { kind: "stale", current_revision: body.current_revision };
    }
    const body = await asJson<{ new_revision: number }>(response);
    return { kind: "accepted", new_revision: body.new_revision };
  }
}
