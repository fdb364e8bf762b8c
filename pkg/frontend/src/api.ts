/**
 * Typed client for the review-service HTTP JSON API. The service is the
 * single source of truth; this module does no caching beyond the request.
 */

export interface TaskDecision {
  verdict: 'approve' | 'edit' | 'reject';
  edited_arabic_fields?: string[][] | null;
  reviewer_tag: string;
  decided_at?: number;
}

export interface Task {
  task_id: string;
  unit_id: string;
  reason: 'below_threshold' | 'random_audit';
  created_at: number;
  state: 'open' | 'claimed' | 'decided';
  claimed_by: string | null;
  claim_expires_at: number | null;
  decision: TaskDecision | null;
  version: number;
}

export interface TaskPage {
  tasks: Task[];
  total: number;
  page: number;
  page_size: number;
}

export interface ScorePoint {
  round_index: number;
  value: number;
  rationale?: string;
}

export interface UnitView {
  unit_id: string;
  status: string;
  english_fields: string[][];
  arabic_fields: string[][] | null;
  score_history: ScorePoint[];
  meta: Record<string, unknown>;
}

export interface TaskDetail {
  task: Task;
  unit: UnitView;
}

export interface Stats {
  tasks: { open: number; claimed: number; decided: number };
  by_reason: Record<string, number>;
  decisions_by_verdict: Record<string, number>;
  queue_depth: number;
  units: number;
}

export interface TaskFilter {
  state?: string;
  reason?: string;
  page?: number;
  page_size?: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let code = 'http_error';
  let message = `HTTP ${resp.status}`;
  try {
    const body = await resp.json();
    const detail = body?.detail ?? body;
    if (detail?.error) code = String(detail.error);
    if (detail?.message) message = String(detail.message);
  } catch {
    // non-JSON error body; keep the generic message
  }
  return new ApiError(resp.status, code, message);
}

export class ReviewApi {
  constructor(readonly baseUrl: string) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await fetch(`${this.baseUrl}${path}`);
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await fetch(`${this.baseUrl}${path}`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  listTasks(filter: TaskFilter = {}): Promise<TaskPage> {
    const params = new URLSearchParams();
    if (filter.state) params.set('state', filter.state);
    if (filter.reason) params.set('reason', filter.reason);
    if (filter.page) params.set('page', String(filter.page));
    if (filter.page_size) params.set('page_size', String(filter.page_size));
    const query = params.toString();
    return this.get<TaskPage>(`/tasks${query ? `?${query}` : ''}`);
  }

  getTask(taskId: string): Promise<TaskDetail> {
    return this.get<TaskDetail>(`/tasks/${encodeURIComponent(taskId)}`);
  }

  claim(taskId: string, reviewerTag: string): Promise<Task> {
    return this.post<Task>(`/tasks/${encodeURIComponent(taskId)}/claim`, {
      reviewer_tag: reviewerTag,
    });
  }

  decide(
    taskId: string,
    verdict: TaskDecision['verdict'],
    reviewerTag: string,
    editedArabicFields?: string[][],
  ): Promise<{ task: Task; unit_status: string }> {
    const body: Record<string, unknown> = { verdict, reviewer_tag: reviewerTag };
    if (editedArabicFields !== undefined) body.edited_arabic_fields = editedArabicFields;
    return this.post(`/tasks/${encodeURIComponent(taskId)}/decision`, body);
  }

  stats(): Promise<Stats> {
    return this.get<Stats>('/stats');
  }
}
