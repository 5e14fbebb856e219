/** Typed client for the session service.
 *
 * All mutations are idempotent-by-rejection on the server: a retried
 * submission that already landed comes back as a 409 whose `expected`
 * hint points past the submitted task. The client converts that exact
 * case into success so network retries never double-submit.
 */

import type {
  AcceptedKnowledge,
  AcceptedResponse,
  ApiErrorBody,
  CreatedSession,
  NextPrompt,
  SessionView,
  TaskLetter,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiErrorBody,
  ) {
    super(`${body.code}: ${body.message}`);
  }
}

export interface RetryOptions {
  retries?: number;
  baseMs?: number;
}

export async function withRetries<T>(
  fn: () => Promise<T>,
  opts: RetryOptions = {},
): Promise<T> {
  const retries = opts.retries ?? 3;
  const baseMs = opts.baseMs ?? 200;
  let lastErr: unknown;
  for (let attempt = 0; attempt <= retries; attempt++) {
    try {
      return await fn();
    } catch (err) {
      // Protocol and validation rejections are deterministic; retrying
      // them only repeats the answer. Retry network-level failures.
      if (err instanceof ApiError) throw err;
      lastErr = err;
      if (attempt === retries) break;
      await new Promise((resolve) => setTimeout(resolve, baseMs * 2 ** attempt));
    }
  }
  throw lastErr;
}

export class SessionClient {
  constructor(
    private readonly baseUrl: string,
    private token: string | null = null,
  ) {}

  setToken(token: string): void {
    this.token = token;
  }

  private headers(): Record<string, string> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) headers["X-Session-Token"] = this.token;
    return headers;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers: this.headers(),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = (await response.json()) as T | ApiErrorBody;
    if (!response.ok) {
      throw new ApiError(response.status, payload as ApiErrorBody);
    }
    return payload as T;
  }

  createSession(participantId: string, questionIds: string[]): Promise<CreatedSession> {
    return this.request("POST", "/sessions", {
      participant_id: participantId,
      question_ids: questionIds,
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  async submitResponse(
    sessionId: string,
    questionId: string,
    task: TaskLetter,
    selection: number,
  ): Promise<AcceptedResponse | { alreadyAccepted: true; next: NextPrompt }> {
    try {
      return await withRetries(() =>
        this.request<AcceptedResponse>("POST", `/sessions/${sessionId}/responses`, {
          question_id: questionId,
          task,
          selection,
        }),
      );
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // The server is the arbiter: only a 409 for a submission that is
        // already recorded with this exact value counts as success. A
        // skipped-ahead task is a real protocol error and propagates.
        const view = await this.getSession(sessionId);
        const question = view.questions.find((q) => q.question_id === questionId);
        if (question && question.selections[task] === selection) {
          return { alreadyAccepted: true, next: view.next };
        }
      }
      throw err;
    }
  }

  submitKnowledge(sessionId: string, questionId: string, level: number): Promise<AcceptedKnowledge> {
    return this.request("POST", `/sessions/${sessionId}/knowledge`, {
      question_id: questionId,
      level,
    });
  }

  finalize(sessionId: string): Promise<Record<string, unknown>> {
    return this.request("POST", `/sessions/${sessionId}/finalize`);
  }

  recordOutcome(questionId: string, outcome: 0 | 1): Promise<Record<string, unknown>> {
    return this.request("POST", `/questions/${questionId}/outcome`, { outcome });
  }

  summaryReport(): Promise<Record<string, unknown>> {
    return this.request("GET", "/reports/summary");
  }
}
