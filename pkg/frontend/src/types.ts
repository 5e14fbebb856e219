/** Wire types for the session service HTTP API. */

export type TaskLetter = "A" | "B" | "C" | "D";

export type Stage = TaskLetter | "knowledge" | "done";

export interface NextPrompt {
  stage: Stage | "complete";
  question_id?: string;
}

export interface CreatedSession {
  session_id: string;
  participant_token: string;
  facilitator_token: string;
}

export interface QuestionView {
  question_id: string;
  text: string;
  stage: Stage;
  selections: Partial<Record<TaskLetter, number>>;
  knowledge: number | null;
  /** Facilitator-only; never present in participant payloads. */
  verdict?: { quadrant: string; consistent: boolean | null };
  recompositions?: Record<string, number>;
  sigma2?: number;
}

export interface SessionView {
  session_id: string;
  participant_id: string;
  finalized: boolean;
  next: NextPrompt;
  questions: QuestionView[];
}

export interface AcceptedResponse {
  accepted: {
    question_id: string;
    task: TaskLetter;
    selection: number;
    interval_lo: number;
    interval_hi: number;
  };
  next: NextPrompt;
}

export interface AcceptedKnowledge {
  accepted: { question_id: string; level: number };
  next: NextPrompt;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  expected?: string;
}

export interface IntervalRow {
  comparison: string;
  n: number;
  mean: number;
  lo: number;
  hi: number;
}

export interface CdfPoint {
  x: number;
  F: number;
}
