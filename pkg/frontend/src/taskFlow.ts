/** Participant flow: drives the service-prescribed screen sequence.
 *
 * The service is the only authority on ordering; the controller just
 * renders a screen for whatever `next` says and pushes the answer back.
 * There is no back navigation and no way to reopen a submitted screen.
 */

import { SessionClient } from "./api.js";
import { SelectionModel } from "./selector.js";
import type { NextPrompt, SessionView, TaskLetter } from "./types.js";

export interface TaskScreen {
  kind: "task";
  questionId: string;
  questionText: string;
  task: TaskLetter;
  selection: SelectionModel;
}

export interface KnowledgeScreen {
  kind: "knowledge";
  questionId: string;
  questionText: string;
}

export interface CompleteScreen {
  kind: "complete";
  finalized: boolean;
}

export type Screen = TaskScreen | KnowledgeScreen | CompleteScreen;

const FORBIDDEN_PARTICIPANT_FIELDS = ["recompositions", "verdict", "sigma2", "estimate"];

/** Fields derived from recomposition must never reach a participant. */
export function assertParticipantPayload(payload: unknown): void {
  const blob = JSON.stringify(payload);
  for (const field of FORBIDDEN_PARTICIPANT_FIELDS) {
    if (blob.includes(`"${field}"`)) {
      throw new Error(`participant payload leaked field: ${field}`);
    }
  }
}

export class ParticipantFlow {
  private view: SessionView | null = null;
  private submissions = 0;
  private knowledgeSubmissions = 0;

  constructor(
    private readonly client: SessionClient,
    private readonly sessionId: string,
  ) {}

  get taskSubmissionCount(): number {
    return this.submissions;
  }

  get knowledgeSubmissionCount(): number {
    return this.knowledgeSubmissions;
  }

  async refresh(): Promise<SessionView> {
    this.view = await this.client.getSession(this.sessionId);
    assertParticipantPayload(this.view);
    return this.view;
  }

  /** Build the screen for the service's current prompt. */
  async currentScreen(): Promise<Screen> {
    const view = await this.refresh();
    return this.screenFor(view.next, view);
  }

  private screenFor(next: NextPrompt, view: SessionView): Screen {
    if (next.stage === "complete") {
      return { kind: "complete", finalized: view.finalized };
    }
    const question = view.questions.find((q) => q.question_id === next.question_id);
    if (!question) {
      throw new Error(`service prompt names unknown question ${next.question_id}`);
    }
    if (next.stage === "knowledge") {
      return {
        kind: "knowledge",
        questionId: question.question_id,
        questionText: question.text,
      };
    }
    return {
      kind: "task",
      questionId: question.question_id,
      questionText: question.text,
      task: next.stage as TaskLetter,
      selection: new SelectionModel(),
    };
  }

  /** Submit a task screen; returns the next screen. */
  async submitTask(screen: TaskScreen): Promise<Screen> {
    const selection = screen.selection.submit();
    const outcome = await this.client.submitResponse(
      this.sessionId,
      screen.questionId,
      screen.task,
      selection,
    );
    assertParticipantPayload(outcome);
    this.submissions += 1;
    return this.currentScreen();
  }

  async submitKnowledge(screen: KnowledgeScreen, level: number): Promise<Screen> {
    const outcome = await this.client.submitKnowledge(this.sessionId, screen.questionId, level);
    assertParticipantPayload(outcome);
    this.knowledgeSubmissions += 1;
    return this.currentScreen();
  }

  async finalize(): Promise<void> {
    const ack = await this.client.finalize(this.sessionId);
    assertParticipantPayload(ack);
  }
}

/** Scripted happy path: answer every screen until the session completes. */
export async function runScriptedFlow(
  client: SessionClient,
  sessionId: string,
  pickSelection: (screen: TaskScreen) => number,
  pickKnowledge: (screen: KnowledgeScreen) => number,
): Promise<ParticipantFlow> {
  const flow = new ParticipantFlow(client, sessionId);
  let screen = await flow.currentScreen();
  while (screen.kind !== "complete") {
    if (screen.kind === "task") {
      screen.selection.selectValue(pickSelection(screen));
      screen = await flow.submitTask(screen);
    } else {
      screen = await flow.submitKnowledge(screen, pickKnowledge(screen));
    }
  }
  await flow.finalize();
  return flow;
}
