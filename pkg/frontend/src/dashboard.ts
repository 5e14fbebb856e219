/** Facilitator dashboard: progress grid, verdict badges, report plots.
 *
 * Everything renders from the service views and the exact pipeline
 * report contracts (intervals.csv, cdf_*.csv, summary JSON); there is
 * no client-side recomputation of any forecast.
 */

import { parseCdfCsv, parseIntervalsCsv } from "./csv.js";
import { en } from "./locale.js";
import { forestSvg, stepSvg } from "./svg.js";
import type { SessionView } from "./types.js";

export interface DashboardModel {
  sessions: SessionProgress[];
  forestSvg: string | null;
  cdfSvgs: Map<string, string>;
  scoresGated: boolean;
}

export interface SessionProgress {
  sessionId: string;
  participantId: string;
  finalized: boolean;
  questions: QuestionBadge[];
}

export interface QuestionBadge {
  questionId: string;
  stage: string;
  verdict: string | null;
  recompositions: Record<string, number> | null;
}

export interface ReportInputs {
  intervalsCsv?: string;
  cdfCsvs?: Map<string, string>;
  outcomesPresent: boolean;
}

export function buildDashboard(views: SessionView[], reports: ReportInputs): DashboardModel {
  const sessions = views.map((view) => ({
    sessionId: view.session_id,
    participantId: view.participant_id,
    finalized: view.finalized,
    questions: view.questions.map((q) => ({
      questionId: q.question_id,
      stage: q.stage,
      // Derived fields exist only on done questions, by service contract.
      verdict: q.verdict ? q.verdict.quadrant : null,
      recompositions: q.recompositions ?? null,
    })),
  }));

  const model: DashboardModel = {
    sessions,
    forestSvg: null,
    cdfSvgs: new Map(),
    scoresGated: !reports.outcomesPresent,
  };
  if (reports.outcomesPresent && reports.intervalsCsv) {
    model.forestSvg = forestSvg(parseIntervalsCsv(reports.intervalsCsv));
  }
  if (reports.outcomesPresent && reports.cdfCsvs) {
    for (const [name, text] of reports.cdfCsvs) {
      model.cdfSvgs.set(name, stepSvg(parseCdfCsv(text)));
    }
  }
  return model;
}

export function renderDashboard(model: DashboardModel): string {
  const rows = model.sessions
    .map((session) => {
      const badges = session.questions
        .map((q) => {
          const verdict = q.verdict ? ` <span class="badge verdict">${q.verdict}</span>` : "";
          const recomps = q.recompositions
            ? ` <span class="badge recomps">${Object.entries(q.recompositions)
                .map(([rule, estimate]) => `${rule} ${estimate.toFixed(3)}`)
                .join(" | ")}</span>`
            : "";
          return `<td class="stage-${q.stage}">${q.questionId}: ${q.stage}${verdict}${recomps}</td>`;
        })
        .join("");
      const status = session.finalized ? "finalized" : "in progress";
      return `<tr><td>${session.participantId}</td><td>${status}</td>${badges}</tr>`;
    })
    .join("");

  const scorePanel = model.scoresGated
    ? `<p class="gated">${en.awaitingOutcomes}</p>`
    : [
        model.forestSvg ?? "",
        ...[...model.cdfSvgs.entries()].map(
          ([name, svg]) => `<h3>${name}</h3>${svg}`,
        ),
      ].join("");

  return [
    `<section class="progress-grid"><table>${rows}</table></section>`,
    `<section class="score-panel">${scorePanel}</section>`,
  ].join("");
}
