"""Live elicitation sessions: protocol state machine, event log, HTTP API.

A session walks one participant through its questions in order; within a
question the stages are the four task responses A, B, C, D, then the
knowledge self-assessment, then done. Submissions are accepted only for
the session's current (question, stage), never edited, and appended to a
per-session JSONL event log before acknowledgment. Replaying a log from
empty rebuilds the state exactly; crash recovery is just replay.

Two capability tokens are issued per session. The participant token can
submit and see its own progress; only the facilitator token sees
consistency verdicts and recomposed forecasts, and those only for
questions that reached done.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Union

from pydantic import BaseModel

from advforecast.consistency import classify
from advforecast.errors import ProtocolError, ValidationError
from advforecast.judgments import (
    IntervalResponse,
    JudgmentSet,
    KnowledgeLevel,
    Question,
    interval_from_selection,
)
from advforecast.recompose import (
    DEFAULT_SIGMA_MAP,
    RecompositionRule,
    SigmaMap,
    sigma2_for,
)
from advforecast.scoring import brier

TASK_STAGES = ("A", "B", "C", "D")
STAGE_KNOWLEDGE = "knowledge"
STAGE_DONE = "done"

# Human-facing task numbering: A=Task 1, B=Task 2, C=Task 3, D=Task 4.
TASK_LABELS = {"A": "Task 1", "B": "Task 2", "C": "Task 3", "D": "Task 4"}


@dataclass
class QuestionProgress:
    question_id: str
    stage: str = "A"
    selections: dict = field(default_factory=dict)  # task -> selection
    knowledge: Optional[int] = None

    @property
    def done(self) -> bool:
        return self.stage == STAGE_DONE


@dataclass
class SessionState:
    session_id: str
    participant_id: str
    question_ids: list[str]
    progress: dict[str, QuestionProgress]
    participant_token: str
    facilitator_token: str
    finalized: bool = False

    def current(self) -> Optional[QuestionProgress]:
        for qid in self.question_ids:
            if not self.progress[qid].done:
                return self.progress[qid]
        return None

    def next_prompt(self) -> dict:
        cur = self.current()
        if cur is None:
            return {"stage": "complete"}
        return {"question_id": cur.question_id, "stage": cur.stage}

    def judgment_sets(self) -> list[JudgmentSet]:
        sets = []
        for qid in self.question_ids:
            prog = self.progress[qid]
            if not prog.done:
                continue
            sets.append(
                JudgmentSet(
                    participant_id=self.participant_id,
                    question_id=qid,
                    pA=interval_from_selection(prog.selections["A"]),
                    pB=interval_from_selection(prog.selections["B"]),
                    pC=interval_from_selection(prog.selections["C"]),
                    pD=interval_from_selection(prog.selections["D"]),
                    knowledge=KnowledgeLevel(prog.knowledge),
                )
            )
        return sets


class EventLog:
    """Append-only JSONL log, one file per session plus one for outcomes.

    fsync-on-append is the default; it can be disabled where durability
    against power loss is irrelevant (tests), which changes no bytes.
    """

    def __init__(self, directory: Union[str, Path], fsync: bool = True):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.fsync = fsync
        self._seq: dict[str, int] = {}

    def _path(self, log_name: str) -> Path:
        return self.directory / f"{log_name}.jsonl"

    def append(self, log_name: str, kind: str, payload: dict) -> dict:
        seq = self._seq.get(log_name, 0) + 1
        self._seq[log_name] = seq
        event = {
            "seq": seq,
            "ts": datetime.now(timezone.utc).isoformat(),
            "session_id": payload.get("session_id"),
            "kind": kind,
            "payload": payload,
        }
        line = json.dumps(event, sort_keys=True, separators=(",", ":")) + "\n"
        with open(self._path(log_name), "a", encoding="utf-8") as fh:
            fh.write(line)
            fh.flush()
            if self.fsync:
                os.fsync(fh.fileno())
        return event

    def read(self, log_name: str) -> list[dict]:
        path = self._path(log_name)
        if not path.exists():
            return []
        events = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    events.append(json.loads(line))
        for i, event in enumerate(events, start=1):
            if event["seq"] != i:
                raise ValidationError(f"event log {log_name} has gap at seq {i}")
        self._seq[log_name] = len(events)
        return events

    def log_names(self) -> list[str]:
        return sorted(p.stem for p in self.directory.glob("*.jsonl"))


class ElicitationService:
    """Core session engine; the HTTP layer is a thin adapter over this."""

    def __init__(
        self,
        questions: list[Question],
        data_dir: Union[str, Path],
        sigma_map: SigmaMap = DEFAULT_SIGMA_MAP,
        fsync: bool = True,
    ):
        self.questions: dict[str, Question] = {}
        for q in questions:
            if q.question_id in self.questions:
                raise ValidationError(f"duplicate question {q.question_id!r}")
            self.questions[q.question_id] = q
        self.sigma_map = sigma_map
        self.log = EventLog(Path(data_dir) / "events", fsync=fsync)
        self.sessions: dict[str, SessionState] = {}
        self.tokens: dict[str, tuple[str, str]] = {}  # token -> (session_id, role)
        self._lock = threading.RLock()
        self._recover()

    # -- event application (shared by live path and recovery) ------------

    def _apply(self, event: dict) -> None:
        kind, payload = event["kind"], event["payload"]
        if kind == "session-created":
            state = SessionState(
                session_id=payload["session_id"],
                participant_id=payload["participant_id"],
                question_ids=list(payload["question_ids"]),
                progress={qid: QuestionProgress(qid) for qid in payload["question_ids"]},
                participant_token=payload["participant_token"],
                facilitator_token=payload["facilitator_token"],
            )
            self.sessions[state.session_id] = state
            self.tokens[state.participant_token] = (state.session_id, "participant")
            self.tokens[state.facilitator_token] = (state.session_id, "facilitator")
        elif kind == "task-submitted":
            prog = self.sessions[payload["session_id"]].progress[payload["question_id"]]
            prog.selections[payload["task"]] = payload["selection"]
            index = TASK_STAGES.index(payload["task"])
            prog.stage = TASK_STAGES[index + 1] if index + 1 < len(TASK_STAGES) else STAGE_KNOWLEDGE
        elif kind == "knowledge-submitted":
            prog = self.sessions[payload["session_id"]].progress[payload["question_id"]]
            prog.knowledge = payload["level"]
            prog.stage = STAGE_DONE
        elif kind == "session-finalized":
            self.sessions[payload["session_id"]].finalized = True
        elif kind == "outcome-recorded":
            qid = payload["question_id"]
            self.questions[qid] = self.questions[qid].with_outcome(payload["outcome"])
        else:
            raise ValidationError(f"unknown event kind {kind!r}")

    def _recover(self) -> None:
        for log_name in self.log.log_names():
            for event in self.log.read(log_name):
                self._apply(event)

    # -- operations ------------------------------------------------------

    def create_session(self, participant_id: str, question_ids: list[str]) -> SessionState:
        if not participant_id:
            raise ValidationError("participant_id must be non-empty")
        if not question_ids:
            raise ValidationError("question_ids must be non-empty")
        if len(set(question_ids)) != len(question_ids):
            raise ValidationError("question_ids contains duplicates")
        unknown = [q for q in question_ids if q not in self.questions]
        if unknown:
            raise ValidationError(f"unknown question_ids {unknown}")
        with self._lock:
            for state in self.sessions.values():
                if state.participant_id == participant_id and not state.finalized:
                    raise ProtocolError(
                        f"participant {participant_id!r} already has open session {state.session_id}"
                    )
            session_id = f"s-{secrets.token_hex(8)}"
            event = self.log.append(
                session_id,
                "session-created",
                {
                    "session_id": session_id,
                    "participant_id": participant_id,
                    "question_ids": list(question_ids),
                    "participant_token": secrets.token_hex(16),
                    "facilitator_token": secrets.token_hex(16),
                },
            )
            self._apply(event)
            return self.sessions[session_id]

    def _session(self, session_id: str) -> SessionState:
        state = self.sessions.get(session_id)
        if state is None:
            raise KeyError(session_id)
        return state

    def submit_response(self, session_id: str, question_id: str, task: str, selection) -> dict:
        interval = _validated_interval(selection)
        if task not in TASK_STAGES:
            raise ValidationError(f"task {task!r} not in {TASK_STAGES}")
        with self._lock:
            state = self._session(session_id)
            if state.finalized:
                raise ProtocolError("session is finalized")
            cur = state.current()
            expected = state.next_prompt()
            if cur is None:
                raise ProtocolError("all questions complete", expected="finalize")
            if question_id not in state.progress:
                raise ValidationError(f"question {question_id!r} not part of this session")
            if cur.question_id != question_id or cur.stage != task:
                if cur.stage in TASK_STAGES and cur.question_id == question_id and task in cur.selections:
                    message = f"task {task} already submitted for {question_id}"
                else:
                    message = (
                        f"expected {_describe_stage(expected)} next, got task {task} for {question_id}"
                    )
                raise ProtocolError(message, expected=_describe_stage(expected))
            event = self.log.append(
                session_id,
                "task-submitted",
                {
                    "session_id": session_id,
                    "question_id": question_id,
                    "task": task,
                    "selection": interval.selection,
                },
            )
            self._apply(event)
            return {
                "accepted": {
                    "question_id": question_id,
                    "task": task,
                    "selection": interval.selection,
                    "interval_lo": float(interval.interval_lo),
                    "interval_hi": float(interval.interval_hi),
                },
                "next": state.next_prompt(),
            }

    def submit_knowledge(self, session_id: str, question_id: str, level) -> dict:
        try:
            knowledge = KnowledgeLevel(level)
        except (TypeError, ValueError) as exc:
            raise ValidationError(str(exc)) from None
        with self._lock:
            state = self._session(session_id)
            if state.finalized:
                raise ProtocolError("session is finalized")
            cur = state.current()
            expected = state.next_prompt()
            if cur is None:
                raise ProtocolError("all questions complete", expected="finalize")
            if cur.question_id != question_id or cur.stage != STAGE_KNOWLEDGE:
                raise ProtocolError(
                    f"expected {_describe_stage(expected)} next, got knowledge for {question_id}",
                    expected=_describe_stage(expected),
                )
            event = self.log.append(
                session_id,
                "knowledge-submitted",
                {"session_id": session_id, "question_id": question_id, "level": int(knowledge)},
            )
            self._apply(event)
            return {"accepted": {"question_id": question_id, "level": int(knowledge)},
                    "next": state.next_prompt()}

    def finalize(self, session_id: str) -> dict:
        with self._lock:
            state = self._session(session_id)
            if not state.finalized:
                pending = [qid for qid in state.question_ids if not state.progress[qid].done]
                if pending:
                    raise ProtocolError(
                        f"session incomplete; pending questions {pending}",
                        expected=_describe_stage(state.next_prompt()),
                    )
                event = self.log.append(session_id, "session-finalized", {"session_id": session_id})
                self._apply(event)
            return self.facilitator_summary(session_id)

    def record_outcome(self, question_id: str, outcome) -> dict:
        if outcome not in (0, 1):
            raise ValidationError(f"outcome {outcome!r} must be 0 or 1")
        with self._lock:
            question = self.questions.get(question_id)
            if question is None:
                raise KeyError(question_id)
            if question.outcome is not None:
                raise ProtocolError(f"outcome for {question_id!r} already recorded")
            event = self.log.append(
                "outcomes", "outcome-recorded", {"question_id": question_id, "outcome": int(outcome)}
            )
            self._apply(event)
            return {"question_id": question_id, "outcome": int(outcome)}

    # -- views -----------------------------------------------------------

    def resolve_token(self, token: Optional[str]) -> tuple[str, str]:
        if not token or token not in self.tokens:
            raise PermissionError("missing or unknown session token")
        return self.tokens[token]

    def participant_view(self, session_id: str) -> dict:
        state = self._session(session_id)
        return {
            "session_id": state.session_id,
            "participant_id": state.participant_id,
            "finalized": state.finalized,
            "next": state.next_prompt(),
            "questions": [
                {
                    "question_id": qid,
                    "text": self.questions[qid].text,
                    "stage": state.progress[qid].stage,
                    "selections": dict(state.progress[qid].selections),
                    "knowledge": state.progress[qid].knowledge,
                }
                for qid in state.question_ids
            ],
        }

    def facilitator_view(self, session_id: str) -> dict:
        view = self.participant_view(session_id)
        for entry in view["questions"]:
            prog = self.sessions[session_id].progress[entry["question_id"]]
            if prog.done:
                entry.update(self._derived(session_id, prog))
        return view

    def facilitator_summary(self, session_id: str) -> dict:
        state = self._session(session_id)
        questions = []
        for qid in state.question_ids:
            prog = state.progress[qid]
            entry = {
                "question_id": qid,
                "selections": dict(prog.selections),
                "knowledge": prog.knowledge,
            }
            if prog.done:
                entry.update(self._derived(session_id, prog))
            questions.append(entry)
        return {
            "session_id": state.session_id,
            "participant_id": state.participant_id,
            "finalized": state.finalized,
            "questions": questions,
        }

    def _derived(self, session_id: str, prog: QuestionProgress) -> dict:
        state = self.sessions[session_id]
        js = JudgmentSet(
            participant_id=state.participant_id,
            question_id=prog.question_id,
            pA=interval_from_selection(prog.selections["A"]),
            pB=interval_from_selection(prog.selections["B"]),
            pC=interval_from_selection(prog.selections["C"]),
            pD=interval_from_selection(prog.selections["D"]),
            knowledge=KnowledgeLevel(prog.knowledge),
        )
        verdict = classify(js)
        sigma2 = sigma2_for(js.knowledge, self.sigma_map)
        recompositions = {
            tag: float(
                RecompositionRule(tag, sigma2 if tag == "ARA" else None).apply(
                    js.pB.midpoint, js.pC.midpoint
                )
            )
            for tag in ("EUM", "ARA", "ARU", "MNL")
        }
        return {
            "verdict": {"quadrant": verdict.quadrant, "consistent": verdict.consistent},
            "recompositions": recompositions,
            "sigma2": sigma2,
        }

    def export_sets(self) -> list[JudgmentSet]:
        """Judgment sets of all finalized sessions, in pipeline order."""
        sets = []
        for session_id in sorted(self.sessions):
            state = self.sessions[session_id]
            if state.finalized:
                sets.extend(state.judgment_sets())
        return sorted(sets, key=lambda js: (js.participant_id, js.question_id))

    def summary_report(self) -> dict:
        from advforecast.consistency import inconsistency_histogram, quadrant_matrix

        sets = self.export_sets()
        report: dict = {
            "sessions": {
                "total": len(self.sessions),
                "finalized": sum(1 for s in self.sessions.values() if s.finalized),
            },
            "questions": {
                qid: {"outcome": q.outcome} for qid, q in sorted(self.questions.items())
            },
        }
        if not sets:
            report["consistency"] = None
            report["recompositions"] = None
            report["scores"] = {"status": "no finalized sessions"}
            return report

        report["consistency"] = {
            "quadrants": quadrant_matrix(sets),
            "histogram": {
                str(k): v for k, v in inconsistency_histogram(sets).items()
            } if _uniform_counts(sets) else None,
        }
        pooled: dict[str, dict[str, float]] = {}
        for js in sets:
            sigma2 = sigma2_for(js.knowledge, self.sigma_map)
            for tag in ("EUM", "ARA", "ARU", "MNL"):
                rule = RecompositionRule(tag, sigma2 if tag == "ARA" else None)
                pooled.setdefault(js.question_id, {}).setdefault(tag, 0.0)
                pooled[js.question_id][tag] += float(rule.apply(js.pB.midpoint, js.pC.midpoint))
        counts: dict[str, int] = {}
        for js in sets:
            counts[js.question_id] = counts.get(js.question_id, 0) + 1
        report["recompositions"] = {
            qid: {tag: total / counts[qid] for tag, total in tags.items()}
            for qid, tags in sorted(pooled.items())
        }

        outcomes = {qid: q.outcome for qid, q in self.questions.items() if q.outcome is not None}
        if not outcomes:
            report["scores"] = {"status": "awaiting outcomes"}
        else:
            per_kind: dict[str, list[float]] = {}
            for js in sets:
                if js.question_id not in outcomes:
                    continue
                o = outcomes[js.question_id]
                sigma2 = sigma2_for(js.knowledge, self.sigma_map)
                per_kind.setdefault("direct-pA", []).append(brier(js.pA.midpoint, o))
                per_kind.setdefault("direct-pD", []).append(brier(js.pD.midpoint, o))
                for tag in ("EUM", "ARA", "ARU", "MNL"):
                    rule = RecompositionRule(tag, sigma2 if tag == "ARA" else None)
                    per_kind.setdefault(tag, []).append(
                        brier(rule.apply(js.pB.midpoint, js.pC.midpoint), o)
                    )
            report["scores"] = {
                "path": "midpoint",
                "mean_brier": {k: sum(v) / len(v) for k, v in sorted(per_kind.items()) if v},
                "n_scored_sets": len(per_kind.get("direct-pA", [])),
            }
        return report


def _uniform_counts(sets) -> bool:
    counts: dict[str, int] = {}
    for js in sets:
        counts[js.participant_id] = counts.get(js.participant_id, 0) + 1
    return len(set(counts.values())) <= 1


def _validated_interval(selection) -> IntervalResponse:
    if not isinstance(selection, int) or isinstance(selection, bool):
        raise ValidationError(f"selection {selection!r} must be an integer percent")
    return interval_from_selection(selection)


def _describe_stage(prompt: dict) -> str:
    stage = prompt.get("stage")
    if stage == "complete":
        return "finalize"
    qid = prompt.get("question_id")
    if stage in TASK_STAGES:
        return f"task {stage} ({TASK_LABELS[stage]}) for {qid}"
    return f"{stage} for {qid}"


# -- HTTP layer ------------------------------------------------------------

# Request bodies live at module scope so FastAPI can resolve the stringized
# annotations (from __future__ import annotations) against module globals.


class CreateSessionBody(BaseModel):
    participant_id: str
    question_ids: list[str]


class ResponseBody(BaseModel):
    question_id: str
    task: str
    selection: int


class KnowledgeBody(BaseModel):
    question_id: str
    level: int


class OutcomeBody(BaseModel):
    outcome: int


def create_app(service: ElicitationService):
    """FastAPI adapter; all state lives in the ElicitationService."""
    from fastapi import FastAPI, Header, Request
    from fastapi.exceptions import RequestValidationError
    from fastapi.responses import JSONResponse

    app = FastAPI(title="advforecast session service")

    def error(status: int, code: str, message: str, expected: Optional[str] = None):
        body = {"code": code, "message": message}
        if expected is not None:
            body["expected"] = expected
        return JSONResponse(status_code=status, content=body)

    @app.exception_handler(ValidationError)
    async def _validation(request: Request, exc: ValidationError):
        return error(422, "validation-error", str(exc))

    @app.exception_handler(ProtocolError)
    async def _protocol(request: Request, exc: ProtocolError):
        return error(409, "protocol-error", str(exc), expected=exc.expected)

    @app.exception_handler(KeyError)
    async def _missing(request: Request, exc: KeyError):
        return error(404, "not-found", f"unknown resource {exc.args[0]!r}")

    @app.exception_handler(PermissionError)
    async def _forbidden(request: Request, exc: PermissionError):
        return error(403, "forbidden", str(exc))

    @app.exception_handler(RequestValidationError)
    async def _body(request: Request, exc: RequestValidationError):
        return error(422, "validation-error", str(exc.errors()))

    def require(token: Optional[str], session_id: Optional[str] = None, role: Optional[str] = None) -> tuple[str, str]:
        got_session, got_role = service.resolve_token(token)
        if session_id is not None and got_session != session_id:
            raise PermissionError("token does not belong to this session")
        if role is not None and got_role != role:
            raise PermissionError(f"{role} token required")
        return got_session, got_role

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        state = service.create_session(body.participant_id, body.question_ids)
        return {
            "session_id": state.session_id,
            "participant_token": state.participant_token,
            "facilitator_token": state.facilitator_token,
        }

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str, x_session_token: Optional[str] = Header(default=None)):
        _, role = require(x_session_token, session_id)
        if role == "facilitator":
            return service.facilitator_view(session_id)
        return service.participant_view(session_id)

    @app.post("/sessions/{session_id}/responses")
    def post_response(
        session_id: str,
        body: ResponseBody,
        x_session_token: Optional[str] = Header(default=None),
    ):
        require(x_session_token, session_id)
        return service.submit_response(session_id, body.question_id, body.task, body.selection)

    @app.post("/sessions/{session_id}/knowledge")
    def post_knowledge(
        session_id: str,
        body: KnowledgeBody,
        x_session_token: Optional[str] = Header(default=None),
    ):
        require(x_session_token, session_id)
        return service.submit_knowledge(session_id, body.question_id, body.level)

    @app.post("/sessions/{session_id}/finalize")
    def post_finalize(session_id: str, x_session_token: Optional[str] = Header(default=None)):
        _, role = require(x_session_token, session_id)
        summary = service.finalize(session_id)
        if role == "participant":
            return {"session_id": session_id, "finalized": True}
        return summary

    @app.post("/questions/{question_id}/outcome")
    def post_outcome(
        question_id: str,
        body: OutcomeBody,
        x_session_token: Optional[str] = Header(default=None),
    ):
        _, role = service.resolve_token(x_session_token)
        if role != "facilitator":
            raise PermissionError("facilitator token required")
        return service.record_outcome(question_id, body.outcome)

    @app.get("/reports/summary")
    def get_summary(x_session_token: Optional[str] = Header(default=None)):
        _, role = service.resolve_token(x_session_token)
        if role != "facilitator":
            raise PermissionError("facilitator token required")
        return service.summary_report()

    return app
