"""Creation-workflow backend: draft feedback, submission queue, validator
decisions, and dataset-state statistics over HTTP.

State is event-sourced: every mutation appends one JSON line to
``<state>/events.jsonl`` and is then applied to the in-memory fold.  Replaying
the log reconstructs the exact state, including every stored quality report
(reports are computed once, at command time, and carried inside the event).
A snapshot file is written every ``snapshot_every`` events to keep cold starts
cheap; replay ignores it when asked to verify from scratch.

Endpoints::

    POST /api/drafts                     {fields, label} -> DraftRecord
    POST /api/drafts/{id}/submit        -> {sample_id}
    POST /api/drafts/{id}/discard       -> 204
    GET  /api/queue                      -> [{sample, report}]
    POST /api/samples/{id}/decision     {verdict, feedback, validator_id}
    GET  /api/dataset/stats              -> {size, trajectory, acceptance_rate}
    GET  /api/samples/{id}               -> status + decision for creators

Reports come back component-level; pass ``?granularity=term`` on the draft
and queue endpoints to include per-token detail.  Rejection requires
non-empty feedback (422 otherwise).
"""

from __future__ import annotations

import datetime as _dt
import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .corpus import Dataset, Sample, TaskSchema, load_dataset
from .dqi import DqiConfig, DqiEngine, component_scores, quality_report
from .errors import (
    DqkitError,
    EmptyState,
    MissingFeedback,
    SchemaMismatch,
    UnknownDraft,
    UnknownSample,
    WrongState,
)

DRAFT = "draft"
SUBMITTED = "submitted"
ACCEPTED = "accepted"
REJECTED = "rejected"
DISCARDED = "discarded"


@dataclass
class DraftRecord:
    draft_id: str
    sample: Sample
    report: dict
    created_at: str
    status: str = DRAFT
    sample_id: Optional[str] = None
    decision: Optional[dict] = None

    def to_dict(self, granularity: str = "component") -> dict:
        report = dict(self.report)
        if granularity != "term":
            report.pop("terms", None)
        return {
            "draft_id": self.draft_id,
            "sample": self.sample.to_record(),
            "report": report,
            "created_at": self.created_at,
            "status": self.status,
            "sample_id": self.sample_id,
            "decision": self.decision,
        }


class Service:
    """Single-writer service core; all mutations go through ``_commit``."""

    def __init__(self, state_dir: str | Path, seed_dataset: Optional[Dataset] = None,
                 cfg: Optional[DqiConfig] = None, snapshot_every: int = 100):
        self.state_dir = Path(state_dir)
        self.state_dir.mkdir(parents=True, exist_ok=True)
        self.cfg = cfg or DqiConfig()
        self.snapshot_every = snapshot_every
        self._lock = threading.Lock()

        seed_path = self.state_dir / "seed.jsonl"
        schema_path = self.state_dir / "schema.json"
        if seed_path.exists() and schema_path.exists():
            schema = TaskSchema.from_dict(json.loads(schema_path.read_text("utf-8")))
            self.seed = load_dataset(seed_path, schema)
        else:
            if seed_dataset is None:
                raise EmptyState("first boot needs a seed dataset")
            if len(seed_dataset) < 2:
                raise EmptyState("seed dataset needs >= 2 samples")
            from .corpus import write_dataset

            write_dataset(seed_dataset, seed_path)
            schema_path.write_text(
                json.dumps(seed_dataset.schema.to_dict(), indent=2) + "\n", "utf-8")
            self.seed = seed_dataset

        self._reset_fold()
        for event in self._read_events():
            self._apply(event)

    # --- event machinery ---------------------------------------------------

    @property
    def events_path(self) -> Path:
        return self.state_dir / "events.jsonl"

    def _read_events(self) -> list[dict]:
        if not self.events_path.exists():
            return []
        lines = self.events_path.read_text("utf-8").splitlines()
        return [json.loads(line) for line in lines if line.strip()]

    def _reset_fold(self) -> None:
        self.drafts: dict[str, DraftRecord] = {}
        self.sample_to_draft: dict[str, str] = {}
        self.queue_ids: list[str] = []
        self.accepted_samples: list[Sample] = []
        self.trajectory: list[dict] = []
        self.n_accepted = 0
        self.n_rejected = 0
        self.event_count = 0
        self.draft_seq = 0
        self.sample_seq = 0

    def _commit(self, event: dict) -> None:
        with self.events_path.open("a", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")
        self._apply(event)
        if self.snapshot_every and self.event_count % self.snapshot_every == 0:
            self._write_snapshot()

    def _apply(self, event: dict) -> None:
        kind = event["type"]
        if kind == "draft_created":
            self.draft_seq += 1
            sample = Sample(id=event["draft_id"], fields=dict(event["fields"]),
                            label=event["label"])
            self.drafts[event["draft_id"]] = DraftRecord(
                draft_id=event["draft_id"], sample=sample, report=event["report"],
                created_at=event["created_at"])
        elif kind == "draft_submitted":
            self.sample_seq += 1
            rec = self.drafts[event["draft_id"]]
            rec.status = SUBMITTED
            rec.sample_id = event["sample_id"]
            self.sample_to_draft[event["sample_id"]] = event["draft_id"]
            self.queue_ids.append(event["sample_id"])
        elif kind == "draft_discarded":
            self.drafts[event["draft_id"]].status = DISCARDED
        elif kind == "decision":
            rec = self.drafts[self.sample_to_draft[event["sample_id"]]]
            rec.decision = {"verdict": event["verdict"], "feedback": event["feedback"],
                            "validator_id": event["validator_id"]}
            self.queue_ids.remove(event["sample_id"])
            if event["verdict"] == "accept":
                rec.status = ACCEPTED
                self.n_accepted += 1
                self.accepted_samples.append(
                    Sample(id=event["sample_id"], fields=dict(rec.sample.fields),
                           label=rec.sample.label))
                self.trajectory.append(event["dqi_after"])
            else:
                rec.status = REJECTED
                self.n_rejected += 1
        else:
            raise ValueError(f"unknown event type {kind!r}")
        self.event_count += 1

    def _write_snapshot(self) -> None:
        snap = {
            "event_count": self.event_count,
            "stats": self.stats(),
        }
        (self.state_dir / "snapshot.json").write_text(
            json.dumps(snap, ensure_ascii=False, indent=2) + "\n", "utf-8")

    # --- views --------------------------------------------------------------

    def dataset_state(self) -> Dataset:
        return Dataset(self.seed.schema, list(self.seed.samples) + list(self.accepted_samples))

    def stats(self) -> dict:
        decided = self.n_accepted + self.n_rejected
        return {
            "size": len(self.dataset_state()),
            "trajectory": list(self.trajectory),
            "acceptance_rate": (self.n_accepted / decided) if decided else 0.0,
            "accepted": self.n_accepted,
            "rejected": self.n_rejected,
            "queue_length": len(self.queue_ids),
        }

    def queue(self) -> list[DraftRecord]:
        return [self.drafts[self.sample_to_draft[sid]] for sid in self.queue_ids]

    def get_by_sample_id(self, sample_id: str) -> DraftRecord:
        if sample_id not in self.sample_to_draft:
            raise UnknownSample(sample_id)
        return self.drafts[self.sample_to_draft[sample_id]]

    # --- commands -----------------------------------------------------------

    def post_draft(self, fields: dict, label: str) -> DraftRecord:
        with self._lock:
            state = self.dataset_state()
            draft_id = f"d-{self.draft_seq + 1:05d}"
            draft = Sample(id=draft_id, fields={k: str(v) for k, v in fields.items()},
                           label=label)
            report = quality_report(state, None, draft, self.cfg)
            report_dict = report.to_dict()
            report_dict["terms"] = self._term_detail(state, draft)
            event = {
                "type": "draft_created",
                "draft_id": draft_id,
                "fields": draft.fields,
                "label": label,
                "report": report_dict,
                "created_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            }
            self._commit(event)
            return self.drafts[draft_id]

    def _term_detail(self, state: Dataset, draft: Sample) -> dict:
        engine = DqiEngine(state.with_sample(draft), None, self.cfg)
        x = engine.index[draft.id]
        lex_id, lex_val = engine.lexical_neighbor(x)
        sem_id, sem_val = engine.semantic_neighbor(x)
        return {
            "token_pmi": [[tok, val] for tok, val in engine.token_pmi(x)],
            "nearest_lexical": [lex_id, lex_val],
            "nearest_semantic": [sem_id, sem_val],
        }

    def submit(self, draft_id: str) -> str:
        with self._lock:
            rec = self.drafts.get(draft_id)
            if rec is None:
                raise UnknownDraft(draft_id)
            if rec.status == SUBMITTED:
                return rec.sample_id  # idempotent re-submission
            if rec.status != DRAFT:
                raise WrongState(f"draft {draft_id} is {rec.status}")
            sample_id = f"s-{self.sample_seq + 1:05d}"
            self._commit({"type": "draft_submitted", "draft_id": draft_id,
                          "sample_id": sample_id})
            return sample_id

    def discard(self, draft_id: str) -> None:
        with self._lock:
            rec = self.drafts.get(draft_id)
            if rec is None:
                raise UnknownDraft(draft_id)
            if rec.status != DRAFT:
                raise WrongState(f"draft {draft_id} is {rec.status}")
            self._commit({"type": "draft_discarded", "draft_id": draft_id})

    def decide(self, sample_id: str, verdict: str, feedback: str = "",
               validator_id: str = "") -> DraftRecord:
        with self._lock:
            rec = self.get_by_sample_id(sample_id)
            if rec.status != SUBMITTED:
                raise WrongState(f"sample {sample_id} is {rec.status}")
            if verdict not in ("accept", "reject"):
                raise ValueError(f"verdict must be accept|reject, got {verdict!r}")
            if verdict == "reject" and not feedback.strip():
                raise MissingFeedback("rejection requires non-empty feedback")
            event = {"type": "decision", "sample_id": sample_id, "verdict": verdict,
                     "feedback": feedback, "validator_id": validator_id}
            if verdict == "accept":
                new_state = self.dataset_state().with_sample(
                    Sample(id=sample_id, fields=dict(rec.sample.fields),
                           label=rec.sample.label))
                event["dqi_after"] = component_scores(new_state, None, self.cfg).as_dict()
            self._commit(event)
            return rec

    # --- replay -------------------------------------------------------------

    def replay(self) -> "Service":
        """Fresh fold of the full event log (ignores any snapshot)."""
        clone = object.__new__(Service)
        clone.state_dir = self.state_dir
        clone.cfg = self.cfg
        clone.snapshot_every = 0
        clone._lock = threading.Lock()
        clone.seed = self.seed
        clone._reset_fold()
        for event in self._read_events():
            clone._apply(event)
        return clone


# --- HTTP layer ---------------------------------------------------------------

from pydantic import BaseModel


class DraftIn(BaseModel):
    fields: dict[str, str]
    label: str


class DecisionIn(BaseModel):
    verdict: str
    feedback: str = ""
    validator_id: str = ""


def build_app(service: Service):
    from fastapi import FastAPI, HTTPException, Query

    app = FastAPI(title="dqkit creation service")
    app.state.service = service

    def _http(e: DqkitError) -> HTTPException:
        status = 400
        if isinstance(e, (UnknownDraft, UnknownSample)):
            status = 404
        elif isinstance(e, WrongState):
            status = 409
        elif isinstance(e, MissingFeedback):
            status = 422
        elif isinstance(e, SchemaMismatch):
            status = 400
        return HTTPException(status_code=status,
                             detail={"error": type(e).__name__, "message": str(e)})

    @app.post("/api/drafts")
    def post_draft(body: DraftIn, granularity: str = Query("component")):
        try:
            rec = service.post_draft(body.fields, body.label)
        except DqkitError as e:
            raise _http(e)
        return rec.to_dict(granularity)

    @app.post("/api/drafts/{draft_id}/submit")
    def submit(draft_id: str):
        try:
            sample_id = service.submit(draft_id)
        except DqkitError as e:
            raise _http(e)
        return {"sample_id": sample_id}

    @app.post("/api/drafts/{draft_id}/discard", status_code=204)
    def discard(draft_id: str):
        try:
            service.discard(draft_id)
        except DqkitError as e:
            raise _http(e)

    @app.get("/api/queue")
    def queue(granularity: str = Query("component")):
        return [
            {"sample": rec.sample.to_record(), "sample_id": rec.sample_id,
             "report": rec.to_dict(granularity)["report"]}
            for rec in service.queue()
        ]

    @app.post("/api/samples/{sample_id}/decision")
    def decide(sample_id: str, body: DecisionIn):
        try:
            rec = service.decide(sample_id, body.verdict, body.feedback, body.validator_id)
        except DqkitError as e:
            raise _http(e)
        except ValueError as e:
            raise HTTPException(status_code=400, detail=str(e))
        return rec.to_dict()

    @app.get("/api/dataset/stats")
    def stats():
        return service.stats()

    @app.get("/api/samples/{sample_id}")
    def get_sample(sample_id: str):
        try:
            rec = service.get_by_sample_id(sample_id)
        except DqkitError as e:
            raise _http(e)
        return rec.to_dict()

    return app
