"""HTTP boundary for live annotation.

Hosts one loop: the current acquisition batch is exposed as an ordered queue,
annotators POST corrected labels, and the loop advances when the whole batch
is staged. A single lock serializes every dataset-version mutation.
"""

from __future__ import annotations

import io
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import Response
from pydantic import BaseModel

from . import annotate, datastore, loop
from .acquisition import AcqScore
from .annotate import CostModel
from .datastore import FullLabel, WeakLabel
from .evaluation import Prediction
from .loop import LoopConfig, LoopState


class AnnotationObject(BaseModel):
    box: list[float]
    class_id: int
    quality: int


class ActionEntry(BaseModel):
    kind: str
    seconds: float
    proposal_index: int | None = None
    class_id: int | None = None
    quality: int | None = None


class AnnotationSubmission(BaseModel):
    objects: list[AnnotationObject]
    actions: list[ActionEntry] = []


@dataclass
class PendingBatch:
    ordered_ids: list[str]
    scores: dict[str, AcqScore]
    proposals: dict[str, list[annotate.Proposal]]
    teacher_cache: dict[str, list[Prediction]]
    staged: dict[str, FullLabel] = field(default_factory=dict)
    staged_seconds: dict[str, float] = field(default_factory=dict)


class AnnotationServer:
    """Owns the loop state and the single pending batch."""

    def __init__(self, config: LoopConfig, simulate_annotator: bool = False):
        self.config = config
        self.simulate_annotator = simulate_annotator
        self.lock = threading.Lock()
        self.state: LoopState = loop.run_initial(config)
        self.pending: PendingBatch | None = None
        self.terminal = False
        self.session_costs: dict[str, float] = {}
        self._open_next_batch()

    # -- internal -----------------------------------------------------------

    def _open_next_batch(self) -> None:
        if self.state.t >= self.config.cycles:
            self.terminal = True
            self.pending = None
            return
        batch, scores, teacher_cache, student_cache = loop.select_acquisition(self.state)
        ordered = sorted(batch, key=lambda i: (-scores[i].fused, i))
        proposals = {
            i: annotate.prepare_proposals(student_cache[i], teacher_cache[i])
            for i in ordered
        }
        self.pending = PendingBatch(
            ordered_ids=ordered,
            scores=scores,
            proposals=proposals,
            teacher_cache=dict(teacher_cache),
        )

    def _auto_annotate(self) -> None:
        assert self.pending is not None
        for image_id in list(self.pending.ordered_ids):
            record = self.state.records[image_id]
            session = annotate.simulate_session(
                self.pending.proposals[image_id], record.ground_truth, self.config.cost
            )
            self._stage(image_id, session.label, session.total_seconds)

    def _stage(self, image_id: str, label: FullLabel, seconds: float) -> None:
        assert self.pending is not None
        self.pending.staged[image_id] = label
        self.pending.staged_seconds[image_id] = seconds
        self.session_costs[image_id] = seconds
        if len(self.pending.staged) == len(self.pending.ordered_ids):
            batch = frozenset(self.pending.ordered_ids)
            cache = {
                i: p for i, p in self.pending.teacher_cache.items() if i not in batch
            }
            loop.finish_cycle(
                self.state,
                batch,
                self.pending.staged,
                sum(self.pending.staged_seconds.values()),
                cache,
            )
            self._open_next_batch()

    # -- request handlers ----------------------------------------------------

    def get_queue(self) -> list[dict]:
        with self.lock:
            if self.pending is None:
                raise HTTPException(status_code=409, detail="no pending batch")
            entries = []
            for rank, image_id in enumerate(self.pending.ordered_ids, 1):
                if image_id in self.pending.staged:
                    continue
                record = self.state.records[image_id]
                score = self.pending.scores[image_id]
                entries.append(
                    {
                        "image_id": image_id,
                        "rank": rank,
                        "fused_score": score.fused,
                        "beta_md": score.beta_md,
                        "beta_iu": score.beta_iu,
                        "width": record.width,
                        "height": record.height,
                        "uri": f"/api/images/{image_id}",
                        "proposals": [
                            {
                                "box": list(p.box.as_tuple()),
                                "class_id": p.suggested_class,
                                "source": "D4" if p.source == "student" else "D3",
                                "confidence": p.confidence,
                            }
                            for p in self.pending.proposals[image_id]
                        ],
                    }
                )
            return entries

    def get_status(self) -> dict:
        with self.lock:
            pending = 0
            staged = 0
            if self.pending is not None:
                staged = len(self.pending.staged)
                pending = len(self.pending.ordered_ids) - staged
            latest = self.state.reports[-1].to_json() if self.state.reports else None
            return {
                "t": self.state.t,
                "pending": pending,
                "staged": staged,
                "budget": self.config.budget,
                "terminal": self.terminal,
                "latest_report": latest,
                "cumulative_seconds": self.state.cumulative_seconds,
                "num_classes": self.config.num_classes,
                "session_costs": dict(self.session_costs),
            }

    def submit(self, image_id: str, submission: AnnotationSubmission) -> dict:
        with self.lock:
            if self.pending is None:
                raise HTTPException(status_code=409, detail="no pending batch")
            if image_id not in self.pending.ordered_ids:
                raise HTTPException(status_code=404, detail=f"unknown image {image_id!r}")
            if image_id in self.pending.staged:
                raise HTTPException(status_code=409, detail="already submitted")
            try:
                label = FullLabel(
                    tuple(
                        datastore.LabeledObject(
                            box=datastore._box_from_json(o.box),
                            class_id=o.class_id,
                            quality=o.quality,
                        )
                        for o in submission.objects
                    )
                )
            except (datastore.DatasetError, ValueError) as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            record = self.state.records[image_id]
            candidate = datastore.ImageRecord(
                id=record.id,
                width=record.width,
                height=record.height,
                uri=record.uri,
                ground_truth=record.ground_truth,
                label=label,
            )
            violations = datastore.validate(candidate)
            if violations:
                raise HTTPException(status_code=422, detail=violations)
            seconds = sum(a.seconds for a in submission.actions)
            self._stage(image_id, label, seconds)
            return {
                "image_id": image_id,
                "staged": len(self.pending.staged) if self.pending else 0,
                "t": self.state.t,
                "terminal": self.terminal,
            }

    def get_image(self, image_id: str) -> Response:
        with self.lock:
            record = self.state.records.get(image_id)
            if record is None:
                raise HTTPException(status_code=404, detail=f"unknown image {image_id!r}")
            if record.uri and Path(record.uri).exists():
                data = Path(record.uri).read_bytes()
                media = "image/png" if record.uri.endswith(".png") else "image/x-portable-pixmap"
                return Response(content=data, media_type=media)
            from PIL import Image

            img = Image.new("RGB", (record.width, record.height), (48, 48, 56))
            buf = io.BytesIO()
            img.save(buf, format="PNG")
            return Response(content=buf.getvalue(), media_type="image/png")

    def get_label(self, image_id: str) -> dict:
        with self.lock:
            record = self.state.records.get(image_id)
            if record is None:
                raise HTTPException(status_code=404, detail=f"unknown image {image_id!r}")
            label = record.label
            if isinstance(label, WeakLabel):
                return {"kind": "weak", "classes": sorted(label.classes)}
            return {
                "kind": "full",
                "objects": [
                    {
                        "box": list(o.box.as_tuple()),
                        "class_id": o.class_id,
                        "quality": o.quality,
                    }
                    for o in label.objects
                ],
            }

    def advance(self) -> dict:
        """Simulation-mode shortcut: auto-annotate whatever is pending."""
        with self.lock:
            if not self.simulate_annotator:
                raise HTTPException(
                    status_code=403, detail="server not in simulation mode"
                )
            if self.pending is None:
                raise HTTPException(status_code=409, detail="no pending batch")
            self._auto_annotate()
            return {"t": self.state.t, "terminal": self.terminal}


def create_app(
    config: LoopConfig,
    simulate_annotator: bool = False,
    static_dir: str | Path | None = None,
) -> FastAPI:
    server = AnnotationServer(config, simulate_annotator=simulate_annotator)
    app = FastAPI(title="annotation loop")
    app.state.server = server

    @app.get("/api/queue")
    def queue():
        return server.get_queue()

    @app.get("/api/status")
    def status():
        return server.get_status()

    @app.get("/api/images/{image_id}")
    def image(image_id: str):
        return server.get_image(image_id)

    @app.get("/api/labels/{image_id}")
    def label(image_id: str):
        return server.get_label(image_id)

    @app.post("/api/annotations/{image_id}")
    def submit(image_id: str, submission: AnnotationSubmission):
        return server.submit(image_id, submission)

    @app.post("/api/cycle/advance")
    def advance():
        return server.advance()

    if static_dir and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app
