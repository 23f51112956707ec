"""Session-based HTTP service backing the labeling UI.

Each session walks one labeler through a deck, strictly one histogram at a
time, persisting every verdict to an append-only JSON-lines store under the
service's data directory. Restarting the service reconstructs all sessions
from disk. Intended for a trusted local/LAN setting; there is no
authentication beyond the opaque session token.
"""

from __future__ import annotations

import json
import secrets
import threading
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .binsearch import BinSearchSpec, optimal_bin_count
from .distances import DistanceKind
from .errors import DomainError, HistogramGenerationError
from .montecarlo import MCConfig
from .study import (
    DEFAULT_PER_CATEGORY,
    LabelRecord,
    StudyDeck,
    analyze_study,
    append_label,
    generate_deck,
    read_labels,
)


class DeckSpecModel(BaseModel):
    per_category: int = DEFAULT_PER_CATEGORY
    shuffle_seed: int = 0
    bin_counts: list[int] | None = None
    target_distances: list[float] | None = None

    def build(self) -> StudyDeck:
        categories = None
        if self.bin_counts is not None or self.target_distances is not None:
            from .study import DEFAULT_BIN_COUNTS, DEFAULT_TARGET_DISTANCES

            ks = self.bin_counts or list(DEFAULT_BIN_COUNTS)
            ds = self.target_distances or list(DEFAULT_TARGET_DISTANCES)
            categories = [(k, d) for k in ks for d in ds]
        return generate_deck(
            categories=categories,
            per_category=self.per_category,
            shuffle_seed=self.shuffle_seed,
        )


class CreateSessionRequest(BaseModel):
    deck_spec: DeckSpecModel | None = None
    deck_file: str | None = None


class SubmitLabelRequest(BaseModel):
    histogram_id: str
    verdict: Literal["accept", "reject"]
    labeler_id: str | None = Field(default=None, max_length=64)


class Session:
    """One labeler's walk through a deck, persisted under ``directory``."""

    def __init__(self, session_id: str, deck: StudyDeck, directory: Path):
        self.session_id = session_id
        self.deck = deck
        self.directory = directory
        self.labels_path = directory / "labels.jsonl"
        self.labels: list[LabelRecord] = (
            read_labels(self.labels_path) if self.labels_path.exists() else []
        )
        self.lock = threading.Lock()

    @property
    def cursor(self) -> int:
        return len(self.labels)

    @property
    def total(self) -> int:
        return len(self.deck)

    def persist(self) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        self.deck.save(self.directory / "deck.json")
        (self.directory / "meta.json").write_text(
            json.dumps({"session_id": self.session_id, "total": self.total}) + "\n"
        )

    def record(self, label: LabelRecord) -> None:
        append_label(self.labels_path, label)
        self.labels.append(label)


class SessionStore:
    """All sessions under one data directory; reload-safe."""

    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.sessions_dir = self.data_dir / "sessions"
        self.sessions: dict[str, Session] = {}
        self.lock = threading.Lock()
        self._load_existing()

    def _load_existing(self) -> None:
        if not self.sessions_dir.is_dir():
            return
        for entry in sorted(self.sessions_dir.iterdir()):
            deck_path = entry / "deck.json"
            if not deck_path.exists():
                continue
            session = Session(entry.name, StudyDeck.load(deck_path), entry)
            self.sessions[session.session_id] = session

    def create(self, deck: StudyDeck) -> Session:
        with self.lock:
            session_id = secrets.token_hex(8)
            session = Session(session_id, deck, self.sessions_dir / session_id)
            session.persist()
            self.sessions[session_id] = session
            return session

    def get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}") from None


def create_app(data_dir: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    """Build the FastAPI application rooted at ``data_dir``."""
    app = FastAPI(title="rank histogram labeling service")
    store = SessionStore(Path(data_dir))
    app.state.store = store

    @app.post("/sessions")
    def create_session(request: CreateSessionRequest | None = None) -> dict:
        request = request or CreateSessionRequest()
        if request.deck_file is not None:
            path = Path(request.deck_file)
            if not path.exists():
                raise HTTPException(status_code=400, detail=f"deck file not found: {path}")
            try:
                deck = StudyDeck.load(path)
            except DomainError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
        else:
            spec = request.deck_spec or DeckSpecModel()
            try:
                deck = spec.build()
            except (DomainError, HistogramGenerationError) as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
        session = store.create(deck)
        return {"session_id": session.session_id, "total": session.total}

    @app.get("/sessions/{session_id}/next")
    def next_item(session_id: str) -> dict:
        session = store.get(session_id)
        with session.lock:
            if session.cursor >= session.total:
                return {"done": True, "progress": session.cursor, "total": session.total}
            payload = session.deck.items[session.cursor].display_payload()
            payload.update(progress=session.cursor, total=session.total)
            return payload

    @app.post("/sessions/{session_id}/labels")
    def submit_label(session_id: str, request: SubmitLabelRequest) -> dict:
        session = store.get(session_id)
        with session.lock:
            ack = {"progress": session.cursor, "total": session.total}
            # idempotent resend of the label just recorded
            if session.labels and session.labels[-1].histogram_id == request.histogram_id:
                if session.labels[-1].verdict == request.verdict:
                    return ack
                raise HTTPException(
                    status_code=409,
                    detail=f"{request.histogram_id} already labeled with a different verdict",
                )
            if session.cursor >= session.total:
                raise HTTPException(status_code=409, detail="session already complete")
            current = session.deck.items[session.cursor]
            if request.histogram_id != current.histogram_id:
                raise HTTPException(
                    status_code=409,
                    detail=f"expected label for {current.histogram_id}, "
                    f"got {request.histogram_id}",
                )
            session.record(
                LabelRecord.new(request.histogram_id, request.verdict, request.labeler_id)
            )
            return {"progress": session.cursor, "total": session.total}

    @app.get("/sessions/{session_id}/results")
    def session_results(
        session_id: str,
        alpha: float | None = None,
        n: int | None = None,
        reps: int = 20_000,
        k_min: int = 2,
        k_max: int = 12,
        seed: int = 0,
    ) -> dict:
        session = store.get(session_id)
        with session.lock:
            if not session.labels:
                raise HTTPException(status_code=400, detail="no labels in session yet")
            labels = list(session.labels)
        try:
            analysis = analyze_study(session.deck, labels)
        except DomainError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        payload = analysis.to_dict()
        payload["session_id"] = session.session_id
        payload["progress"] = len(labels)
        payload["total"] = session.total
        if alpha is not None and n is not None:
            try:
                payload["optimal_k"] = {
                    kind.value: optimal_bin_count(
                        BinSearchSpec(
                            kind=kind,
                            alpha=alpha,
                            n=n,
                            c_target=analysis.thresholds[kind].c_acc,
                            k_min=k_min,
                            k_max=k_max,
                            mc=MCConfig(replications=reps, master_seed=seed),
                        )
                    ).to_dict()
                    for kind in DistanceKind
                }
            except DomainError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
        return payload

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
