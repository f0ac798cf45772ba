"""HTTP/JSON interface for live exploration sessions.

A thin shell over the session module: every state transition maps to one
session-module call. Sessions live in memory with per-session locks;
catalogs are shared read-only.
"""

from __future__ import annotations

import io
import json
import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response
from PIL import Image
from pydantic import BaseModel

from .catalog import Catalog, load_catalog
from .imaging import EmbeddingStore
from .session import SessionState, create_session, end_session, submit_feedback


class CreateSessionBody(BaseModel):
    strategy: str
    catalog: str | None = None
    seed: int | None = None


class FeedbackBody(BaseModel):
    selected: list[str]
    round: int


@dataclass
class _LiveSession:
    state: SessionState
    catalog_name: str
    lock: threading.Lock = field(default_factory=threading.Lock)
    transcript: dict | None = None


@dataclass
class _CatalogBundle:
    catalog: Catalog
    store: EmbeddingStore
    name: str

    def image_bytes(self, design_id: str) -> bytes:
        if self.catalog.source_dir is not None:
            path = self.catalog.source_dir / "images" / f"{design_id}.png"
            if path.is_file():
                return path.read_bytes()
        buf = io.BytesIO()
        Image.fromarray(self.catalog[design_id].image_u8).save(buf, format="PNG")
        return buf.getvalue()


def create_app(
    catalogs: dict[str, Catalog],
    stores: dict[str, EmbeddingStore] | None = None,
    transcript_dir: str | Path | None = None,
) -> FastAPI:
    """Build the API around preloaded catalogs; the first is the default."""
    if not catalogs:
        raise ValueError("at least one catalog is required")
    bundles = {
        name: _CatalogBundle(
            catalog=cat,
            store=(stores or {}).get(name) or EmbeddingStore.build(cat),
            name=name,
        )
        for name, cat in catalogs.items()
    }
    default_name = next(iter(bundles))
    sessions: dict[str, _LiveSession] = {}
    registry_lock = threading.Lock()

    app = FastAPI(title="designloop")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def _session_view(live: _LiveSession) -> dict:
        state = live.state
        metrics = []
        for rec in state.history:
            entry = {"round": rec.round, "num_selected": rec.num_selected}
            if rec.batch_auc is not None:
                entry["batch_auc"] = rec.batch_auc
            if rec.log_loss is not None:
                entry["log_loss"] = rec.log_loss
            metrics.append(entry)
        return {
            "session_id": state.id,
            "catalog": live.catalog_name,
            "strategy": state.strategy,
            "seed": state.seed,
            "round": state.round,
            "status": state.status,
            "proposals": [
                {"id": pid, "image_url": f"/designs/{pid}/image"}
                for pid in state.current_proposals
            ],
            "metrics": metrics,
        }

    @app.post("/sessions")
    def create(body: CreateSessionBody) -> dict:
        name = body.catalog or default_name
        if name not in bundles:
            raise HTTPException(404, f"unknown catalog {name!r}")
        bundle = bundles[name]
        seed = body.seed if body.seed is not None else secrets.randbits(32)
        try:
            state = create_session(
                bundle.catalog, body.strategy, seed=int(seed), store=bundle.store
            )
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from exc
        state.id = f"s{secrets.token_hex(8)}"
        with registry_lock:
            sessions[state.id] = _LiveSession(state=state, catalog_name=name)
        return _session_view(sessions[state.id])

    def _get(session_id: str) -> _LiveSession:
        live = sessions.get(session_id)
        if live is None:
            raise HTTPException(404, f"unknown session {session_id!r}")
        return live

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return _session_view(_get(session_id))

    @app.get("/sessions/{session_id}/metrics")
    def get_metrics(session_id: str) -> list[dict]:
        return _session_view(_get(session_id))["metrics"]

    @app.post("/sessions/{session_id}/feedback")
    def feedback(session_id: str, body: FeedbackBody) -> dict:
        live = _get(session_id)
        with live.lock:
            state = live.state
            if state.status != "active":
                raise HTTPException(409, "session has ended")
            if body.round != state.round:
                raise HTTPException(
                    409,
                    f"feedback for round {body.round} but session is at round {state.round}",
                )
            foreign = [d for d in body.selected if d not in set(state.current_proposals)]
            if foreign:
                raise HTTPException(422, f"ids not in current proposals: {foreign[:3]}")
            submit_feedback(state, body.selected)
            return _session_view(live)

    @app.delete("/sessions/{session_id}")
    def end(session_id: str) -> dict:
        live = _get(session_id)
        with live.lock:
            if live.transcript is None:
                live.transcript = end_session(live.state)
                if transcript_dir is not None:
                    out = Path(transcript_dir)
                    out.mkdir(parents=True, exist_ok=True)
                    (out / f"{live.state.id}.json").write_text(json.dumps(live.transcript))
            return live.transcript

    @app.get("/designs/{design_id}/image")
    def design_image(design_id: str) -> Response:
        for bundle in bundles.values():
            if design_id in bundle.catalog:
                return Response(bundle.image_bytes(design_id), media_type="image/png")
        raise HTTPException(404, f"unknown design {design_id!r}")

    @app.get("/catalogs")
    def list_catalogs() -> list[dict]:
        return [
            {"name": b.name, "size": len(b.catalog), "image_size": list(b.catalog.image_size)}
            for b in bundles.values()
        ]

    return app


def serve(
    catalog_dir: str | Path,
    port: int = 8000,
    host: str = "127.0.0.1",
    transcript_dir: str | Path | None = None,
) -> None:
    """Load a catalog directory and serve the API (blocking)."""
    import uvicorn

    path = Path(catalog_dir)
    catalog = load_catalog(path)
    app = create_app({path.name: catalog}, transcript_dir=transcript_dir)
    uvicorn.run(app, host=host, port=port)
