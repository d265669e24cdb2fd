"""Local HTTP API backing the interactive trace-review UI.

Algorithmic failure is data: a trace that runs but finds no usable outline
still returns 200 with ``outcome: failure`` so the UI can guide the user to
a manual trace. Transport-level codes are reserved for protocol misuse:
400 malformed body, 404 unknown image, 422 semantically invalid endpoints
(most prominently a start/end pair violating the swimming-left rule).
"""

from __future__ import annotations

import mimetypes
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from .chain import EndpointPair, Point
from .images import ImageLoadError, Rect, RgbImage, load_image
from .pipeline import TIERS, TraceConfig, TraceRequest, TraceResult, autotrace

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


@dataclass
class LoadedImage:
    image: RgbImage
    path: Path | None


@dataclass
class AcceptedOutline:
    revision: int
    points: list[list[int]]
    method: str


@dataclass
class SessionStore:
    """Per-process session state; mutation is serialized per image id."""

    images: dict[str, LoadedImage] = field(default_factory=dict)
    results: dict[str, TraceResult] = field(default_factory=dict)
    accepted: dict[str, list[AcceptedOutline]] = field(default_factory=dict)
    _locks: dict[str, threading.Lock] = field(default_factory=dict)
    _registry_lock: threading.Lock = field(default_factory=threading.Lock)

    def add_image(self, image_id: str, image: RgbImage, path: Path | None = None) -> None:
        with self._registry_lock:
            if image_id in self.images:
                raise ValueError(f"duplicate image id {image_id!r}")
            self.images[image_id] = LoadedImage(image=image, path=path)
            self._locks[image_id] = threading.Lock()

    def lock_for(self, image_id: str) -> threading.Lock:
        return self._locks[image_id]


class PointBody(BaseModel):
    x: int
    y: int


class TraceBody(BaseModel):
    image_id: str
    start: PointBody
    end: PointBody
    viewport: list[int] | None = Field(default=None, min_length=4, max_length=4)
    tier: str = "auto"
    max_dim: int = 600


class AcceptBody(BaseModel):
    points: list[list[int]]
    method: str = "manual"


def create_app(
    image_dir: str | Path | None = None,
    store: SessionStore | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Build the service; images found under ``image_dir`` are preloaded."""
    app = FastAPI(title="fintrace trace review")
    session = store if store is not None else SessionStore()
    app.state.store = session

    if image_dir is not None:
        for path in sorted(Path(image_dir).iterdir()):
            if path.suffix.lower() in IMAGE_SUFFIXES:
                try:
                    session.add_image(path.stem, load_image(path), path)
                except ImageLoadError:
                    continue

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/api/images")
    def list_images():
        return [
            {"id": image_id, "width": li.image.width, "height": li.image.height}
            for image_id, li in sorted(session.images.items())
        ]

    def _get(image_id: str) -> LoadedImage:
        li = session.images.get(image_id)
        if li is None:
            raise HTTPException(status_code=404, detail=f"unknown image id {image_id!r}")
        return li

    @app.get("/api/images/{image_id}")
    def get_image(image_id: str):
        li = _get(image_id)
        if li.path is not None and li.path.exists():
            media = mimetypes.guess_type(li.path.name)[0] or "application/octet-stream"
            return Response(content=li.path.read_bytes(), media_type=media)
        import io

        from PIL import Image

        buf = io.BytesIO()
        Image.fromarray(li.image.px).save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.post("/api/trace")
    def trace(body: TraceBody):
        li = _get(body.image_id)
        if body.tier not in TIERS:
            raise HTTPException(status_code=422, detail=f"tier must be one of {TIERS}")
        try:
            endpoints = EndpointPair(
                start=Point(body.start.x, body.start.y), end=Point(body.end.x, body.end.y)
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        try:
            viewport = Rect(*body.viewport) if body.viewport else None
            request = TraceRequest(
                image=li.image,
                endpoints=endpoints,
                viewport=viewport,
                tier=body.tier,
                config=TraceConfig(max_dim=body.max_dim),
            )
            result = autotrace(request)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        with session.lock_for(body.image_id):
            session.results[body.image_id] = result
        return result.to_dict()

    @app.post("/api/outlines/{image_id}/accept")
    def accept_outline(image_id: str, body: AcceptBody):
        li = _get(image_id)
        if len(body.points) < 2:
            raise HTTPException(status_code=422, detail="an outline needs at least two points")
        points = [[int(x), int(y)] for x, y in body.points]
        with session.lock_for(image_id):
            history = session.accepted.setdefault(image_id, [])
            revision = history[-1].revision + 1 if history else 1
            history.append(AcceptedOutline(revision=revision, points=points, method=body.method))
        if li.path is not None:
            import json

            out = li.path.with_suffix(".outline.json")
            out.write_text(
                json.dumps(
                    {
                        "method": body.method,
                        "threshold": 0,
                        "scale": 1,
                        "closed_form": False,
                        "points": points,
                        "revision": revision,
                    },
                    indent=2,
                )
                + "\n"
            )
        return {"image_id": image_id, "revision": revision, "point_count": len(points)}

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
