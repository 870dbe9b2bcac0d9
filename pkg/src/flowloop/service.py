"""Session-based HTTP service for the interactive studio.

A session holds one image + fluid mask and the user's current strokes.
Strokes are normalized server-side (20 points each); the synthesized
field and the loop preview are cached per session version and rebuilt
only when the strokes change. All error bodies are {"error": "..."}.
"""

from __future__ import annotations

import io
import json
import os
import threading
import uuid
import zipfile
from dataclasses import dataclass, field

from fastapi import FastAPI, File, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from starlette.exceptions import HTTPException as StarletteHTTPException

from .fields import (
    FluidMask,
    RasterImage,
    image_from_png,
    image_to_png,
    mask_from_png,
    mask_to_png,
    save_flo,
    visualize_flow,
)
from .motionsynth import synthesize_field
from .splat import render_loop
from .streamline import (
    MotionSketchSet,
    extract_streamlines,
    prepare_motion_stroke,
    sketches_from_dict,
    sketches_to_dict,
)

PREVIEW_MIN_FRAMES = 2
PREVIEW_MAX_FRAMES = 240
ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)  # fixed entry timestamps keep zips reproducible


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


@dataclass
class Session:
    sid: str
    image: RasterImage
    mask: FluidMask
    sketches: MotionSketchSet | None = None
    version: int = 1
    cached_field: tuple | None = None  # (version, MotionField)
    cached_preview: tuple | None = None  # (version, frames, zip bytes)
    lock: threading.RLock = field(default_factory=threading.RLock)


class SessionStore:
    """In-memory sessions with an optional on-disk snapshot directory."""

    def __init__(self, data_dir: str | None = None):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._data_dir = data_dir
        if data_dir:
            os.makedirs(data_dir, exist_ok=True)
            self._restore()

    def create(self, image: RasterImage, mask: FluidMask) -> Session:
        session = Session(sid=uuid.uuid4().hex, image=image, mask=mask)
        with self._lock:
            self._sessions[session.sid] = session
        self._snapshot(session)
        return session

    def get(self, sid: str) -> Session:
        with self._lock:
            session = self._sessions.get(sid)
        if session is None:
            raise ApiError(404, f"unknown session {sid}")
        return session

    def _dir_for(self, sid: str) -> str:
        return os.path.join(self._data_dir, sid)

    def _snapshot(self, session: Session) -> None:
        if not self._data_dir:
            return
        sdir = self._dir_for(session.sid)
        os.makedirs(sdir, exist_ok=True)
        image_to_png(session.image, os.path.join(sdir, "image.png"))
        mask_to_png(session.mask, os.path.join(sdir, "mask.png"))
        if session.sketches is not None:
            with open(os.path.join(sdir, "sketches.json"), "w", encoding="utf-8") as fh:
                json.dump(sketches_to_dict(session.sketches), fh)
        with open(os.path.join(sdir, "meta.json"), "w", encoding="utf-8") as fh:
            json.dump({"id": session.sid, "version": session.version}, fh)

    def _restore(self) -> None:
        for sid in sorted(os.listdir(self._data_dir)):
            sdir = self._dir_for(sid)
            meta_path = os.path.join(sdir, "meta.json")
            if not os.path.isfile(meta_path):
                continue
            try:
                with open(meta_path, "r", encoding="utf-8") as fh:
                    meta = json.load(fh)
                image = image_from_png(os.path.join(sdir, "image.png"))
                mask = mask_from_png(os.path.join(sdir, "mask.png"))
                session = Session(sid=meta["id"], image=image, mask=mask,
                                  version=int(meta["version"]))
                sk_path = os.path.join(sdir, "sketches.json")
                if os.path.isfile(sk_path):
                    with open(sk_path, "r", encoding="utf-8") as fh:
                        session.sketches = sketches_from_dict(json.load(fh))
                self._sessions[session.sid] = session
            except (OSError, ValueError, KeyError):
                continue  # skip corrupt snapshots rather than refuse to start

    def snapshot(self, session: Session) -> None:
        self._snapshot(session)


def _decode_png_pair(image_bytes: bytes, mask_bytes: bytes):
    try:
        image = image_from_png(io.BytesIO(image_bytes))
    except Exception:
        raise ApiError(400, "image is not a decodable PNG") from None
    try:
        mask = mask_from_png(io.BytesIO(mask_bytes))
    except Exception:
        raise ApiError(400, "mask is not a decodable PNG") from None
    if (image.width, image.height) != (mask.width, mask.height):
        raise ApiError(
            400,
            f"dimension mismatch: image {image.width}x{image.height} "
            f"vs mask {mask.width}x{mask.height}",
        )
    return image, mask


def _session_field(session: Session):
    """Synthesized field for the current version, cached."""
    if session.sketches is None or not session.sketches.strokes:
        raise ApiError(409, "no sketches submitted yet")
    if session.cached_field and session.cached_field[0] == session.version:
        return session.cached_field[1]
    fld = synthesize_field(session.sketches, session.mask)
    session.cached_field = (session.version, fld)
    return fld


def _zip_frames(frames) -> bytes:
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_STORED) as zf:
        for n, frame in enumerate(frames):
            png = io.BytesIO()
            image_to_png(frame, png)
            info = zipfile.ZipInfo(f"frame_{n:04d}.png", date_time=ZIP_EPOCH)
            zf.writestr(info, png.getvalue())
    return buf.getvalue()


def create_app(data_dir: str | None = None, studio_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="flowloop service")
    store = SessionStore(data_dir)
    app.state.store = store

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        return JSONResponse({"error": exc.message}, status_code=exc.status)

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(_req: Request, exc: StarletteHTTPException):
        return JSONResponse({"error": str(exc.detail)}, status_code=exc.status_code)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req: Request, exc: RequestValidationError):
        return JSONResponse({"error": str(exc.errors()[:1])}, status_code=422)

    @app.post("/sessions", status_code=201)
    def create_session(image: UploadFile = File(...), mask: UploadFile = File(...)):
        img, msk = _decode_png_pair(image.file.read(), mask.file.read())
        session = store.create(img, msk)
        return {"id": session.sid}

    @app.put("/sessions/{sid}/sketches")
    def put_sketches(sid: str, body: dict):
        session = store.get(sid)
        try:
            raw = sketches_from_dict(body)
        except ValueError as exc:
            raise ApiError(422, str(exc)) from None
        if raw.canvas != (session.image.width, session.image.height):
            raise ApiError(
                422,
                f"canvas {raw.canvas[0]}x{raw.canvas[1]} does not match image "
                f"{session.image.width}x{session.image.height}",
            )
        try:
            prepared = tuple(prepare_motion_stroke(s) for s in raw.strokes)
        except ValueError as exc:
            raise ApiError(422, str(exc)) from None
        normalized = MotionSketchSet(prepared, canvas=raw.canvas)
        with session.lock:
            session.sketches = normalized
            session.version += 1
            session.cached_field = None
            session.cached_preview = None
            store.snapshot(session)
            return {"version": session.version, "sketches": sketches_to_dict(normalized)}

    @app.get("/sessions/{sid}/field")
    def get_field(sid: str, format: str = "png"):
        if format not in ("png", "flo"):
            raise ApiError(422, f"format must be png or flo, got {format!r}")
        session = store.get(sid)
        with session.lock:
            fld = _session_field(session)
            headers = {"X-Session-Version": str(session.version)}
            if format == "flo":
                return Response(
                    save_flo(fld), media_type="application/octet-stream", headers=headers
                )
            png = io.BytesIO()
            image_to_png(visualize_flow(fld), png)
            return Response(png.getvalue(), media_type="image/png", headers=headers)

    @app.get("/sessions/{sid}/streamlines")
    def get_streamlines(sid: str):
        session = store.get(sid)
        with session.lock:
            fld = _session_field(session)
            lines = extract_streamlines(fld, session.mask)
            return JSONResponse(
                sketches_to_dict(lines),
                headers={"X-Session-Version": str(session.version)},
            )

    @app.get("/sessions/{sid}/preview")
    def get_preview(sid: str, frames: int = 60):
        if not PREVIEW_MIN_FRAMES <= frames <= PREVIEW_MAX_FRAMES:
            raise ApiError(
                422,
                f"frames must be within [{PREVIEW_MIN_FRAMES}, {PREVIEW_MAX_FRAMES}], got {frames}",
            )
        session = store.get(sid)
        with session.lock:
            cached = session.cached_preview
            if cached and cached[0] == session.version and cached[1] == frames:
                payload, hit = cached[2], "hit"
            else:
                fld = _session_field(session)
                seq = render_loop(session.image, fld, session.mask, frames)
                payload = _zip_frames(seq.frames)
                session.cached_preview = (session.version, frames, payload)
                hit = "miss"
            return Response(
                payload,
                media_type="application/zip",
                headers={"X-Session-Version": str(session.version), "X-Cache": hit},
            )

    if studio_dir and os.path.isdir(studio_dir):
        app.mount("/studio", StaticFiles(directory=studio_dir, html=True), name="studio")

    return app
