"""REST service: sessions, user management, content navigation, and chat.

Every endpoint except ``POST /login`` requires a valid session token,
presented either as the ``session_token`` cookie issued at login or as an
``Authorization: Bearer`` header. User management additionally requires the
admin role. Errors are JSON bodies ``{"error": code, "message": text}``
with conventional status codes.
"""

from __future__ import annotations

import secrets
import threading
from dataclasses import dataclass
from pathlib import Path

from fastapi import Body, Depends, FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .adapters import (
    ExternalEmbedder,
    ExternalGenerator,
    ExternalScorer,
    ExternalTts,
)
from .config import AppConfig
from .corpus import Corpus, load_corpus
from .embedding import HashingEmbedder
from .errors import (
    DuplicateUsernameError,
    EmptyIndexError,
    EmptyQueryError,
    ScorerFailureError,
    SlidetutorError,
    TtsFailureError,
    UnknownUserError,
)
from .index import FlatIndex, MANIFEST_NAME
from .pipeline import PassthroughGenerator, PipelineConfig, retrieve
from .rerank import LexicalScorer
from .sessions import Session, SessionStore
from .users import USER_TYPES, UserStore

COOKIE_NAME = "session_token"


class ApiError(Exception):
    """HTTP-facing error with a stable machine code."""

    def __init__(self, status_code: int, code: str, message: str) -> None:
        super().__init__(message)
        self.status_code = status_code
        self.code = code
        self.message = message


@dataclass
class AudioEntry:
    text: str
    data: bytes | None = None


class AudioRegistry:
    """Issued audio ids and their (lazily retried) synthesized bytes."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._entries: dict[str, AudioEntry] = {}

    def issue(self, text: str, data: bytes | None = None) -> str:
        audio_id = secrets.token_hex(16)
        with self._lock:
            self._entries[audio_id] = AudioEntry(text=text, data=data)
        return audio_id

    def get(self, audio_id: str) -> AudioEntry | None:
        with self._lock:
            return self._entries.get(audio_id)

    def store(self, audio_id: str, data: bytes) -> None:
        with self._lock:
            entry = self._entries.get(audio_id)
            if entry is not None:
                entry.data = data


def _build_embedder(cfg: AppConfig):
    if cfg.embedder.mode == "external":
        return ExternalEmbedder(cfg.embedder.url, cfg.embedder.dim)
    return HashingEmbedder(cfg.embedder.dim or 256)


def _build_scorer(cfg: AppConfig):
    if cfg.rerank.mode == "external":
        return ExternalScorer(cfg.rerank.url)
    return LexicalScorer()


def _build_generator(cfg: AppConfig):
    if cfg.generator.mode == "external":
        return ExternalGenerator(cfg.generator.url)
    return PassthroughGenerator()


def _build_tts(cfg: AppConfig):
    if cfg.tts.mode == "external":
        return ExternalTts(cfg.tts.url)
    return None


def create_app(
    cfg: AppConfig,
    corpus: Corpus | None = None,
    index: FlatIndex | None = None,
) -> FastAPI:
    """Assemble the service from config; corpus/index may be injected.

    Without injection, the corpus loads leniently from ``cfg.corpus_dir``
    and the index from ``cfg.index_path`` when present; chat and content
    endpoints answer 503 until both exist.
    """
    if corpus is None:
        corpus_dir = Path(cfg.corpus_dir)
        if (corpus_dir / "course.json").is_file():
            corpus = load_corpus(corpus_dir, strict=False)
    if index is None:
        index_dir = Path(cfg.index_path)
        if (index_dir / MANIFEST_NAME).is_file():
            index = FlatIndex.load(index_dir)

    embedder = _build_embedder(cfg)
    if index is not None and index.dimension != embedder.dimension:
        raise ValueError(
            f"index dimension {index.dimension} does not match "
            f"embedder dimension {embedder.dimension}"
        )

    scorer = _build_scorer(cfg)
    generator = _build_generator(cfg)
    tts = _build_tts(cfg)
    users = UserStore(cfg.db_path)
    sessions = SessionStore(lifetime_seconds=cfg.session_lifetime_hours * 3600)
    audio = AudioRegistry()
    pipeline_cfg = PipelineConfig(
        k=cfg.k,
        rerank_enabled=True,
        max_input_chars=cfg.max_input_chars,
        generator=generator,
        final_n=1,
    )

    app = FastAPI(title="slidetutor", docs_url=None, redoc_url=None)
    app.state.users = users
    app.state.sessions = sessions

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status_code,
            content={"error": exc.code, "message": exc.message},
        )

    @app.exception_handler(SlidetutorError)
    async def handle_library_error(
        request: Request, exc: SlidetutorError
    ) -> JSONResponse:
        return JSONResponse(
            status_code=500, content={"error": exc.code, "message": str(exc)}
        )

    # --- auth helpers ----------------------------------------------------

    def require_session(request: Request) -> Session:
        token = request.cookies.get(COOKIE_NAME)
        if not token:
            header = request.headers.get("authorization", "")
            if header.lower().startswith("bearer "):
                token = header[7:].strip()
        session = sessions.get(token)
        if session is None:
            raise ApiError(401, "unauthorized", "missing, expired, or revoked session")
        return session

    def require_admin(session: Session = Depends(require_session)) -> Session:
        try:
            user = users.get(session.user_id)
        except UnknownUserError:
            raise ApiError(401, "unauthorized", "session user no longer exists")
        if user.user_type != "admin":
            raise ApiError(403, "forbidden", "admin role required")
        return session

    def require_content() -> tuple[Corpus, FlatIndex]:
        if corpus is None or index is None:
            raise ApiError(503, "index_not_loaded", "corpus or index not loaded")
        return corpus, index

    # --- sessions ---------------------------------------------------------

    @app.post("/login")
    def login(payload: dict = Body(...)) -> JSONResponse:
        username = payload.get("username")
        password = payload.get("password")
        if not isinstance(username, str) or not isinstance(password, str):
            raise ApiError(400, "missing_field", "username and password required")
        user = users.authenticate(username, password)
        if user is None:
            raise ApiError(401, "invalid_credentials", "bad username or password")
        session = sessions.create(user.user_id)
        response = JSONResponse(
            {"token": session.token, "user": user.public_dict()}
        )
        response.set_cookie(
            COOKIE_NAME,
            session.token,
            max_age=int(sessions.lifetime_seconds),
            httponly=True,
            samesite="lax",
            path="/",
        )
        return response

    @app.post("/logout")
    def logout(session: Session = Depends(require_session)) -> JSONResponse:
        sessions.revoke(session.token)
        response = JSONResponse({"ok": True})
        response.delete_cookie(COOKIE_NAME, path="/")
        return response

    # --- user management ---------------------------------------------------

    def _user_fields(payload: dict, required: bool):
        username = payload.get("username")
        password = payload.get("password")
        user_type = payload.get("user_type")
        if required and (
            not isinstance(username, str)
            or not isinstance(password, str)
            or not isinstance(user_type, str)
        ):
            raise ApiError(
                400, "missing_field", "username, password, and user_type required"
            )
        for name, value in (
            ("username", username),
            ("password", password),
            ("user_type", user_type),
        ):
            if value is not None and not isinstance(value, str):
                raise ApiError(400, "invalid_field", f"{name} must be a string")
        if user_type is not None and user_type not in USER_TYPES:
            raise ApiError(
                400, "invalid_field", f"user_type must be one of {sorted(USER_TYPES)}"
            )
        return username, password, user_type

    @app.post("/user", status_code=201)
    def create_user(
        payload: dict = Body(...), _: Session = Depends(require_admin)
    ) -> dict:
        username, password, user_type = _user_fields(payload, required=True)
        if not username or not password:
            raise ApiError(400, "missing_field", "username and password nonempty")
        try:
            user = users.add(username, password, user_type)
        except DuplicateUsernameError as exc:
            raise ApiError(409, exc.code, str(exc))
        return user.public_dict()

    @app.put("/user/{user_id}")
    def update_user(
        user_id: int, payload: dict = Body(...), _: Session = Depends(require_admin)
    ) -> dict:
        username, password, user_type = _user_fields(payload, required=False)
        try:
            user = users.update(
                user_id, username=username, password=password, user_type=user_type
            )
        except UnknownUserError as exc:
            raise ApiError(404, exc.code, str(exc))
        except DuplicateUsernameError as exc:
            raise ApiError(409, exc.code, str(exc))
        except ValueError as exc:
            raise ApiError(400, "invalid_field", str(exc))
        return user.public_dict()

    @app.delete("/user/{user_id}")
    def delete_user(user_id: int, _: Session = Depends(require_admin)) -> dict:
        try:
            users.delete(user_id)
        except UnknownUserError as exc:
            raise ApiError(404, exc.code, str(exc))
        sessions.revoke_user(user_id)
        return {"ok": True}

    @app.get("/users/all")
    def list_all_users(_: Session = Depends(require_admin)) -> list[dict]:
        return [u.public_dict() for u in users.list()]

    @app.get("/users/admins")
    def list_admin_users(_: Session = Depends(require_admin)) -> list[dict]:
        return [u.public_dict() for u in users.list("admin")]

    @app.get("/users/regular")
    def list_regular_users(_: Session = Depends(require_admin)) -> list[dict]:
        return [u.public_dict() for u in users.list("regular")]

    # --- chat ---------------------------------------------------------------

    @app.post("/chat")
    def chat(
        payload: dict = Body(...), _: Session = Depends(require_session)
    ) -> dict:
        live_corpus, live_index = require_content()
        question = payload.get("question")
        if not isinstance(question, str) or not question.strip():
            raise ApiError(400, "empty_query", "question required")
        want_audio = bool(payload.get("want_audio", False))

        try:
            result = retrieve(
                question, pipeline_cfg, live_index, live_corpus, embedder, scorer
            )
        except EmptyQueryError as exc:
            raise ApiError(400, exc.code, str(exc))
        except EmptyIndexError as exc:
            raise ApiError(503, exc.code, str(exc))
        except ScorerFailureError as exc:
            raise ApiError(502, exc.code, str(exc))

        degraded = result.degraded
        audio_url = None
        if want_audio:
            if tts is None:
                degraded = True
            else:
                try:
                    data = tts.synthesize(result.answer_text)
                    audio_id = audio.issue(result.answer_text, data)
                except TtsFailureError:
                    # Text still flows; the audio id stays retryable.
                    degraded = True
                    audio_id = audio.issue(result.answer_text, None)
                audio_url = f"/audio/{audio_id}"

        body = {
            "answer_text": result.answer_text,
            "doc_id": result.best.doc_id,
            "week": result.week,
            "slide": result.slide,
            "image_url": f"/weeks/{result.week}/slides/{result.slide}/image",
            "transcript_available": live_corpus.transcript(result.week, result.slide)
            is not None,
            "degraded": degraded,
            "query_used": result.query_used,
            "stage1_score": result.best.stage1_score,
            "stage2_score": result.best.stage2_score,
        }
        if audio_url is not None:
            body["audio_url"] = audio_url
        context = {}
        if isinstance(payload.get("week"), int):
            context["week"] = payload["week"]
        if isinstance(payload.get("slide"), int):
            context["slide"] = payload["slide"]
        if context:
            body["context"] = context
        return body

    @app.get("/audio/{audio_id}")
    def get_audio(audio_id: str, _: Session = Depends(require_session)) -> Response:
        entry = audio.get(audio_id)
        if entry is None:
            raise ApiError(404, "not_found", f"unknown audio id {audio_id!r}")
        if entry.data is None:
            if tts is None:
                raise ApiError(502, "tts_failure", "no speech service configured")
            try:
                data = tts.synthesize(entry.text)
            except TtsFailureError as exc:
                raise ApiError(502, exc.code, str(exc))
            audio.store(audio_id, data)
            entry = audio.get(audio_id)
        return Response(content=entry.data, media_type="audio/wav")

    # --- content navigation ---------------------------------------------------

    @app.get("/courses")
    def list_courses(_: Session = Depends(require_session)) -> list[dict]:
        live_corpus, _unused = require_content()
        return [{"course_id": live_corpus.course_id, "title": live_corpus.title}]

    @app.get("/courses/{course_id}/weeks")
    def list_weeks(
        course_id: str, _: Session = Depends(require_session)
    ) -> list[int]:
        live_corpus, _unused = require_content()
        if course_id != live_corpus.course_id:
            raise ApiError(404, "not_found", f"unknown course {course_id!r}")
        return live_corpus.weeks()

    @app.get("/weeks/{week}/slides")
    def list_slides(week: int, _: Session = Depends(require_session)) -> list[dict]:
        live_corpus, _unused = require_content()
        if week not in live_corpus.weeks():
            raise ApiError(404, "not_found", f"unknown week {week}")
        return [
            {
                "week": rec.week,
                "slide": rec.slide,
                "image_url": f"/weeks/{rec.week}/slides/{rec.slide}/image",
                "transcript_available": rec.transcript_text is not None,
            }
            for rec in live_corpus.slides(week)
        ]

    def _known_slide(live_corpus: Corpus, week: int, slide: int) -> None:
        if not any(
            rec.week == week and rec.slide == slide for rec in live_corpus.records
        ):
            raise ApiError(404, "not_found", f"unknown slide {week}/{slide}")

    @app.get("/weeks/{week}/slides/{slide}/image")
    def slide_image(
        week: int, slide: int, _: Session = Depends(require_session)
    ) -> Response:
        live_corpus, _unused = require_content()
        _known_slide(live_corpus, week, slide)
        path = live_corpus.image_path(week, slide)
        if not path.is_file():
            raise ApiError(404, "not_found", f"no image for slide {week}/{slide}")
        return Response(content=path.read_bytes(), media_type="image/png")

    @app.get("/weeks/{week}/slides/{slide}/transcript")
    def slide_transcript(
        week: int, slide: int, _: Session = Depends(require_session)
    ) -> dict:
        live_corpus, _unused = require_content()
        _known_slide(live_corpus, week, slide)
        text = live_corpus.transcript(week, slide)
        if text is None:
            raise ApiError(404, "not_found", f"no transcript for slide {week}/{slide}")
        return {"text": text}

    if cfg.static_dir and Path(cfg.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=cfg.static_dir, html=True), name="ui")

    return app
