"""HTTP service over a built bundle: map data verbatim, overlays on demand.

Every endpoint is a pure function of (bundle, corpus, request); the
bundle and corpus never change for the lifetime of the process, so
handlers need no coordination.
"""

import urllib.error
import urllib.request
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import overlay as overlays
from .bundle import Bundle, load_bundle, node_info, search

_ERROR_NAMES = {
    400: "bad_request",
    404: "not_found",
    405: "method_not_allowed",
    500: "internal_error",
}


def _error(status: int, detail: str) -> JSONResponse:
    return JSONResponse({"error": _ERROR_NAMES.get(status, "error"),
                         "detail": detail}, status_code=status)


def _fetch(url: str, timeout: float = 10.0) -> str:
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            charset = resp.headers.get_content_charset() or "utf-8"
            return resp.read().decode(charset, errors="replace")
    except (urllib.error.URLError, OSError, ValueError) as e:
        raise HTTPException(400, f"could not fetch {url!r}: {e}")


def create_app(bundle, static_dir=None) -> FastAPI:
    """Build the application around an already-validated bundle.

    Accepts a Bundle or a path to one. static_dir, when given and
    present, is mounted at / for the browser client; the API lives
    under /api either way.
    """
    if not isinstance(bundle, Bundle):
        bundle = load_bundle(bundle)
    corpus = bundle.corpus
    known_universities = {u.university_id for u in corpus.universities}

    app = FastAPI(title="rtopmap", docs_url=None, redoc_url=None)

    @app.exception_handler(StarletteHTTPException)
    async def on_http_error(request, exc):
        return _error(exc.status_code, str(exc.detail))

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request, exc):
        detail = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}"
            for err in exc.errors())
        return _error(400, detail)

    def require_university(university: str):
        if university not in known_universities:
            raise HTTPException(404, f"unknown university {university!r}")

    def overlay_json(fn, *args, **kwargs) -> dict:
        try:
            result = fn(*args, **kwargs)
        except ValueError as e:
            raise HTTPException(400, str(e))
        return result.to_json()

    @app.get("/api/manifest")
    def manifest():
        return bundle.manifest

    @app.get("/api/levels/{z}")
    def level(z: int):
        if not 1 <= z <= len(bundle.levels):
            raise HTTPException(
                404, f"no zoom level {z}; levels run 1..{len(bundle.levels)}")
        return bundle.levels[z - 1]

    @app.get("/api/countries")
    def countries():
        return {"countries": bundle.geometry["countries"]}

    @app.get("/api/search")
    def search_topics(q: str = "", limit: int = 10):
        if limit < 1:
            raise HTTPException(400, f"limit must be positive, got {limit}")
        return {"query": q, "results": search(q, bundle, limit=limit)}

    @app.get("/api/node/{topic_id}")
    def node(topic_id: str):
        try:
            return node_info(topic_id, bundle)
        except KeyError:
            raise HTTPException(404, f"unknown topic id {topic_id!r}")

    @app.get("/api/overlay/citations")
    def citations(university: str, mode: str = "full",
                  normalize: str = "none", base: str = "WORLD"):
        require_university(university)
        if normalize == "none":
            return overlay_json(overlays.citations_overlay, university,
                                corpus, mode=mode)
        if normalize in ("rate", "literal"):
            return overlay_json(overlays.normalized_citations_overlay,
                                university, corpus, base=base, mode=normalize)
        raise HTTPException(
            400, f"normalize must be none, rate, or literal, got {normalize!r}")

    @app.get("/api/overlay/hr")
    def hr(university: str, base: str = "WORLD"):
        require_university(university)
        return overlay_json(overlays.hr_overlay, university, corpus, base=base)

    @app.get("/api/overlay/department")
    def department(keyword: str):
        return overlay_json(overlays.department_overlay, keyword, corpus)

    @app.post("/api/overlay/document")
    def document(payload: dict):
        text = payload.get("text")
        url = payload.get("url")
        if (text is None) == (url is None):
            raise HTTPException(
                400, "body must carry exactly one of 'text' or 'url'")
        if url is not None:
            if not isinstance(url, str):
                raise HTTPException(400, "'url' must be a string")
            text = _fetch(url)
        if not isinstance(text, str):
            raise HTTPException(400, "'text' must be a string")
        return overlay_json(overlays.document_overlay, text, bundle.lexicon)

    @app.get("/api/universities")
    def universities():
        return {"universities": [
            {"id": u.university_id, "name": u.name, "region": u.region,
             "staff": u.academic_staff}
            for u in corpus.universities
        ]}

    if static_dir is not None:
        root = Path(static_dir)
        if root.is_dir():
            app.mount("/", StaticFiles(directory=root, html=True), name="ui")

    return app
