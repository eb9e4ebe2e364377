"""HTTP annotation service backing the browser UI.

All document payloads use the canonical schema; every document-scoped
response carries the current revision so clients can do optimistic
concurrency. Rejected edits return the validation report that caused them.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .model import LABEL_INFO, ONE_SIDED_LABELS
from .serialization import document_to_obj
from .store import DocumentStore, Edit, EditConflict, EditRejected
from .validation import validate_document


class EditRequest(BaseModel):
    kind: str
    payload: dict = {}
    client_revision: int


def create_app(store: DocumentStore, ui_dir: str | Path | None = None) -> FastAPI:
    # /docs belongs to the document list, so the interactive API docs move away
    app = FastAPI(title="spanalign annotation service", docs_url="/apidocs", redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/labels")
    def labels():
        return {
            "labels": [
                {
                    "label": label.value,
                    "category": category,
                    "subcategory": subcategory,
                    "description": description,
                    "one_sided": label in ONE_SIDED_LABELS,
                }
                for label, (category, subcategory, description) in LABEL_INFO.items()
            ]
        }

    @app.get("/docs")
    def list_docs():
        return {"documents": store.entries()}

    @app.get("/docs/{pair_id}")
    def get_doc(pair_id: str):
        stored = _get_or_404(store, pair_id)
        return {"revision": stored.revision, "updated_at": stored.updated_at, "document": document_to_obj(stored.doc)}

    @app.get("/docs/{pair_id}/validation")
    def get_validation(pair_id: str):
        stored = _get_or_404(store, pair_id)
        report = validate_document(stored.doc)
        return {
            "revision": stored.revision,
            "is_complete": report.is_complete,
            "errors": [{"code": e.code, "message": e.message, "ids": list(e.ids)} for e in report.errors],
        }

    @app.post("/docs/{pair_id}/edits")
    def post_edit(pair_id: str, edit: EditRequest):
        _get_or_404(store, pair_id)
        try:
            stored = store.apply(pair_id, Edit(kind=edit.kind, payload=edit.payload, client_revision=edit.client_revision))
        except EditConflict as exc:
            return JSONResponse(status_code=409, content={"error": "CONFLICT", "revision": exc.current_revision})
        except EditRejected as exc:
            return JSONResponse(
                status_code=422,
                content={
                    "error": "REJECTED",
                    "message": str(exc),
                    "revision": store.get(pair_id).revision,
                    "report": {
                        "is_complete": exc.report.is_complete,
                        "errors": [{"code": e.code, "message": e.message, "ids": list(e.ids)} for e in exc.report.errors],
                    },
                },
            )
        return {"revision": stored.revision, "updated_at": stored.updated_at}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app


def _get_or_404(store: DocumentStore, pair_id: str):
    try:
        return store.get(pair_id)
    except KeyError:
        raise HTTPException(status_code=404, detail=f"no document {pair_id!r}") from None


def serve(store_dir: str | Path, host: str = "127.0.0.1", port: int = 8000, ui_dir: str | Path | None = None) -> None:
    import uvicorn

    app = create_app(DocumentStore(store_dir), ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port)
