"""FastAPI service wrapping the power-flow package."""
from __future__ import annotations

from fastapi import FastAPI

from .routes import router


def create_app() -> FastAPI:
    app = FastAPI(
        title="qpflow",
        description="Fast decoupled AC power flow with classical and "
        "HHL-on-simulator linear solvers",
        version="0.1.0",
    )
    app.include_router(router)
    return app


app = create_app()
