"""HTTP/JSON surface over the interaction manager.

All bodies and responses are JSON; errors render as
``{"error": code, "message": text}`` with 4xx status.  Site documents
are posted raw (XML or JSON, auto-detected).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .manager import BadInputError, InteractionManager, ManagerError

ENV_LISTEN = "OUTTURN_LISTEN"
ENV_SESSION_TTL = "OUTTURN_SESSION_TTL"
ENV_CACHE_CAP = "OUTTURN_CACHE_CAP"
ENV_STATE_CAP = "OUTTURN_STATE_CAP"


@dataclass(frozen=True)
class ServiceConfig:
    """Effective service settings; explicit flags beat environment values."""

    listen: str = "127.0.0.1:8000"
    session_ttl: float = 30 * 60.0
    cache_cap: int = 1024
    state_cap: int = 200_000

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])


def resolve_config(listen: str | None = None, session_ttl: float | None = None,
                   cache_cap: int | None = None, state_cap: int | None = None,
                   env: dict[str, str] | None = None) -> ServiceConfig:
    """Merge flag values over environment variables over defaults."""
    env = os.environ if env is None else env
    defaults = ServiceConfig()

    def pick(flag, env_name, cast, fallback):
        if flag is not None:
            return flag
        raw = env.get(env_name)
        return cast(raw) if raw is not None else fallback

    return ServiceConfig(
        listen=pick(listen, ENV_LISTEN, str, defaults.listen),
        session_ttl=pick(session_ttl, ENV_SESSION_TTL, float, defaults.session_ttl),
        cache_cap=pick(cache_cap, ENV_CACHE_CAP, int, defaults.cache_cap),
        state_cap=pick(state_cap, ENV_STATE_CAP, int, defaults.state_cap),
    )


def create_app(manager: InteractionManager | None = None) -> FastAPI:
    manager = manager if manager is not None else InteractionManager()
    app = FastAPI(title="outturn", docs_url=None, redoc_url=None)
    app.state.manager = manager
    # Browser clients live on their own origin; the API carries no
    # credentials, so a blanket allowance is safe.
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(ManagerError)
    def manager_error(_request: Request, exc: ManagerError) -> JSONResponse:
        return JSONResponse(status_code=exc.status,
                            content={"error": exc.code, "message": exc.message})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/sites")
    async def ingest_site(request: Request) -> dict:
        body = await request.body()
        return {"site_id": manager.ingest_site(body)}

    @app.get("/sites")
    def list_sites() -> dict:
        return {"sites": manager.list_sites()}

    @app.post("/sessions")
    async def create_session(request: Request) -> dict:
        body = await _json_body(request)
        site_id = body.get("site_id")
        if not isinstance(site_id, str):
            raise BadInputError('body requires a string "site_id"')
        session = manager.create_session(site_id)
        return manager.get_state(session.token)

    @app.get("/sessions/{token}")
    def get_session(token: str) -> dict:
        return manager.get_state(token)

    @app.post("/sessions/{token}/input")
    async def submit_input(token: str, request: Request) -> dict:
        body = await _json_body(request)
        utterance = body.get("utterance")
        if not isinstance(utterance, list) or not all(isinstance(t, str) for t in utterance):
            raise BadInputError('body requires an "utterance" list of strings')
        return manager.submit_input(token, utterance)

    @app.get("/sessions/{token}/reflect")
    def reflect(token: str) -> dict:
        return {"valid_tokens": sorted(manager.reflect(token))}

    @app.post("/sessions/{token}/back")
    async def step_back(token: str, request: Request) -> dict:
        body = await _json_body(request)
        n = body.get("n")
        if not isinstance(n, int) or isinstance(n, bool):
            raise BadInputError('body requires an integer "n"')
        return manager.step_back(token, n)

    return app


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception as exc:
        raise BadInputError(f"request body must be JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise BadInputError("request body must be a JSON object")
    return body


def run_service(config: ServiceConfig, manager: InteractionManager | None = None) -> None:
    import uvicorn

    if manager is None:
        manager = InteractionManager(session_ttl=config.session_ttl,
                                     cache_cap=config.cache_cap)
    app = create_app(manager)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
