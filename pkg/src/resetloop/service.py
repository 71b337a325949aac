"""Local JSON-over-HTTP service consumed by the design studio.

Stateless between requests except an in-memory response cache keyed by the
request-body hash; binds localhost by default (designer's desk tool).
"""

from __future__ import annotations

import hashlib
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from .config import (
    ProjectConfig,
    SCHEMA_VERSION,
    parse_design_request,
    parse_sim_config,
)
from .errors import (
    ConfigError,
    InfeasiblePhaseError,
    NonConvergenceError,
    BudgetExceededError,
    ResetLoopError,
    ValidationError,
)
from .lti import FrfTable, eval_tf
from .sim import SyntheticPlant
from .workflows import analyze_linear, run_design, run_simulation

_SCHEMAS = {
    "schema_version": SCHEMA_VERSION,
    "endpoints": {
        "GET /schema": "this document",
        "GET /grid": {"omega": "[rad/s]"},
        "GET /frf": {"omega": "[rad/s]", "re": "[...]", "im": "[...]"},
        "POST /design": {
            "request": {
                "notches": [{"omega_n": "rad/s", "q1": ">0", "q2": ">=q1"}],
                "omega_l": "rad/s",
                "a_rho": "(-1, 1]",
                "c_f": ">=1 (optional)",
                "omega_c": "rad/s (optional)",
                "c1_notch_indices": "[int] (optional)",
                "check_resets": "bool (optional)",
            },
            "response": "design + curves + report; angles in radians",
        },
        "POST /analyze": "same response as /design; empty body = baseline only",
        "POST /simulate": {
            "request": "run config (mode trajectory|sinusoid) + optional design",
            "response": "metrics; bounded wall-clock budget",
        },
    },
}


class ServiceState:
    def __init__(self, config: ProjectConfig, sim_budget_s: float = 30.0,
                 studio_dir: Path | None = None):
        self.config = config
        self.sim_budget_s = sim_budget_s
        self.studio_dir = studio_dir
        self._cache: dict[str, dict] = {}
        self._lock = threading.Lock()

    def cached(self, key: str, producer):
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = producer()
        with self._lock:
            self._cache[key] = value
        return value

    def cache_key(self, endpoint: str, body: dict | None) -> str:
        canon = json.dumps(
            {"endpoint": endpoint, "config": self.config.to_json_dict(), "body": body},
            sort_keys=True,
        )
        return hashlib.sha256(canon.encode()).hexdigest()


def _error_payload(code: str, message: str, **extra) -> dict:
    err = {"code": code, "message": message}
    err.update(extra)
    return {"schema_version": SCHEMA_VERSION, "error": err}


class Handler(BaseHTTPRequestHandler):
    state: ServiceState  # injected by serve()

    # quiet the default per-request stderr logging
    def log_message(self, fmt, *args):
        pass

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self) -> dict | None:
        length = int(self.headers.get("Content-Length", 0) or 0)
        if length == 0:
            return None
        raw = self.rfile.read(length)
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"request body is not valid JSON: {exc}") from exc

    def do_GET(self):
        try:
            if self.path.rstrip("/") in ("", "/"):
                if self.state.studio_dir is not None:
                    self._send_static("index.html")
                else:
                    self._send(200, _SCHEMAS)
            elif self.path.startswith("/schema"):
                self._send(200, _SCHEMAS)
            elif self.path.startswith("/grid"):
                grid = self.state.config.grid.build()
                self._send(200, {"schema_version": SCHEMA_VERSION,
                                 "omega": [float(w) for w in grid]})
            elif self.path.startswith("/frf"):
                self._send(200, self._frf_payload())
            elif self.state.studio_dir is not None and self.path.startswith("/dist/"):
                self._send_static(self.path.lstrip("/"))
            else:
                self._send(404, _error_payload("not_found", f"no route {self.path!r}"))
        except ResetLoopError as exc:
            self._send(422, _error_payload("validation", str(exc)))
        except Exception as exc:  # internal fault
            self._send(500, _error_payload("internal", repr(exc)))

    def _send_static(self, rel: str) -> None:
        base = self.state.studio_dir.resolve()
        target = (base / rel).resolve()
        if not str(target).startswith(str(base)) or not target.is_file():
            self._send(404, _error_payload("not_found", f"no static file {rel!r}"))
            return
        body = target.read_bytes()
        ctype = {"html": "text/html", "js": "text/javascript",
                 "css": "text/css"}.get(target.suffix.lstrip("."),
                                        "application/octet-stream")
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _frf_payload(self) -> dict:
        config = self.state.config

        def produce():
            plant = config.load_plant()
            if isinstance(plant, FrfTable):
                omega = plant.omega
                values = plant.values
            else:
                model = plant.model if isinstance(plant, SyntheticPlant) else plant
                omega = config.grid.build()
                values = np.array([eval_tf(model, float(w)) for w in omega])
            return {
                "schema_version": SCHEMA_VERSION,
                "omega": [float(w) for w in omega],
                "re": [float(v.real) for v in values],
                "im": [float(v.imag) for v in values],
            }

        return self.state.cached(self.state.cache_key("/frf", None), produce)

    def do_POST(self):
        try:
            body = self._read_body()
        except ConfigError as exc:
            self._send(400, _error_payload("bad_json", str(exc)))
            return
        try:
            if self.path.startswith("/design"):
                self._send(200, self._design_payload(body, require_design=True))
            elif self.path.startswith("/analyze"):
                self._send(200, self._design_payload(body, require_design=False))
            elif self.path.startswith("/simulate"):
                self._send(200, self._simulate_payload(body))
            else:
                self._send(404, _error_payload("not_found", f"no route {self.path!r}"))
        except InfeasiblePhaseError as exc:
            self._send(422, _error_payload(
                "infeasible_phase", str(exc),
                field="notches", theta=exc.theta, theta_max=exc.theta_max,
                omega=exc.omega))
        except (ConfigError, ValidationError) as exc:
            field = getattr(exc, "context", None)
            self._send(422, _error_payload("validation", str(exc),
                                           **({"field": field} if field else {})))
        except NonConvergenceError as exc:
            self._send(422, _error_payload("non_convergent", str(exc)))
        except BudgetExceededError as exc:
            self._send(422, _error_payload("budget_exceeded", str(exc)))
        except ResetLoopError as exc:
            self._send(422, _error_payload("validation", str(exc)))
        except Exception as exc:  # internal fault
            self._send(500, _error_payload("internal", repr(exc)))

    def _design_payload(self, body: dict | None, require_design: bool) -> dict:
        config = self.state.config
        if body is None or body == {}:
            if require_design:
                raise ConfigError("POST /design needs a design request body",
                                  context="body")
            key = self.state.cache_key("/analyze", None)
            return self.state.cached(key, lambda: analyze_linear(config))
        request = parse_design_request(body)
        endpoint = "/design" if require_design else "/analyze"
        key = self.state.cache_key(endpoint, body)
        return self.state.cached(key, lambda: run_design(config, request)[0])

    def _simulate_payload(self, body: dict | None) -> dict:
        if body is None:
            raise ConfigError("POST /simulate needs a run config body", context="body")
        sim_cfg = parse_sim_config(body)
        request = None
        if body.get("design"):
            request = parse_design_request(body["design"])
        key = self.state.cache_key("/simulate", body)
        return self.state.cached(
            key,
            lambda: run_simulation(self.state.config, sim_cfg, request,
                                   wall_budget_s=self.state.sim_budget_s)[0],
        )


def make_server(config: ProjectConfig, host: str = "127.0.0.1", port: int = 8731,
                sim_budget_s: float = 30.0,
                studio_dir: Path | str | None = None) -> ThreadingHTTPServer:
    state = ServiceState(config, sim_budget_s,
                         None if studio_dir is None else Path(studio_dir))
    handler = type("BoundHandler", (Handler,), {"state": state})
    return ThreadingHTTPServer((host, port), handler)


def serve(config: ProjectConfig, host: str = "127.0.0.1", port: int = 8731,
          sim_budget_s: float = 30.0, studio_dir: Path | str | None = None) -> None:
    server = make_server(config, host, port, sim_budget_s, studio_dir)
    print(f"resetloop service on http://{host}:{server.server_address[1]}/ "
          f"(schema at /schema)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
