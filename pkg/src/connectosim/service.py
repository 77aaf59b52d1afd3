"""HTTP service exposing interactive evolution sessions for the web UI.

Sessions wrap the engine's run state: one connectome, one model, a frozen
seed, and an append-only iteration history. Domain behavior is always the
corresponding library call, so service results match CLI runs with the same
inputs and seed. Sessions live in process memory only.

Per-session mutations serialize on a lock; long runs execute step by step
and stop early when the client disconnects.
"""

from __future__ import annotations

import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import networkx as nx
import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from starlette.concurrency import run_in_threadpool

from . import engine
from .classifier import NeuralStageClassifier, load_model
from .classifier.base import StageClassifier
from .classifier.saliency import ranked_active_edges
from .errors import ConnectosimError, ContractViolationError
from .graph import Connectome
from .interop import export_history, parse_facts
from .rounding import ceil_decimal_product
from .stages import Stage
from .validity import CheckerConfig


@dataclass
class Session:
    id: str
    state: engine.RunState
    connectome_id: str = ""
    lock: threading.Lock = field(default_factory=threading.Lock)
    _importance_cache: dict = field(default_factory=dict)

    def importance_for_current(self):
        index = len(self.state.records) - 1
        if index not in self._importance_cache:
            g = self.state.current_graph
            if g.edge_count() == 0:
                self._importance_cache[index] = None
            else:
                self._importance_cache[index] = self.state.classifier.edge_importance(g)
        return self._importance_cache[index]


class ServiceState:
    def __init__(self):
        self.connectomes: dict[str, Connectome] = {}
        self.models: dict[str, StageClassifier] = {}
        self.sessions: dict[str, Session] = {}
        self.layouts: dict[str, dict] = {}
        self.registry_lock = threading.Lock()

    def new_id(self) -> str:
        return secrets.token_hex(8)


def _http_422(exc: Exception) -> HTTPException:
    return HTTPException(status_code=422, detail=str(exc))


def _record_payload(record: engine.IterationRecord) -> dict:
    verdict = record.verdict
    return {
        "index": record.index,
        "probabilities": {s.name: record.probabilities.of(s) for s in Stage},
        "predicted": record.probabilities.argmax().name,
        "selection": [list(p) for p in sorted(record.selection)],
        "modified_edge_count": record.modified_edge_count,
        "verdict": {
            "tag": verdict.tag.value,
            "severe": verdict.checker.severe if verdict.checker else None,
            "removed_edge_count": verdict.checker.removed_edge_count
            if verdict.checker
            else None,
        },
    }


def _outcome_payload(state: engine.RunState) -> dict:
    if state.outcome is None:
        return {"kind": "running", "abort_index": None, "reason": None}
    return {
        "kind": state.outcome.kind.value,
        "abort_index": state.outcome.abort_index,
        "reason": state.outcome.reason,
    }


def create_app(
    models_dir: Optional[str] = None,
    static_dir: Optional[str] = None,
    model_store: Optional[dict[str, StageClassifier]] = None,
) -> FastAPI:
    app = FastAPI(title="connectosim", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    state = ServiceState()
    app.state.domain = state
    if model_store:
        state.models.update(model_store)
    if models_dir:
        for path in sorted(Path(models_dir).glob("*.npz")):
            state.models[path.stem] = NeuralStageClassifier(load_model(path))

    def get_session(sid: str) -> Session:
        try:
            return state.sessions[sid]
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {sid!r}")

    def get_connectome(cid: str) -> Connectome:
        try:
            return state.connectomes[cid]
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown connectome {cid!r}")

    def get_model(mid: str) -> StageClassifier:
        try:
            return state.models[mid]
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown model {mid!r}")

    def layout_for(cid: str, g: Connectome) -> dict:
        if cid not in state.layouts:
            graph = nx.Graph()
            graph.add_nodes_from(range(g.node_count))
            graph.add_weighted_edges_from(
                (x, y, w / 100.0) for x, y, w in g.active_edges()
            )
            pos = nx.spring_layout(graph, seed=int(cid[:8], 16) & 0x7FFFFFFF)
            state.layouts[cid] = {
                int(v): [float(xy[0]), float(xy[1])] for v, xy in pos.items()
            }
        return state.layouts[cid]

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/models")
    def list_models():
        return {"models": sorted(state.models)}

    @app.post("/connectomes", status_code=201)
    def upload_connectome(body: dict):
        try:
            if "matrix" in body:
                g = Connectome(np.asarray(body["matrix"]))
            elif "facts" in body:
                g, _ = parse_facts(body["facts"])
            else:
                raise ContractViolationError("body needs 'matrix' or 'facts'")
        except ConnectosimError as exc:
            raise _http_422(exc)
        except (TypeError, ValueError) as exc:
            raise _http_422(exc)
        with state.registry_lock:
            cid = state.new_id()
            state.connectomes[cid] = g
        return {"id": cid, "node_count": g.node_count, "active_edges": g.edge_count()}

    @app.post("/sessions", status_code=201)
    def create_session(body: dict):
        g = get_connectome(str(body.get("connectome_id")))
        classifier = get_model(str(body.get("model_id")))
        try:
            label = (
                Stage.from_name(body["initial_label"])
                if body.get("initial_label")
                else None
            )
            run_state = engine.RunState(
                g,
                classifier,
                CheckerConfig(body.get("checker_threshold")),
                percent=int(body.get("p", 50)),
                seed=int(body["seed"]),
                initial_label=label,
                importance_fraction=float(body.get("fraction", 0.4)),
            )
        except KeyError as exc:
            raise _http_422(ContractViolationError(f"missing field {exc}"))
        except ConnectosimError as exc:
            raise _http_422(exc)
        with state.registry_lock:
            sid = state.new_id()
            session = Session(
                id=sid, state=run_state, connectome_id=str(body.get("connectome_id"))
            )
            state.sessions[sid] = session
        return {
            "id": sid,
            "record": _record_payload(run_state.records[0]),
            "outcome": _outcome_payload(run_state),
        }

    @app.get("/sessions/{sid}")
    def session_summary(sid: str):
        session = get_session(sid)
        st = session.state
        g = st.current_graph
        return {
            "id": sid,
            "node_count": g.node_count,
            "active_edges": g.edge_count(),
            "iterations": len(st.records),
            "probabilities": {
                s.name: st.records[-1].probabilities.of(s) for s in Stage
            },
            "predicted": st.records[-1].probabilities.argmax().name,
            "outcome": _outcome_payload(st),
        }

    @app.get("/sessions/{sid}/graph")
    def session_graph(sid: str, min_importance_percentile: Optional[float] = None):
        session = get_session(sid)
        st = session.state
        g = st.current_graph
        importance = session.importance_for_current()
        values = importance.values if importance is not None else None
        pairs = g.active_pairs()
        if min_importance_percentile is not None:
            if not (0.0 <= min_importance_percentile <= 100.0):
                raise _http_422(
                    ContractViolationError("percentile must be in [0, 100]")
                )
            if values is not None and pairs:
                keep_fraction = (100.0 - min_importance_percentile) / 100.0
                keep = ceil_decimal_product(round(keep_fraction, 6), len(pairs))
                ranked = ranked_active_edges(importance, g)
                pairs = sorted(ranked[:keep])
            elif min_importance_percentile > 0:
                pairs = []
        layout = layout_for(getattr(session, "connectome_id", sid), st.g0)
        return {
            "nodes": [
                {"id": v, "x": layout[v][0], "y": layout[v][1]}
                for v in range(g.node_count)
            ],
            "edges": [
                {
                    "x": x,
                    "y": y,
                    "weight": int(g.weights[x, y]),
                    "importance": float(values[x, y]) if values is not None else None,
                }
                for x, y in pairs
            ],
        }

    def _build_policy(body: dict) -> engine.EvolutionPolicy:
        if "manual_edges" in body:
            edges = [tuple(map(int, pair)) for pair in body["manual_edges"]]
            mode = engine.UpdateMode(body.get("mode", "degrade"))
            return engine.ManualPolicy(lambda i, g: edges, mode=mode)
        if "policy" in body:
            return engine.policy_from_descriptor(body["policy"])
        raise ContractViolationError("body needs 'policy' or 'manual_edges'")

    def _step_once(session: Session, policy: engine.EvolutionPolicy) -> dict:
        with session.lock:
            st = session.state
            if not st.running:
                raise HTTPException(
                    status_code=409,
                    detail=f"session ended: {st.outcome.kind.value}",
                )
            record = st.step(policy, fatal_errors=False)
            return {
                "record": _record_payload(record),
                "outcome": _outcome_payload(st),
            }

    @app.post("/sessions/{sid}/step")
    def step_session(sid: str, body: dict):
        session = get_session(sid)
        try:
            policy = _build_policy(body)
            return _step_once(session, policy)
        except ConnectosimError as exc:
            raise _http_422(exc)

    @app.post("/sessions/{sid}/run")
    async def run_session(sid: str, body: dict, request: Request):
        session = get_session(sid)
        try:
            policy = _build_policy(body)
            exit_cond = engine.exit_condition_from_descriptor(
                body.get("exit", {"kind": "max-iterations", "n": 4})
            )
        except ConnectosimError as exc:
            raise _http_422(exc)
        st = session.state
        if not st.running:
            raise HTTPException(status_code=409, detail="session ended")
        while st.running and not exit_cond.satisfied(st.records):
            if await request.is_disconnected():
                break
            try:
                await run_in_threadpool(_step_once, session, policy)
            except HTTPException:
                break
            except ConnectosimError as exc:
                raise _http_422(exc)
        if st.running and exit_cond.satisfied(st.records):
            pass  # the session stays open for further interaction
        return export_history(st.history())

    @app.get("/sessions/{sid}/history")
    def session_history(sid: str):
        session = get_session(sid)
        with session.lock:
            return export_history(session.state.history())

    @app.post("/sessions/{sid}/reset")
    def reset_session(sid: str):
        session = get_session(sid)
        with session.lock:
            session.state.reset()
            session._importance_cache.clear()
            return {
                "iterations": len(session.state.records),
                "outcome": _outcome_payload(session.state),
            }

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
