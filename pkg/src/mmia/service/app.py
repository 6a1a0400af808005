"""HTTP surface: thin mappings from endpoints onto module operations.

Errors come back as problem-detail JSON bodies carrying the stable
machine-readable ``code`` from the exception hierarchy.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Header, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .. import __version__
from ..audit import ConsensusPolicy, ConsensusResult, consensus_audit
from ..audit.consensus import promote_chain_theorem
from ..audit.deterministic import DeterministicVerifier
from ..audit.llm import LlmVerifier
from ..bench import BenchmarkCase, make_suite, run_benchmark, task_for_case
from ..bench.packs import PACKS, composers, combined_scenario, install_pack
from ..costs import CostLedger, PhaseSimConfig, dispatch_mode, execute_match, simulate_phases
from ..engine import EngineContext, ExecutionLog, TaskSpec, execute_task
from ..errors import MmiaError, StartupError, StateError
from ..gateway import Gateway, HttpBackend, ScriptedBackend, ScriptedScenario
from ..kb import KnowledgeBase, extract_candidates
from ..retrieval import VectorIndex, embed
from .config import EngineConfig
from .stores import ReviewQueueStore, RunStore

_STATUS_BY_CODE = {
    "precondition-violation": 422,
    "parse-error": 422,
    "validation-error": 422,
    "configuration-error": 422,
    "state-error": 409,
    "ledger-error": 409,
    "backend-error": 502,
    "protocol-error": 502,
    "audit-error": 502,
    "template-error": 500,
    "startup-error": 500,
}


class ServiceState:
    """Everything the endpoints need, built once from the config."""

    def __init__(self, config: EngineConfig):
        config.validate()
        self.config = config
        data = config.data_dir
        try:
            data.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StartupError(f"cannot create data directory {data}: {exc}")
        clock = (lambda: 0.0) if config.replay else None
        self.kb = KnowledgeBase(
            path=data / "kb.jsonl", audit_path=data / "kb_audit.jsonl", clock=clock
        )
        if not self.kb.all():
            for pack in config.packs:
                install_pack(self.kb, pack)
        backend = self._build_backend(config)
        self.gateway = Gateway(
            backend, audit_path=data / "gateway_audit.jsonl", replay=config.replay
        )
        self.context = EngineContext(
            kb=self.kb,
            gateway=self.gateway,
            replay=config.replay,
            composers=composers(),
        )
        self.queue = ReviewQueueStore(data / "review_queue.jsonl", clock=clock)
        self.runs = RunStore(data / "runs")
        self.ledger = CostLedger(data / "ledger.jsonl")
        self.index = self._build_index()
        self.policy = ConsensusPolicy(n=config.consensus_n, rule=config.consensus_rule)
        self.bench_dir = data / "bench"

    def _build_backend(self, config: EngineConfig):
        if config.backend == "http":
            return HttpBackend(
                url=config.backend_url, api_key=config.backend_key, model=config.backend_model
            )
        if config.scenario_file:
            return ScriptedBackend(ScriptedScenario.load(Path(config.scenario_file)))
        return ScriptedBackend(combined_scenario([PACKS[p] for p in config.packs if p in PACKS]))

    def _build_index(self) -> VectorIndex:
        index = VectorIndex()
        for theorem in self.kb.approved(kind="theorem"):
            if theorem.template:
                index.upsert(theorem.id, embed(theorem.template))
        return index

    def verifier_factory(self, variant: str, backend_id: str):
        if self.config.verifier == "llm":
            return LlmVerifier(self.gateway, variant=variant)
        return DeterministicVerifier(variant=variant)

    # ------------------------------------------------------------------

    def submit_task(self, task: TaskSpec) -> dict:
        existing = self.runs.get_task(task.id)
        if existing is not None:
            return existing
        mode = "de-novo"
        log: ExecutionLog | None = None
        if len(self.index) > 0:
            mode, match = dispatch_mode(
                task, self.kb, self.index, self.config.similarity_threshold, self.gateway
            )
            if mode == "rag-match" and match is not None:
                log = execute_match(task, match, self.kb, self.context)
                if log is None:
                    mode = "de-novo"
        if log is None:
            log = execute_task(task, self.context)

        consensus: ConsensusResult | None = None
        if log.complete:
            consensus = consensus_audit(
                log,
                self.kb,
                self.policy,
                verifier_factory=self.verifier_factory,
                on_disagreement=lambda lg, reports: self.queue.enqueue(
                    "audit-disagreement",
                    {"task_id": lg.task.id, "reports": [r.to_dict() for r in reports]},
                ),
                promoter=lambda lg: self._promote(lg),
            )
        try:
            self.ledger.record(task.id, mode, log.cost_tokens(), 0.0)
        except MmiaError:
            pass  # replayed submission; ledger already has it
        document = {
            "status": log.status,
            "mode": mode,
            "final_answer": log.final_answer.to_dict() if log.final_answer else None,
            "audit_outcome": consensus.outcome if consensus else "not-audited",
            "log": log.to_dict(),
            "audit": consensus.to_dict() if consensus else None,
        }
        self.runs.put_task(task.id, document)
        return self.runs.get_task(task.id)

    def _promote(self, log: ExecutionLog) -> str | None:
        pack = PACKS.get(log.task.scenario)
        template = pack.template_text if pack else None
        theorem_id = promote_chain_theorem(
            log, self.kb, template=template, auto_approve=self.config.auto_approve_chain_theorems
        )
        if theorem_id is None:
            record = None
        else:
            record = self.kb.get(theorem_id)
            if record is not None and record.status == "candidate":
                self.queue.enqueue(
                    "candidate-axiom", {"axiom_id": record.id, "rule_text": record.rule_text}
                )
        if record is not None and record.status == "approved" and record.template:
            self.index.upsert(record.id, embed(record.template))
        return theorem_id


def _problem(status: int, code: str, detail: str) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={
            "type": "about:blank",
            "title": code.replace("-", " "),
            "status": status,
            "code": code,
            "detail": detail,
        },
    )


class TaskBody(BaseModel):
    task: dict | None = None
    case: dict | None = None


class DocumentBody(BaseModel):
    id: str
    text: str
    scenario: str


class ReviewBody(BaseModel):
    decision: str
    rule_text: str | None = None
    reviewer: str = "console"
    note: str | None = None


class BenchBody(BaseModel):
    scenario: str
    mode: str = "mmia"
    n: int = 40
    seed: int = 1


class SimulateBody(BaseModel):
    denovo_tokens: int
    match_tokens: int
    match_fraction: float
    n_initial: int = 100
    n_mature: int = 100


def create_app(config: EngineConfig | None = None, state: ServiceState | None = None) -> FastAPI:
    state = state or ServiceState(config or EngineConfig())
    app = FastAPI(title="mmia", version=__version__)
    app.state.engine = state
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    idempotency: dict[str, Any] = {}

    @app.exception_handler(MmiaError)
    async def handle_engine_error(request: Request, exc: MmiaError):
        return _problem(_STATUS_BY_CODE.get(exc.code, 500), exc.code, exc.message)

    def check_key(x_api_key: str | None) -> JSONResponse | None:
        if state.config.api_key and x_api_key != state.config.api_key:
            return _problem(401, "unauthorized", "missing or wrong X-Api-Key")
        return None

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "version": __version__}

    @app.post("/tasks")
    def post_task(
        body: TaskBody,
        x_api_key: str | None = Header(default=None),
        idempotency_key: str | None = Header(default=None),
    ):
        denied = check_key(x_api_key)
        if denied:
            return denied
        if idempotency_key and idempotency_key in idempotency:
            return idempotency[idempotency_key]
        if body.task is not None:
            task = TaskSpec.from_dict(body.task)
        elif body.case is not None:
            task = task_for_case(BenchmarkCase.from_dict(body.case))
        else:
            return _problem(422, "precondition-violation", 'body needs "task" or "case"')
        document = state.submit_task(task)
        result = {
            "task_id": task.id,
            "status": document["status"],
            "mode": document["mode"],
            "audit_outcome": document["audit_outcome"],
            "final_answer": document["final_answer"],
        }
        if idempotency_key:
            idempotency[idempotency_key] = result
        return result

    @app.get("/tasks/{task_id}")
    def get_task(task_id: str):
        document = state.runs.get_task(task_id)
        if document is None:
            return _problem(404, "not-found", f"no task {task_id}")
        return {
            "task_id": task_id,
            "status": document["status"],
            "mode": document["mode"],
            "audit_outcome": document["audit_outcome"],
            "final_answer": document["final_answer"],
        }

    @app.get("/tasks/{task_id}/log")
    def get_task_log(task_id: str):
        document = state.runs.get_task(task_id)
        if document is None:
            return _problem(404, "not-found", f"no task {task_id}")
        return document["log"]

    @app.get("/tasks/{task_id}/audit")
    def get_task_audit(task_id: str):
        document = state.runs.get_task(task_id)
        if document is None:
            return _problem(404, "not-found", f"no task {task_id}")
        if document.get("audit") is None:
            return _problem(404, "not-found", f"task {task_id} was not audited")
        return document["audit"]

    @app.post("/kb/documents")
    def post_document(
        body: DocumentBody,
        x_api_key: str | None = Header(default=None),
        idempotency_key: str | None = Header(default=None),
    ):
        denied = check_key(x_api_key)
        if denied:
            return denied
        if idempotency_key and idempotency_key in idempotency:
            return idempotency[idempotency_key]
        candidates = extract_candidates(body.text, body.id, body.scenario, state.kb, state.gateway)
        entries = []
        for cand in candidates:
            if cand.status == "candidate":
                entry = state.queue.enqueue(
                    "candidate-axiom", {"axiom_id": cand.id, "rule_text": cand.rule_text}
                )
                entries.append(entry.id)
        result = {
            "document_id": body.id,
            "candidates": [c.id for c in candidates],
            "queued": entries,
        }
        if idempotency_key:
            idempotency[idempotency_key] = result
        return result

    @app.get("/kb/axioms")
    def get_axioms(status: str | None = None, kind: str | None = None):
        return {"axioms": [a.to_dict() for a in state.kb.all(status=status, kind=kind)]}

    @app.get("/review/queue")
    def get_queue(kind: str | None = None, status: str | None = None):
        return {"entries": [e.to_dict() for e in state.queue.entries(kind=kind, status=status)]}

    @app.post("/review/{entry_id}")
    def post_review(
        entry_id: str,
        body: ReviewBody,
        x_api_key: str | None = Header(default=None),
        idempotency_key: str | None = Header(default=None),
    ):
        denied = check_key(x_api_key)
        if denied:
            return denied
        if idempotency_key and idempotency_key in idempotency:
            return idempotency[idempotency_key]
        entry = state.queue.get(entry_id)
        if entry is None:
            return _problem(404, "not-found", f"no review-queue entry {entry_id}")
        if entry.status == "resolved":
            raise StateError(f"review-queue entry {entry_id} is already resolved")
        if entry.kind == "candidate-axiom":
            axiom_id = entry.payload["axiom_id"]
            record = state.kb.review_decision(
                axiom_id, body.decision, reviewer=body.reviewer, new_rule_text=body.rule_text
            )
            resolution = {"decision": body.decision, "axiom_id": record.id, "status": record.status}
            if record.status == "approved" and record.template:
                state.index.upsert(record.id, embed(record.template))
        else:
            if body.decision not in ("certify", "flag", "dismiss"):
                return _problem(
                    422, "precondition-violation", "disagreement decisions: certify | flag | dismiss"
                )
            resolution = {"decision": body.decision, "note": body.note}
        updated = state.queue.resolve(entry_id, resolution)
        result = updated.to_dict()
        if idempotency_key:
            idempotency[idempotency_key] = result
        return result

    @app.post("/bench/run")
    def post_bench(
        body: BenchBody,
        x_api_key: str | None = Header(default=None),
    ):
        denied = check_key(x_api_key)
        if denied:
            return denied
        suite = make_suite(body.scenario, n=body.n, seed=body.seed)
        run_id = f"{body.scenario}-{body.mode}-n{body.n}-s{body.seed}"
        run = run_benchmark(
            suite,
            body.mode,
            state.kb,
            state.context,
            policy=state.policy,
            verifier_factory=state.verifier_factory,
            out_dir=state.bench_dir / run_id,
        )
        return {"run_id": run_id, "metrics": run.metrics.to_dict()}

    @app.get("/bench/{run_id}/metrics")
    def get_bench_metrics(run_id: str):
        path = state.bench_dir / run_id / "metrics.json"
        if not path.exists():
            return _problem(404, "not-found", f"no benchmark run {run_id}")
        return json.loads(path.read_text(encoding="utf-8"))

    @app.post("/cost/simulate")
    def post_simulate(body: SimulateBody):
        report = simulate_phases(
            PhaseSimConfig(
                denovo_tokens=body.denovo_tokens,
                match_tokens=body.match_tokens,
                match_fraction=Fraction(body.match_fraction).limit_denominator(10**9),
                n_initial=body.n_initial,
                n_mature=body.n_mature,
            )
        )
        return report.to_dict()

    return app


def serve(config: EngineConfig) -> None:
    """Run the service until interrupted; stores flush on each write."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host="127.0.0.1", port=config.port, log_level="warning")
