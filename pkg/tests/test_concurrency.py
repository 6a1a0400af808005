"""Concurrency guarantees: serialized audit-file writes, concurrent reads,
and parallel task execution matching sequential results."""

import json
from concurrent.futures import ThreadPoolExecutor

from mmia.audit import ConsensusPolicy, consensus_audit
from mmia.bench import generate_case, task_for_case
from mmia.bench.packs import PACKS, combined_scenario, composers
from mmia.engine import EngineContext, execute_task
from mmia.gateway import ChatRequest, Gateway, ScriptedBackend, ScriptedScenario


class TestGatewayAuditConcurrency:
    def test_concurrent_calls_yield_one_clean_record_each(self, tmp_path):
        audit = tmp_path / "gateway_audit.jsonl"
        gw = Gateway(ScriptedBackend(ScriptedScenario(default="reply")), audit_path=audit, replay=True)

        def worker(i: int) -> None:
            for j in range(25):
                gw.complete(
                    ChatRequest(
                        role_tag="executor", system_prompt="s", user_prompt=f"call {i}-{j}"
                    )
                )

        with ThreadPoolExecutor(max_workers=8) as pool:
            list(pool.map(worker, range(8)))
        lines = audit.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 200
        for line in lines:
            record = json.loads(line)  # every line is intact JSON
            assert record["role_tag"] == "executor"


class TestParallelTasks:
    def test_concurrent_execution_matches_sequential(self, pack_kb):
        backend = ScriptedBackend(combined_scenario(list(PACKS.values())))
        shared = EngineContext(
            kb=pack_kb, gateway=Gateway(backend), replay=True, composers=composers()
        )
        cases = [generate_case("drg", "default", 70000 + i) for i in range(8)]
        tasks = [task_for_case(c) for c in cases]

        sequential = [execute_task(t, shared).to_json() for t in tasks]
        with ThreadPoolExecutor(max_workers=8) as pool:
            parallel = list(pool.map(lambda t: execute_task(t, shared).to_json(), tasks))
        assert parallel == sequential

    def test_consensus_audits_safe_on_shared_snapshot(self, pack_kb):
        backend = ScriptedBackend(combined_scenario(list(PACKS.values())))
        context = EngineContext(
            kb=pack_kb, gateway=Gateway(backend), replay=True, composers=composers()
        )
        log = execute_task(task_for_case(generate_case("ehr", "default", 71000)), context)
        with ThreadPoolExecutor(max_workers=4) as pool:
            results = list(
                pool.map(lambda _: consensus_audit(log, pack_kb, ConsensusPolicy()), range(4))
            )
        outcomes = {r.outcome for r in results}
        assert outcomes == {"certified"}
        # The log was never mutated by any audit.
        assert log.to_json() == execute_task(
            task_for_case(generate_case("ehr", "default", 71000)), context
        ).to_json()
