"""Executable case-study fixtures.

Eight named chains cover the four domains: for each, one clean case whose
chain certifies, plus a counterpart exercising the failure story (either a
faulty-executor chain the auditor must flag, or a genuine violation the
engine itself adjudicates as erroneous inside a certified chain).
"""

from __future__ import annotations

import json

from ..engine import EngineContext, ExecutionLog, execute_task
from ..errors import ConfigurationError
from ..gateway import Gateway, ScriptRule, ScriptedBackend, TokenUsage
from ..kb import KnowledgeBase
from ..rules import Duration, FactSet
from .cases import BenchmarkCase
from .packs import PACKS, composers, engine_scenario, install_pack, task_for_case

CERTIFIED_FIXTURES = ("drg-correct", "reg-consistent", "ehr-clean", "ins-approvable")
FLAGGED_FIXTURES = ("drg-mismatch", "reg-pvalue")
ERRONEOUS_CERTIFIED_FIXTURES = ("ehr-conflict", "ins-denial")
ALL_FIXTURES = CERTIFIED_FIXTURES + FLAGGED_FIXTURES + ERRONEOUS_CERTIFIED_FIXTURES


def fixture_case(name: str) -> BenchmarkCase:
    if name == "drg-correct":
        facts = FactSet.from_triples(
            [
                ("case", "diagnosis", "I21.001"),
                ("case", "procedure", "36.0601"),
                ("case", "has_secondary", "no"),
                ("case", "claimed_drg", "FZ19"),
            ],
            multi_valued={"secondary_dx"},
        )
        return BenchmarkCase(id="drg-fx-correct", scenario="drg", facts=facts, provenance="hand-authored")
    if name == "drg-mismatch":
        facts = FactSet.from_triples(
            [
                ("case", "diagnosis", "J18.9"),
                ("case", "procedure", "36.0601"),
                ("case", "has_secondary", "no"),
                ("case", "claimed_drg", "FZ19"),
            ],
            multi_valued={"secondary_dx"},
        )
        return BenchmarkCase(
            id="drg-fx-mismatch",
            scenario="drg",
            facts=facts,
            gold_label="erroneous",
            injected_error={"kind": "diagnosis-procedure-mismatch", "detail": "pneumonia with stent implantation"},
            provenance="hand-authored",
        )
    if name == "reg-consistent":
        fs = FactSet(multi_valued={"claims", "evidence"})
        for c in ("efficacy-general", "success-rate-95"):
            fs.add("ifu", "claims", c)
        fs.add("cer", "evidence", "success-rate-95")
        fs.add("cer", "p_value", 0.03)
        fs.add("doc", "ptr_consistent", "yes")
        return BenchmarkCase(id="reg-fx-consistent", scenario="regulatory", facts=fs, provenance="hand-authored")
    if name == "reg-pvalue":
        fs = FactSet(multi_valued={"claims", "evidence"})
        for c in ("efficacy-general", "lesion-max-30mm"):
            fs.add("ifu", "claims", c)
        fs.add("cer", "evidence", "lesion-max-25mm")
        fs.add("cer", "p_value", 0.08)
        fs.add("doc", "ptr_consistent", "yes")
        return BenchmarkCase(
            id="reg-fx-pvalue",
            scenario="regulatory",
            facts=fs,
            gold_label="erroneous",
            injected_error={
                "kind": "ifu-cer-statistic-conflict",
                "detail": "30mm efficacy claim with p=0.08 above the 0.05 threshold",
            },
            provenance="hand-authored",
        )
    if name == "ehr-clean":
        facts = FactSet.from_triples(
            [
                ("patient", "allergy", "none"),
                ("patient", "diagnosis", "bacterial pneumonia"),
                ("order", "drug", "cefuroxime"),
                ("", "event", "admission"),
                ("note", "initial_progress_hours", 4),
            ],
            multi_valued={"allergy"},
        )
        return BenchmarkCase(id="ehr-fx-clean", scenario="ehr", facts=facts, provenance="hand-authored")
    if name == "ehr-conflict":
        facts = FactSet.from_triples(
            [
                ("patient", "allergy", "penicillin"),
                ("patient", "diagnosis", "viral pharyngitis"),
                ("order", "drug", "amoxicillin"),
                ("", "event", "admission"),
                ("note", "initial_progress_hours", 4),
            ],
            multi_valued={"allergy"},
        )
        return BenchmarkCase(
            id="ehr-fx-conflict",
            scenario="ehr",
            facts=facts,
            gold_label="erroneous",
            injected_error={
                "kind": "allergy-drug-conflict",
                "detail": "amoxicillin ordered against a recorded penicillin allergy, for a viral diagnosis",
            },
            provenance="hand-authored",
        )
    if name == "ins-approvable":
        facts = FactSet.from_triples(
            [
                ("claim", "procedure", "liver-transplant"),
                ("claim", "medically_necessary", "yes"),
                ("claim", "preauthorized", "yes"),
                ("member", "enrollment", Duration(18, "months")),
                ("member", "policy_active", "yes"),
            ]
        )
        return BenchmarkCase(id="ins-fx-approvable", scenario="insurance", facts=facts, provenance="hand-authored")
    if name == "ins-denial":
        facts = FactSet.from_triples(
            [
                ("claim", "procedure", "liver-transplant"),
                ("claim", "medically_necessary", "yes"),
                ("claim", "preauthorized", "yes"),
                ("member", "enrollment", Duration(6, "months")),
                ("member", "policy_active", "yes"),
            ]
        )
        return BenchmarkCase(
            id="ins-fx-denial",
            scenario="insurance",
            facts=facts,
            gold_label="erroneous",
            injected_error={"kind": "exclusion-triggering-enrollment", "detail": "6 months of enrollment"},
            provenance="hand-authored",
        )
    raise ConfigurationError(f"unknown fixture {name!r}")


def _faulty_drg_rules() -> list[ScriptRule]:
    """Executor replies that wrongly claim the circulatory adjacent group
    for a respiratory case, citing a rule whose condition does not hold."""
    return [
        ScriptRule(
            role_tag="planner",
            regex=True,
            match=r"Decide whether.*Determine the adjacent group",
            response=json.dumps(
                {"atomic": True, "tool": "direct-query", "rationale": "quick direct determination"}
            ),
            usage=TokenUsage(260, 40),
        ),
        ScriptRule(
            role_tag="executor",
            match="Determine the adjacent group",
            response=json.dumps(
                {
                    "text": "Assigned adjacent group FZ1 for the stent procedure.",
                    "atoms": [["case", "adrg", "FZ1"]],
                    "evidence": [
                        {
                            "kind": "axiom",
                            "target_id": "DRG-A3",
                            "excerpt": "stent implantation maps to the circulatory adjacent group",
                        }
                    ],
                }
            ),
            usage=TokenUsage(300, 80),
        ),
    ]


def _faulty_reg_rules() -> list[ScriptRule]:
    """Executor replies that declare the 30mm efficacy claim supported even
    though the endpoint significance fails above 25mm."""
    return [
        ScriptRule(
            role_tag="planner",
            regex=True,
            match=r"Decide whether.*Check each usage claim",
            response=json.dumps(
                {"atomic": True, "tool": "direct-query", "rationale": "claims easily eyeballed"}
            ),
            usage=TokenUsage(260, 40),
        ),
        ScriptRule(
            role_tag="executor",
            match="Check each usage claim",
            response=json.dumps(
                {
                    "text": "Claims supported; the device is effective for lesions up to 30mm.",
                    "atoms": [
                        ["cer", "significance", "significant"],
                        ["ifu", "claim_supported", "yes"],
                    ],
                    "evidence": [
                        {
                            "kind": "axiom",
                            "target_id": "REG-A1",
                            "excerpt": "endpoints at or below the 0.05 threshold are significant",
                        }
                    ],
                }
            ),
            usage=TokenUsage(300, 80),
        ),
    ]


def build_fixture_kb() -> KnowledgeBase:
    kb = KnowledgeBase(clock=lambda: 0.0)
    for scenario in PACKS:
        install_pack(kb, scenario)
    return kb


def build_chain(name: str, kb: KnowledgeBase | None = None) -> tuple[ExecutionLog, KnowledgeBase]:
    """Execute the named fixture's chain offline and return (log, kb)."""
    case = fixture_case(name)
    kb = kb or build_fixture_kb()
    pack = PACKS[case.scenario]
    if name == "drg-mismatch":
        scenario = engine_scenario(pack, extra_rules=_faulty_drg_rules())
    elif name == "reg-pvalue":
        scenario = engine_scenario(pack, extra_rules=_faulty_reg_rules())
    else:
        scenario = engine_scenario(pack)
    context = EngineContext(
        kb=kb,
        gateway=Gateway(ScriptedBackend(scenario, backend_id=f"scripted:fixture:{name}")),
        replay=True,
        composers=composers(),
    )
    log = execute_task(task_for_case(case), context)
    return log, kb
