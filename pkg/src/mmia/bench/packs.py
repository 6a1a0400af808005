"""Scenario packs.

A pack bundles everything one domain needs: the approved rule set (shipped
as a .rules file in the documented grammar), fact-schema details, the
canned decomposition its scripted planner replies with, offline case
generators and error injectors, a scripted backend for fully offline
engine runs, and the text composer for final answers.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

from ..engine.loop import Composer
from ..engine.types import Atom3, Budget, TaskSpec
from ..errors import ConfigurationError, PreconditionError
from ..gateway import ScriptRule, ScriptedScenario, TokenUsage
from ..kb import KnowledgeBase
from ..rules import Duration, FactSet, derivable_atoms, eval_rule
from ..rules.printer import _fmt_literal
from .cases import BenchmarkCase

# ----------------------------------------------------------------------
# Rule-file loading
# ----------------------------------------------------------------------

_HEADER = re.compile(r"^\[(?P<id>[A-Z]+-[AT]\d+)\]\s+tags=(?P<tags>[a-z,_-]*)\s*$")


def read_rules_file(text: str) -> list[tuple[str, list[str], str]]:
    """Parse a pack rules file into (declared id, tags, rule text) entries."""
    out: list[tuple[str, list[str], str]] = []
    pending: tuple[str, list[str]] | None = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _HEADER.match(line)
        if m:
            pending = (m.group("id"), [t for t in m.group("tags").split(",") if t])
            continue
        if pending is None:
            raise PreconditionError(f"rule line without [ID] header: {line!r}")
        out.append((pending[0], pending[1], line))
        pending = None
    return out


def pack_rules_text(scenario: str) -> str:
    ref = resources.files("mmia.bench") / "packs" / f"{scenario}.rules"
    return ref.read_text(encoding="utf-8")


def install_pack(kb: KnowledgeBase, scenario: str, reviewer: str = "pack:domain-expert") -> list[str]:
    """Load a pack's rules into the knowledge base as approved axioms."""
    if scenario not in PACKS:
        raise ConfigurationError(f"no pack for scenario {scenario!r}")
    installed = []
    for declared_id, tags, rule_text in read_rules_file(pack_rules_text(scenario)):
        record = kb.add_candidate(scenario, "axiom", rule_text, origin="expert-authored", tags=tags)
        if record.id != declared_id:
            raise PreconditionError(
                f"pack id drift: file declares {declared_id}, store assigned {record.id}"
            )
        kb.review_decision(record.id, "approve", reviewer=reviewer)
        installed.append(record.id)
    return installed


# ----------------------------------------------------------------------
# Pack definition
# ----------------------------------------------------------------------

Generator = Callable[[random.Random, str], FactSet]
Injector = Callable[[BenchmarkCase, random.Random], tuple[FactSet, dict]]


@dataclass
class ScenarioPack:
    scenario: str
    task_phrase: str  # root task description prefix, case id appended
    multi_valued: set[str]
    goal_attrs: list[str]
    plan_subtasks: list[dict]
    plan_dependencies: list[list[int]]
    template_text: str  # abstract process template all tasks of this pack share
    generators: dict[str, Generator]
    injectors: dict[str, Injector]
    composer: Composer
    error_fraction: float = 0.2
    baseline_rules: list[ScriptRule] = field(default_factory=list)

    def case_id(self, seed: int) -> str:
        return f"{self.scenario}-{seed:05d}"


def task_for_case(case: BenchmarkCase, budget: Budget | None = None) -> TaskSpec:
    pack = PACKS[case.scenario]
    return TaskSpec(
        id=f"task-{case.id}",
        description=f"{pack.task_phrase} {case.id}",
        scenario=case.scenario,
        facts=case.facts,
        budget=budget or Budget(),
        source_id=case.id,
        goal_attrs=list(pack.goal_attrs),
    )


def evaluate_case_facts(
    facts: FactSet, kb: KnowledgeBase, scenario: str
) -> tuple[FactSet, dict[str, str], list[tuple[Atom3, str]]]:
    """Independent case oracle: forward-chain all pack rules to fixpoint,
    then evaluate each. A case is detectably erroneous iff some rule ends
    up violated. Also returns (derived atom, deriving rule id) pairs."""
    rules = kb.approved_for_scenario(scenario, kind="axiom")
    working = facts.copy()
    derivations: list[tuple[Atom3, str]] = []
    changed = True
    while changed:
        changed = False
        for rec in rules:
            if rec.rule is None:
                continue
            for e, a, v in derivable_atoms(rec.rule, working):
                working.add(e, a, v)
                derivations.append(((e, a, v), rec.id))
                changed = True
    verdicts = {}
    for rec in rules:
        if rec.rule is None:
            continue
        verdicts[rec.id] = eval_rule(rec.rule, working).outcome
    return working, verdicts, derivations


# ----------------------------------------------------------------------
# Scripted backends
# ----------------------------------------------------------------------

PLANNER_USAGE = TokenUsage(420, 60)
PLAN_USAGE = TokenUsage(760, 340)
SUBTASK_ASSESS_USAGE = TokenUsage(260, 40)
ABSTRACT_USAGE = TokenUsage(160, 60)
JUDGE_USAGE = TokenUsage(190, 40)
BASELINE_USAGE = TokenUsage(620, 120)


def engine_scenario(pack: ScenarioPack, extra_rules: list[ScriptRule] | None = None) -> ScriptedScenario:
    """Scripted replies that drive the loop offline for this pack's tasks."""
    rules: list[ScriptRule] = list(extra_rules or [])
    for sub in pack.plan_subtasks:
        rules.append(
            ScriptRule(
                role_tag="planner",
                regex=True,
                match=r"Decide whether.*" + re.escape(sub["description"]),
                response=json.dumps(
                    {"atomic": True, "tool": "kb-retrieval", "rationale": "one retrieval-and-evaluate pass"}
                ),
                usage=SUBTASK_ASSESS_USAGE,
            )
        )
    rules.append(
        ScriptRule(
            role_tag="planner",
            regex=True,
            match=r"Decide whether.*" + re.escape(pack.task_phrase),
            response=json.dumps(
                {"atomic": False, "rationale": "multi-stage audit requires decomposition"}
            ),
            usage=PLANNER_USAGE,
        )
    )
    rules.append(
        ScriptRule(
            role_tag="planner",
            regex=True,
            match=r"Decompose the task.*" + re.escape(pack.task_phrase),
            response=json.dumps(
                {
                    "subtasks": pack.plan_subtasks,
                    "dependencies": pack.plan_dependencies,
                    "rationale": "standard audit pipeline for this scenario",
                }
            ),
            usage=PLAN_USAGE,
        )
    )
    rules.append(
        ScriptRule(
            role_tag="abstractor",
            match=pack.task_phrase,
            response=json.dumps({"template": pack.template_text, "bindings": {}}),
            usage=ABSTRACT_USAGE,
        )
    )
    rules.append(
        ScriptRule(
            role_tag="judge",
            match="Does the current task instance fit",
            response=json.dumps({"fits": True, "justification": "instance matches the stored pattern"}),
            usage=JUDGE_USAGE,
        )
    )
    rules.extend(pack.baseline_rules)
    rules.append(_BASELINE_FALLBACK)
    return ScriptedScenario(rules=rules, default="", name=f"pack:{pack.scenario}")


# Single shared fallback so pack-specific baseline rules always match first.
_BASELINE_FALLBACK = ScriptRule(
    role_tag="judge",
    match="Is the case erroneous?",
    response=json.dumps({"flag": False, "justification": "no obvious problem found"}),
    usage=BASELINE_USAGE,
)


def combined_scenario(packs: list[ScenarioPack]) -> ScriptedScenario:
    rules: list[ScriptRule] = []
    for p in packs:
        rules.extend(r for r in engine_scenario(p).rules if r is not _BASELINE_FALLBACK)
    rules.append(_BASELINE_FALLBACK)
    return ScriptedScenario(rules=rules, default="", name="pack:combined")


def render_facts(facts: FactSet) -> str:
    lines = []
    for e, a, v in sorted(facts.triples(), key=lambda t: (t[0], t[1], str(t[2]))):
        lhs = f"{e}.{a}" if e else a
        lines.append(f"{lhs} = {_fmt_literal(v)}")
    return "\n".join(lines)


# ----------------------------------------------------------------------
# DRG pack
# ----------------------------------------------------------------------

F_DIAGNOSES = ["I21.001", "I21.002", "I25.103", "I50.907"]
E_DIAGNOSES = ["J18.9", "J15.0", "J44.1", "J98.414"]
F_PROCEDURES = ["36.0601", "36.0602", "36.1200"]
E_PROCEDURES = ["33.2301", "96.7101", "33.9901"]
_DRG_TABLE = {
    ("FZ1", "none"): "FZ19",
    ("FZ1", "cc"): "FZ15",
    ("FZ1", "mcc"): "FZ11",
    ("EZ1", "none"): "EZ19",
    ("EZ1", "cc"): "EZ15",
    ("EZ1", "mcc"): "EZ11",
}


def _drg_facts(diagnosis: str, procedure: str, secondary: str | None, claimed: str) -> FactSet:
    triples: list[tuple[str, str, object]] = [
        ("case", "diagnosis", diagnosis),
        ("case", "procedure", procedure),
        ("case", "has_secondary", "yes" if secondary else "no"),
        ("case", "claimed_drg", claimed),
    ]
    if secondary:
        triples.append(("case", "secondary_dx", secondary))
    return FactSet.from_triples(triples, multi_valued={"secondary_dx"})


def _drg_expected(diagnosis: str, secondary: str | None) -> tuple[str, str]:
    adrg = "FZ1" if diagnosis in F_DIAGNOSES else "EZ1"
    cc_level = {None: "none", "Z95.501": "none", "E11.900": "cc", "N17.900": "mcc"}[secondary]
    return adrg, _DRG_TABLE[(adrg, cc_level)]


def generate_drg(rng: random.Random, case_id: str) -> FactSet:
    circulatory = rng.random() < 0.5
    diagnosis = rng.choice(F_DIAGNOSES if circulatory else E_DIAGNOSES)
    procedure = rng.choice(F_PROCEDURES if circulatory else E_PROCEDURES)
    roll = rng.random()
    secondary = None if roll < 0.55 else "Z95.501" if roll < 0.70 else "E11.900" if roll < 0.85 else "N17.900"
    _, drg = _drg_expected(diagnosis, secondary)
    return _drg_facts(diagnosis, procedure, secondary, drg)


def inject_drg_mismatch(case: BenchmarkCase, rng: random.Random) -> tuple[FactSet, dict]:
    facts = case.facts
    diagnosis = facts.get("case", "diagnosis")[0]
    old = facts.get("case", "procedure")[0]
    other = E_PROCEDURES if diagnosis in F_DIAGNOSES else F_PROCEDURES
    new = rng.choice(other)
    secondary = (facts.get("case", "secondary_dx") or [None])[0]
    claimed = facts.get("case", "claimed_drg")[0]
    return (
        _drg_facts(diagnosis, new, secondary, claimed),
        {"kind": "diagnosis-procedure-mismatch", "old_procedure": old, "new_procedure": new},
    )


def inject_drg_missing_cc(case: BenchmarkCase, rng: random.Random) -> tuple[FactSet, dict]:
    facts = case.facts
    diagnosis = facts.get("case", "diagnosis")[0]
    procedure = facts.get("case", "procedure")[0]
    secondary = rng.choice(["N17.900", "E11.900"])
    adrg, _ = _drg_expected(diagnosis, None)
    claimed = _DRG_TABLE[(adrg, "none")]  # billed as if the complication were absent
    return (
        _drg_facts(diagnosis, procedure, secondary, claimed),
        {"kind": "missing-complication-code", "secondary_dx": secondary, "claimed_drg": claimed},
    )


def compose_drg(task: TaskSpec, atoms: list[Atom3], violations: list[str]) -> str:
    if violations:
        return f"Grouping erroneous; violated rules: {', '.join(violations)}."
    drg = next((v for (e, a, v) in atoms if a == "drg"), None)
    if drg:
        return f"DRG = {drg}, grouping correct"
    return "Grouping verified; no violations found."


DRG_PACK = ScenarioPack(
    scenario="drg",
    task_phrase="Audit the DRG grouping for case",
    multi_valued={"secondary_dx"},
    goal_attrs=["drg"],
    plan_subtasks=[
        {
            "description": "Extract key case information from the record",
            "topics": [],
            "inputs": [],
            "outputs": ["diagnosis", "procedure", "secondary_dx", "has_secondary", "claimed_drg"],
        },
        {
            "description": "Determine the major diagnostic category from the principal diagnosis",
            "topics": ["mdc"],
            "inputs": ["diagnosis"],
            "outputs": ["mdc"],
        },
        {
            "description": "Determine the adjacent group and check procedure validity",
            "topics": ["adrg"],
            "inputs": ["mdc", "procedure"],
            "outputs": ["adrg"],
        },
        {
            "description": "Check complication and comorbidity level",
            "topics": ["cc"],
            "inputs": ["has_secondary", "secondary_dx"],
            "outputs": ["cc_level"],
        },
        {
            "description": "Generate the final group code and verify the claimed grouping",
            "topics": ["final", "claim"],
            "inputs": ["adrg", "cc_level", "claimed_drg"],
            "outputs": ["drg"],
        },
    ],
    plan_dependencies=[[0, 1], [1, 2], [0, 3], [2, 4], [3, 4]],
    template_text="Verify clinical logic consistency between {diagnosis} and {procedure}",
    generators={"default": generate_drg},
    injectors={
        "diagnosis-procedure-mismatch": inject_drg_mismatch,
        "missing-complication-code": inject_drg_missing_cc,
    },
    composer=compose_drg,
    error_fraction=0.20,
    baseline_rules=[
        ScriptRule(
            role_tag="judge",
            regex=True,
            match=r"diagnosis = \"J18\.9\"[\s\S]*procedure = \"36\.[\s\S]*Is the case erroneous",
            response=json.dumps({"flag": True, "justification": "respiratory diagnosis with cardiac procedure"}),
            usage=BASELINE_USAGE,
        ),
    ],
)


# ----------------------------------------------------------------------
# Regulatory pack
# ----------------------------------------------------------------------


def _reg_facts(claims: list[str], evidence: list[str], p_value: float, ptr: str = "yes") -> FactSet:
    fs = FactSet(multi_valued={"claims", "evidence"})
    for c in claims:
        fs.add("ifu", "claims", c)
    for ev in evidence:
        fs.add("cer", "evidence", ev)
    fs.add("cer", "p_value", p_value)
    fs.add("doc", "ptr_consistent", ptr)
    return fs


def generate_regulatory(rng: random.Random, case_id: str) -> FactSet:
    rate = rng.choice(["success-rate-92", "success-rate-95"])
    claims = ["efficacy-general", rate]
    if rng.random() < 0.5:
        lesion = rng.choice(["lesion-max-25mm", "lesion-max-30mm"])
        claims.append(lesion)
    evidence = [c for c in claims if c != "efficacy-general"]
    p_value = rng.choice([0.01, 0.02, 0.03, 0.04])
    return _reg_facts(claims, evidence, p_value)


def inject_reg_conflict(case: BenchmarkCase, rng: random.Random) -> tuple[FactSet, dict]:
    facts = case.facts
    claims = list(facts.get("ifu", "claims") or [])
    evidence = list(facts.get("cer", "evidence") or [])
    p_value = facts.get("cer", "p_value")[0]
    if rng.random() < 0.5:
        # Usage instructions claim 95% while the report shows 92%.
        claims = [c for c in claims if not c.startswith("success-rate")] + ["success-rate-95"]
        evidence = [e for e in evidence if not e.startswith("success-rate")] + ["success-rate-92"]
        descriptor = {
            "kind": "ifu-cer-statistic-conflict",
            "detail": "claimed success-rate-95 against reported success-rate-92",
        }
        return _reg_facts(claims, evidence, p_value), descriptor
    # Claim extends to 30mm lesions although significance fails above 25mm.
    claims = [c for c in claims if not c.startswith("lesion-max")] + ["lesion-max-30mm"]
    evidence = [e for e in evidence if not e.startswith("lesion-max")] + ["lesion-max-25mm"]
    descriptor = {
        "kind": "ifu-cer-statistic-conflict",
        "detail": "claimed lesion-max-30mm with p=0.08 above the 0.05 endpoint threshold",
    }
    return _reg_facts(claims, evidence, 0.08), descriptor


def compose_regulatory(task: TaskSpec, atoms: list[Atom3], violations: list[str]) -> str:
    if violations:
        return f"Submission inconsistent; violated rules: {', '.join(violations)}."
    return "Submission documents consistent; all claims supported."


REG_PACK = ScenarioPack(
    scenario="regulatory",
    task_phrase="Verify submission consistency for device dossier",
    multi_valued={"claims", "evidence"},
    goal_attrs=["significance"],
    plan_subtasks=[
        {
            "description": "Extract claims, evidence, and trial statistics from the dossier",
            "topics": [],
            "inputs": [],
            "outputs": ["claims", "evidence", "p_value", "ptr_consistent"],
        },
        {
            "description": "Assess statistical significance of the trial endpoints",
            "topics": ["stats"],
            "inputs": ["p_value"],
            "outputs": ["significance"],
        },
        {
            "description": "Check each usage claim against the evaluation evidence",
            "topics": ["claims"],
            "inputs": ["claims", "evidence", "significance"],
            "outputs": [],
        },
        {
            "description": "Confirm technical-requirement consistency",
            "topics": ["completeness"],
            "inputs": ["ptr_consistent"],
            "outputs": [],
        },
    ],
    plan_dependencies=[[0, 1], [1, 2], [0, 3]],
    template_text="Verify that every usage claim about {clause} is supported by evaluation evidence",
    generators={"default": generate_regulatory},
    injectors={"ifu-cer-statistic-conflict": inject_reg_conflict},
    composer=compose_regulatory,
    error_fraction=0.20,
    baseline_rules=[
        ScriptRule(
            role_tag="judge",
            regex=True,
            match=r"p_value = 0\.08[\s\S]*Is the case erroneous",
            response=json.dumps({"flag": True, "justification": "p-value above significance threshold"}),
            usage=BASELINE_USAGE,
        ),
    ],
)


# ----------------------------------------------------------------------
# EHR pack
# ----------------------------------------------------------------------

VIRAL_DIAGNOSES = ["viral pharyngitis", "viral upper respiratory infection", "influenza"]
BACTERIAL_DIAGNOSES = ["bacterial pneumonia", "streptococcal pharyngitis", "acute sinusitis"]
PENICILLIN_DRUGS = ["amoxicillin", "ampicillin", "piperacillin"]
NON_PENICILLIN_ANTIBIOTICS = ["cefuroxime", "azithromycin", "levofloxacin"]
SUPPORTIVE_DRUGS = ["oseltamivir", "acetaminophen", "dextromethorphan"]


def _ehr_facts(allergies: list[str], diagnosis: str, drug: str, hours: int) -> FactSet:
    fs = FactSet(multi_valued={"allergy"})
    for al in allergies:
        fs.add("patient", "allergy", al)
    fs.add("patient", "diagnosis", diagnosis)
    fs.add("order", "drug", drug)
    fs.add("", "event", "admission")
    fs.add("note", "initial_progress_hours", hours)
    return fs


def generate_ehr(rng: random.Random, case_id: str) -> FactSet:
    roll = rng.random()
    allergies = ["none"] if roll < 0.6 else ["sulfa"] if roll < 0.85 else ["penicillin"]
    if rng.random() < 0.5:
        diagnosis = rng.choice(VIRAL_DIAGNOSES)
        drug = rng.choice(SUPPORTIVE_DRUGS)
    else:
        diagnosis = rng.choice(BACTERIAL_DIAGNOSES)
        if "penicillin" in allergies:
            drug = rng.choice(NON_PENICILLIN_ANTIBIOTICS)
        else:
            drug = rng.choice(PENICILLIN_DRUGS + NON_PENICILLIN_ANTIBIOTICS)
    return _ehr_facts(allergies, diagnosis, drug, rng.randrange(2, 8))


def inject_ehr_allergy(case: BenchmarkCase, rng: random.Random) -> tuple[FactSet, dict]:
    facts = case.facts
    diagnosis = facts.get("patient", "diagnosis")[0]
    hours = facts.get("note", "initial_progress_hours")[0]
    drug = rng.choice(PENICILLIN_DRUGS)
    return (
        _ehr_facts(["penicillin"], diagnosis, drug, hours),
        {"kind": "allergy-drug-conflict", "allergy": "penicillin", "drug": drug},
    )


def inject_ehr_mismatch(case: BenchmarkCase, rng: random.Random) -> tuple[FactSet, dict]:
    facts = case.facts
    allergies = list(facts.get("patient", "allergy") or ["none"])
    hours = facts.get("note", "initial_progress_hours")[0]
    diagnosis = rng.choice(VIRAL_DIAGNOSES)
    drug = rng.choice(NON_PENICILLIN_ANTIBIOTICS)
    return (
        _ehr_facts(allergies, diagnosis, drug, hours),
        {"kind": "diagnosis-medication-mismatch", "diagnosis": diagnosis, "drug": drug},
    )


def compose_ehr(task: TaskSpec, atoms: list[Atom3], violations: list[str]) -> str:
    if violations:
        return f"Order conflicts detected; violated rules: {', '.join(violations)}."
    return "Order clean; no safety or clinical logic conflicts."


EHR_PACK = ScenarioPack(
    scenario="ehr",
    task_phrase="Review the new medication order for encounter",
    multi_valued={"allergy"},
    goal_attrs=["drug_class"],
    plan_subtasks=[
        {
            "description": "Retrieve patient allergies, diagnosis, and the new order",
            "topics": [],
            "inputs": [],
            "outputs": ["allergy", "diagnosis", "drug", "event", "initial_progress_hours"],
        },
        {
            "description": "Classify the ordered drug and the recorded diagnosis",
            "topics": ["classify"],
            "inputs": ["drug", "diagnosis"],
            "outputs": ["drug_class", "drug_kind", "diagnosis_kind"],
        },
        {
            "description": "Cross-check the order against allergy safety rules",
            "topics": ["safety"],
            "inputs": ["allergy", "drug_class"],
            "outputs": [],
        },
        {
            "description": "Cross-check the order against clinical logic and documentation norms",
            "topics": ["logic", "norms"],
            "inputs": ["diagnosis_kind", "drug_kind", "initial_progress_hours"],
            "outputs": [],
        },
    ],
    plan_dependencies=[[0, 1], [1, 2], [1, 3]],
    template_text="Check medication order safety for {drug} given {allergy} and {diagnosis}",
    generators={"default": generate_ehr},
    injectors={
        "allergy-drug-conflict": inject_ehr_allergy,
        "diagnosis-medication-mismatch": inject_ehr_mismatch,
    },
    composer=compose_ehr,
    error_fraction=0.25,
    baseline_rules=[
        ScriptRule(
            role_tag="judge",
            regex=True,
            match=r"drug = \"(amoxicillin|ampicillin|piperacillin)\"[\s\S]*allergy = \"penicillin\"[\s\S]*Is the case erroneous",
            response=json.dumps({"flag": True, "justification": "drug-allergy contradiction"}),
            usage=BASELINE_USAGE,
        ),
    ],
)


# ----------------------------------------------------------------------
# Insurance pack
# ----------------------------------------------------------------------

TRANSPLANT_PROCEDURES = ["liver-transplant", "kidney-transplant", "heart-transplant"]
ELECTIVE_PROCEDURES = ["knee-arthroscopy", "cataract-surgery"]


def _ins_facts(procedure: str, months: int, necessary: str, preauth: str, active: str) -> FactSet:
    return FactSet.from_triples(
        [
            ("claim", "procedure", procedure),
            ("claim", "medically_necessary", necessary),
            ("claim", "preauthorized", preauth),
            ("member", "enrollment", Duration(months, "months")),
            ("member", "policy_active", active),
        ]
    )


def generate_insurance(rng: random.Random, case_id: str) -> FactSet:
    if rng.random() < 0.6:
        procedure = rng.choice(TRANSPLANT_PROCEDURES)
        months = rng.randrange(12, 37)
    else:
        procedure = rng.choice(ELECTIVE_PROCEDURES)
        months = rng.randrange(2, 37)
    return _ins_facts(procedure, months, "yes", "yes", "yes")


def inject_ins_enrollment(case: BenchmarkCase, rng: random.Random) -> tuple[FactSet, dict]:
    facts = case.facts
    procedure = facts.get("claim", "procedure")[0]
    if procedure not in TRANSPLANT_PROCEDURES:
        procedure = rng.choice(TRANSPLANT_PROCEDURES)
    months = rng.randrange(2, 12)
    return (
        _ins_facts(procedure, months, "yes", "yes", "yes"),
        {"kind": "exclusion-triggering-enrollment", "procedure": procedure, "enrollment_months": months},
    )


def compose_insurance(task: TaskSpec, atoms: list[Atom3], violations: list[str]) -> str:
    if violations:
        return f"Claim must be denied; violated rules: {', '.join(violations)}."
    return "Claim approvable; coverage requirements met."


INS_PACK = ScenarioPack(
    scenario="insurance",
    task_phrase="Adjudicate the claim for member case",
    multi_valued=set(),
    goal_attrs=["category"],
    plan_subtasks=[
        {
            "description": "Verify enrollment records and extract claim details",
            "topics": [],
            "inputs": [],
            "outputs": ["procedure", "medically_necessary", "preauthorized", "enrollment", "policy_active"],
        },
        {
            "description": "Categorize the claimed procedure under the policy",
            "topics": ["coverage"],
            "inputs": ["procedure"],
            "outputs": ["category"],
        },
        {
            "description": "Verify enrollment duration and pre-authorization for the claim category",
            "topics": ["adjudicate"],
            "inputs": ["category", "enrollment", "medically_necessary", "preauthorized"],
            "outputs": [],
        },
        {
            "description": "Check policy exclusion clauses",
            "topics": ["exclusions"],
            "inputs": ["policy_active"],
            "outputs": [],
        },
    ],
    plan_dependencies=[[0, 1], [1, 2], [0, 3]],
    template_text="Adjudicate coverage for {procedure} subject to {clause} and {duration}",
    generators={"default": generate_insurance},
    injectors={"exclusion-triggering-enrollment": inject_ins_enrollment},
    composer=compose_insurance,
    error_fraction=0.30,
    baseline_rules=[
        ScriptRule(
            role_tag="judge",
            regex=True,
            match=r"enrollment = [2-7] months[\s\S]*Is the case erroneous",
            response=json.dumps({"flag": True, "justification": "enrollment clearly below the 12-month floor"}),
            usage=BASELINE_USAGE,
        ),
    ],
)


PACKS: dict[str, ScenarioPack] = {
    "drg": DRG_PACK,
    "regulatory": REG_PACK,
    "ehr": EHR_PACK,
    "insurance": INS_PACK,
}


def composers() -> dict[str, Composer]:
    return {name: pack.composer for name, pack in PACKS.items()}
