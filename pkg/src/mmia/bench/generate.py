"""Offline case generation and programmatic error injection.

Generation is a pure function of (scenario, template, seed); an optional
backend adds an LLM-written narrative without touching the structured
facts, so gold labels never depend on a model.
"""

from __future__ import annotations

import random

from ..errors import ConfigurationError, PreconditionError
from ..gateway import ChatRequest, render_prompt
from .cases import BenchmarkCase
from .packs import PACKS, render_facts

SYSTEM_GENERATOR = "You write short realistic clinical and administrative narratives."


def generate_case(scenario: str, template_id: str, seed: int, backend=None) -> BenchmarkCase:
    """Build one gold-correct case from a registered template and seed."""
    pack = PACKS.get(scenario)
    if pack is None:
        raise ConfigurationError(f"unknown scenario {scenario!r}")
    generator = pack.generators.get(template_id)
    if generator is None:
        raise ConfigurationError(f"no template {template_id!r} registered for {scenario!r}")
    rng = random.Random(seed)
    case_id = pack.case_id(seed)
    facts = generator(rng, case_id)
    documents: list[dict] = []
    if backend is not None:
        response = backend.complete(
            ChatRequest(
                role_tag="generator",
                system_prompt=SYSTEM_GENERATOR,
                user_prompt=render_prompt(
                    "generate-case", {"scenario": scenario, "facts": render_facts(facts)}
                ),
            )
        )
        documents.append({"id": f"{case_id}-narrative", "text": response.text})
    return BenchmarkCase(id=case_id, scenario=scenario, facts=facts, documents=documents)


def inject_error(case: BenchmarkCase, kind: str, seed: int) -> BenchmarkCase:
    """Mutate a gold-correct case into a labeled erroneous one."""
    if case.gold_label != "correct":
        raise PreconditionError(f"case {case.id} already carries an injected error")
    pack = PACKS.get(case.scenario)
    if pack is None:
        raise ConfigurationError(f"unknown scenario {case.scenario!r}")
    injector = pack.injectors.get(kind)
    if injector is None:
        raise ConfigurationError(f"error kind {kind!r} is not valid for scenario {case.scenario!r}")
    facts, descriptor = injector(case, random.Random(seed))
    descriptor.setdefault("kind", kind)
    descriptor["seed"] = seed
    return BenchmarkCase(
        id=case.id,
        scenario=case.scenario,
        facts=facts,
        documents=list(case.documents),
        gold_label="erroneous",
        injected_error=descriptor,
        provenance=case.provenance,
    )


def make_suite(scenario: str, n: int = 40, seed: int = 1, backend=None) -> list[BenchmarkCase]:
    """A full offline suite: n cases, the pack's error fraction injected."""
    pack = PACKS.get(scenario)
    if pack is None:
        raise ConfigurationError(f"unknown scenario {scenario!r}")
    if n < 1:
        raise PreconditionError("suite size must be >= 1")
    cases = [generate_case(scenario, "default", seed * 100000 + i, backend) for i in range(n)]
    k = round(n * pack.error_fraction)
    rng = random.Random(seed)
    erroneous_indices = sorted(rng.sample(range(n), k))
    kinds = sorted(pack.injectors)
    for j, idx in enumerate(erroneous_indices):
        kind = kinds[j % len(kinds)]
        cases[idx] = inject_error(cases[idx], kind, seed * 100000 + idx)
    return cases
