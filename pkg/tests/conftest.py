import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mmia.bench.fixtures import build_fixture_kb
from mmia.bench.packs import PACKS, combined_scenario, composers
from mmia.engine import EngineContext
from mmia.gateway import Gateway, ScriptedBackend


@pytest.fixture(scope="session")
def pack_kb():
    """Knowledge base with all four scenario packs installed and approved."""
    return build_fixture_kb()


@pytest.fixture()
def pack_context(pack_kb):
    """Replay-mode engine context over the combined scripted pack backend."""
    backend = ScriptedBackend(combined_scenario(list(PACKS.values())))
    return EngineContext(
        kb=pack_kb, gateway=Gateway(backend), replay=True, composers=composers()
    )
