"""Engine configuration.

Flat key-value config files (one ``key = value`` per line, ``#`` comments)
overridable by MMIA_* environment variables. Documented keys:

    data_dir                     directory for all JSONL stores
    backend                      scripted | http
    scenario_file                scripted scenario JSON (backend=scripted);
                                 empty means the built-in pack scenarios
    verifier                     deterministic | llm
    consensus_n                  number of audits per consensus (default 3)
    consensus_rule               unanimity | majority
    similarity_threshold         theorem-match threshold (default 0.80)
    max_depth / max_steps        reasoning budgets
    replay                       true zeroes timestamps and wall times
    auto_approve_chain_theorems  promotion skips the review queue
    packs                        comma list of scenario packs to install
    api_key                      static key required in X-Api-Key when set
    port                         serve port (default 8321)
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import StartupError
from ..gateway.backends import ENV_KEY, ENV_MODEL, ENV_URL


@dataclass
class EngineConfig:
    data_dir: Path = Path("./mmia-data")
    backend: str = "scripted"
    scenario_file: str = ""
    backend_url: str = ""
    backend_key: str = ""
    backend_model: str = ""
    verifier: str = "deterministic"
    consensus_n: int = 3
    consensus_rule: str = "unanimity"
    similarity_threshold: float = 0.80
    max_depth: int = 5
    max_steps: int = 64
    replay: bool = False
    auto_approve_chain_theorems: bool = False
    packs: list[str] = field(default_factory=lambda: ["drg", "regulatory", "ehr", "insurance"])
    api_key: str = ""
    port: int = 8321

    def validate(self) -> None:
        if self.backend not in ("scripted", "http"):
            raise StartupError(f"unknown backend {self.backend!r}")
        if self.verifier not in ("deterministic", "llm"):
            raise StartupError(f"unknown verifier {self.verifier!r}")
        if self.consensus_rule not in ("unanimity", "majority"):
            raise StartupError(f"unknown consensus rule {self.consensus_rule!r}")
        if not 0.0 <= self.similarity_threshold <= 1.0:
            raise StartupError("similarity_threshold must lie in [0, 1]")
        if self.consensus_n < 1 or self.max_depth < 1 or self.max_steps < 1:
            raise StartupError("counts must be positive")
        parent = self.data_dir if self.data_dir.exists() else self.data_dir.parent
        if parent.exists() and not os.access(parent, os.W_OK):
            raise StartupError(f"data directory {self.data_dir} is not writable")


_BOOL = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def load_config(path: Path | None = None, env: dict | None = None) -> EngineConfig:
    env = env if env is not None else dict(os.environ)
    values: dict[str, str] = {}
    if path is not None:
        if not path.exists():
            raise StartupError(f"config file {path} does not exist")
        for raw in path.read_text(encoding="utf-8").splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise StartupError(f"bad config line (expected key = value): {line!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()

    cfg = EngineConfig()

    def get(key: str, default):
        return values.get(key, default)

    cfg.data_dir = Path(get("data_dir", str(cfg.data_dir)))
    cfg.backend = get("backend", cfg.backend)
    cfg.scenario_file = get("scenario_file", cfg.scenario_file)
    cfg.verifier = get("verifier", cfg.verifier)
    cfg.consensus_n = int(get("consensus_n", cfg.consensus_n))
    cfg.consensus_rule = get("consensus_rule", cfg.consensus_rule)
    cfg.similarity_threshold = float(get("similarity_threshold", cfg.similarity_threshold))
    cfg.max_depth = int(get("max_depth", cfg.max_depth))
    cfg.max_steps = int(get("max_steps", cfg.max_steps))
    cfg.replay = _BOOL.get(str(get("replay", cfg.replay)).lower(), cfg.replay)
    cfg.auto_approve_chain_theorems = _BOOL.get(
        str(get("auto_approve_chain_theorems", cfg.auto_approve_chain_theorems)).lower(),
        cfg.auto_approve_chain_theorems,
    )
    packs_raw = get("packs", ",".join(cfg.packs))
    cfg.packs = [p.strip() for p in packs_raw.split(",") if p.strip()]
    cfg.api_key = get("api_key", cfg.api_key)
    cfg.port = int(get("port", cfg.port))

    # Environment wins for backend wiring.
    cfg.backend_url = env.get(ENV_URL, values.get("backend_url", ""))
    cfg.backend_key = env.get(ENV_KEY, values.get("backend_key", ""))
    cfg.backend_model = env.get(ENV_MODEL, values.get("backend_model", ""))
    if cfg.backend_url and cfg.backend == "scripted" and "backend" not in values:
        cfg.backend = "http"

    cfg.validate()
    return cfg
