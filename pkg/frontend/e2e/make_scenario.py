"""Emit the scripted-backend scenario used by the console round-trip test:
the built-in pack replies plus one extractor rule for the ingested document."""

import json
import sys

from mmia.bench.packs import PACKS, combined_scenario
from mmia.gateway import ScriptRule

scenario = combined_scenario(list(PACKS.values()))
extractor_reply = json.dumps(
    {
        "candidates": [
            {
                "rule_text": 'IF order.drug = "amoxicillin" THEN order.drug_class = "penicillin-class"',
                "excerpt": "amoxicillin belongs to the penicillin class",
            }
        ]
    }
)
scenario.rules.insert(0, ScriptRule(role_tag="extractor", response=extractor_reply))
scenario.name = "console-e2e"

with open(sys.argv[1], "w", encoding="utf-8") as f:
    json.dump(scenario.to_dict(), f, sort_keys=True)
print(sys.argv[1])
