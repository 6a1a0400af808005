"""Token counting.

The backends we talk to do not always report usage, so the engine falls
back to a fixed approximation: ceil(utf8_byte_length / 4). It is crude but
deterministic and monotone, which is all the cost ledger needs.
"""

import math


def count_tokens(text: str) -> int:
    """Approximate token count of ``text``: ceil(utf-8 bytes / 4)."""
    if not text:
        return 0
    return math.ceil(len(text.encode("utf-8")) / 4)
