"""Spelling-bee probe: does a model know which characters its long
tokens contain?

The harness builds prompt/expected pairs from a vocabulary's long
tokens; any external runner produces outputs, and scoring reports two
failure rates: exact-mismatch overall, and the stricter-to-fail variant
counting only wrong character counts.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .charclass import DEFAULT_CJK_RANGES, is_chinese
from .vocab import Vocabulary, build_long_token_set

SEPARATOR = "<|extra_1|>"

# Reference magnitudes from the probe run against the original 7B
# models; NOT reproducible here (requires the finetuned LLMs), kept
# only for report rendering.
REFERENCE_FAILURE_RATES = {
    "token_based_7b": {"overall": 0.099, "by_char_count": 0.017},
    "token_free_7b": {"overall": 0.005, "by_char_count": 0.001},
}


class ProbeError(ValueError):
    pass


@dataclass(frozen=True)
class ProbeItem:
    token: str
    expected_chars: tuple[str, ...]

    def __post_init__(self):
        if "".join(self.expected_chars) != "".join(c for c in self.token if is_chinese(c)):
            raise ProbeError(f"expected_chars do not spell the Chinese content of {self.token!r}")
        if len(self.expected_chars) < 2 and all(is_chinese(c) for c in self.token):
            raise ProbeError(f"probe item {self.token!r} must have >= 2 characters")


@dataclass(frozen=True)
class FailureRates:
    overall: float
    by_char_count: float
    n: int


def build_probe_set(
    v: Vocabulary, n: int, seed: int, include_mixed: bool = False, ranges=DEFAULT_CJK_RANGES
) -> tuple[list[ProbeItem], list[ProbeItem]]:
    """Split the vocabulary's long tokens into a uniform random test set
    of size `n` and a training remainder. Mixed-script long tokens are
    excluded unless `include_mixed`."""
    candidates = []
    for tid in sorted(build_long_token_set(v, ranges)):
        raw = v.entries[tid]
        text = raw.decode("utf-8")
        chinese = [c for c in text if is_chinese(c, ranges)]
        if not include_mixed and len(chinese) != len(text):
            continue
        candidates.append(ProbeItem(token=text, expected_chars=tuple(chinese)))

    if len(candidates) < n:
        raise ProbeError(f"need {n} long tokens, vocabulary only has {len(candidates)}")
    rng = random.Random(seed)
    test_idx = set(rng.sample(range(len(candidates)), n))
    test = [item for i, item in enumerate(candidates) if i in test_idx]
    train = [item for i, item in enumerate(candidates) if i not in test_idx]
    return test, train


def probe_prompt(item: ProbeItem) -> dict[str, str]:
    """Render the instruction-following probe prompt and its expected
    response (characters joined by the separator)."""
    return {
        "prompt": f"List all the characters in the following token: {SEPARATOR}{item.token}",
        "expected": SEPARATOR.join(item.expected_chars),
    }


def score_probe(items: list[ProbeItem], outputs: list[str]) -> FailureRates:
    """Overall failure: output differs from the expected response.
    Char-count failure: the output's segment count differs from the
    token's character count."""
    if len(items) != len(outputs):
        raise ProbeError(f"{len(items)} items but {len(outputs)} outputs")
    if not items:
        raise ProbeError("empty probe set")
    overall = 0
    by_count = 0
    for item, output in zip(items, outputs):
        expected = SEPARATOR.join(item.expected_chars)
        if output != expected:
            overall += 1
        if len(output.split(SEPARATOR)) != len(item.expected_chars):
            by_count += 1
    n = len(items)
    return FailureRates(overall=overall / n, by_char_count=by_count / n, n=n)


def dump_items(items: list[ProbeItem]) -> str:
    """JSON-lines serialization: {token, expected_chars} per line."""
    return "\n".join(
        json.dumps({"token": i.token, "expected_chars": list(i.expected_chars)}, ensure_ascii=False)
        for i in items
    )


def load_items(payload: str) -> list[ProbeItem]:
    items = []
    for line in payload.splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        items.append(ProbeItem(token=doc["token"], expected_chars=tuple(doc["expected_chars"])))
    return items
