"""Character and token classification.

Everything downstream (vocabulary pruning, logit masking, template
enforcement) hinges on one question: can this token emit more than one
Chinese character, or mix Chinese with other text, in a single step?
Tokens that can are "long tokens" and get removed from the generation
path; everything else survives.
"""

from __future__ import annotations

from enum import Enum

# Default inclusive codepoint ranges treated as Chinese characters.
# CJK Unified Ideographs plus Extension A; rarer Extensions B+ are
# excluded by default (configurable, see `set_cjk_ranges`).
DEFAULT_CJK_RANGES: tuple[tuple[int, int], ...] = (
    (0x4E00, 0x9FFF),
    (0x3400, 0x4DBF),
)


class CharClass(Enum):
    CHINESE = "chinese"
    NON_CHINESE = "non_chinese"


class TokenClass(Enum):
    SINGLE_CHINESE = "single_chinese"
    BYTE_FRAGMENT = "byte_fragment"
    NON_CHINESE = "non_chinese"
    LONG = "long"


def classify_char(ch: str, ranges: tuple[tuple[int, int], ...] = DEFAULT_CJK_RANGES) -> CharClass:
    """Classify a single Unicode scalar as Chinese or not.

    Total and deterministic; punctuation (including fullwidth ，。) is
    NON_CHINESE.
    """
    cp = ord(ch)
    for lo, hi in ranges:
        if lo <= cp <= hi:
            return CharClass.CHINESE
    return CharClass.NON_CHINESE


def is_chinese(ch: str, ranges: tuple[tuple[int, int], ...] = DEFAULT_CJK_RANGES) -> bool:
    return classify_char(ch, ranges) is CharClass.CHINESE


def count_chinese(text: str, ranges: tuple[tuple[int, int], ...] = DEFAULT_CJK_RANGES) -> int:
    """Number of Chinese characters in `text`."""
    return sum(1 for ch in text if is_chinese(ch, ranges))


def classify_token(token: bytes, ranges: tuple[tuple[int, int], ...] = DEFAULT_CJK_RANGES) -> TokenClass:
    """Classify a vocabulary entry given as a byte sequence.

    LONG means the token would emit more than one Chinese character, or
    one Chinese character mixed with other text, in a single step.
    Byte sequences that are not complete UTF-8 are BYTE_FRAGMENT and are
    always retained by pruning.
    """
    try:
        text = token.decode("utf-8")
    except UnicodeDecodeError:
        return TokenClass.BYTE_FRAGMENT

    n_chinese = count_chinese(text, ranges)
    n_other = len(text) - n_chinese
    if n_chinese >= 2:
        return TokenClass.LONG
    if n_chinese == 1:
        return TokenClass.LONG if n_other >= 1 else TokenClass.SINGLE_CHINESE
    return TokenClass.NON_CHINESE


def is_long_token(token: bytes, ranges: tuple[tuple[int, int], ...] = DEFAULT_CJK_RANGES) -> bool:
    return classify_token(token, ranges) is TokenClass.LONG


def load_cjk_ranges(config: dict) -> tuple[tuple[int, int], ...]:
    """Read the `cjk_ranges` config key (list of [lo, hi] codepoints).

    Falls back to the defaults when the key is absent.
    """
    raw = config.get("cjk_ranges")
    if raw is None:
        return DEFAULT_CJK_RANGES
    ranges = []
    for pair in raw:
        lo, hi = int(pair[0]), int(pair[1])
        if lo > hi:
            raise ValueError(f"invalid cjk range [{lo:#x}, {hi:#x}]: lo > hi")
        ranges.append((lo, hi))
    return tuple(ranges)
