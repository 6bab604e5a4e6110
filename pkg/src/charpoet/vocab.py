"""Token vocabulary loading, long-token pruning, and BPE tokenization.

Pruning never deletes entries or renumbers ids: the long tokens simply
become unreachable. We drop every merge whose result is a long token,
then transitively drop merges whose operands can no longer be produced.
The resulting tokenizer emits at most one Chinese character per token,
while non-Chinese text tokenizes exactly as before.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

from .charclass import (
    DEFAULT_CJK_RANGES,
    TokenClass,
    classify_token,
    is_chinese,
)


class VocabularyError(ValueError):
    """Malformed vocabulary file or unresolvable merge."""


class TokenizationError(ValueError):
    """Byte that no vocabulary entry can represent, or invalid UTF-8 output."""


@lru_cache(maxsize=1)
def bytes_to_printable() -> dict[int, str]:
    """The common byte-to-printable-character mapping used by BPE vocab
    files: printable bytes map to themselves, the rest to U+0100+offset."""
    bs = list(range(ord("!"), ord("~") + 1)) + list(range(0xA1, 0xAD)) + list(range(0xAE, 0x100))
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    return dict(zip(bs, map(chr, cs)))


@lru_cache(maxsize=1)
def printable_to_bytes() -> dict[str, int]:
    return {c: b for b, c in bytes_to_printable().items()}


def encode_token_string(raw: bytes) -> str:
    m = bytes_to_printable()
    return "".join(m[b] for b in raw)


def decode_token_string(s: str) -> bytes:
    m = printable_to_bytes()
    try:
        return bytes(m[c] for c in s)
    except KeyError as e:
        raise VocabularyError(f"token string contains unmappable character {e.args[0]!r}") from None


@dataclass(frozen=True)
class Vocabulary:
    """A byte-level BPE vocabulary: id -> byte sequence, ordered merges,
    and atomic special-token strings."""

    entries: dict[int, bytes]
    merges: tuple[tuple[bytes, bytes], ...]
    special_tokens: tuple[str, ...]

    def __post_init__(self):
        ids = {}
        for tid, raw in self.entries.items():
            ids[raw] = tid
        object.__setattr__(self, "_id_of", ids)
        specials = {}
        for s in self.special_tokens:
            raw = s.encode("utf-8")
            if raw not in ids:
                raise VocabularyError(f"special token {s!r} missing from vocab entries")
            specials[s] = ids[raw]
        object.__setattr__(self, "_special_ids", specials)

    @property
    def size(self) -> int:
        return max(self.entries) + 1 if self.entries else 0

    def id_of(self, token: bytes) -> int | None:
        return self._id_of.get(token)

    def special_id(self, name: str) -> int:
        try:
            return self._special_ids[name]
        except KeyError:
            raise VocabularyError(f"unknown special token {name!r}") from None

    def tokenize(self, text: str) -> list[int]:
        return _tokenize(text, self.entries, self._id_of, _merge_ranks(self.merges), self.special_tokens)

    def detokenize(self, ids: list[int]) -> str:
        return _detokenize(ids, self.entries)


@dataclass(frozen=True)
class PrunedVocabulary:
    """A Vocabulary restricted so no long token can ever be emitted.

    Ids are those of the base vocabulary; entries for long tokens remain
    present but unreachable through tokenization.
    """

    base: Vocabulary
    long_set: frozenset[int]
    surviving_merges: tuple[tuple[bytes, bytes], ...]

    @property
    def size(self) -> int:
        return self.base.size

    def id_of(self, token: bytes) -> int | None:
        return self.base.id_of(token)

    def special_id(self, name: str) -> int:
        return self.base.special_id(name)

    def tokenize(self, text: str) -> list[int]:
        return _tokenize(
            text,
            self.base.entries,
            self.base._id_of,
            _merge_ranks(self.surviving_merges),
            self.base.special_tokens,
        )

    def detokenize(self, ids: list[int]) -> str:
        return _detokenize(ids, self.base.entries)


def load_vocabulary(source) -> Vocabulary:
    """Parse a vocabulary file (see README for the JSON schema).

    `source` is a binary file-like object or a bytes/str payload.
    """
    if hasattr(source, "read"):
        payload = source.read()
    else:
        payload = source
    if isinstance(payload, bytes):
        payload = payload.decode("utf-8")
    try:
        doc = json.loads(payload)
    except json.JSONDecodeError as e:
        raise VocabularyError(f"vocabulary parse error at line {e.lineno} column {e.colno}: {e.msg}") from None

    for key in ("vocab", "merges"):
        if key not in doc:
            raise VocabularyError(f"vocabulary file missing {key!r} section")

    entries: dict[int, bytes] = {}
    seen: dict[int, str] = {}
    for token_str, tid in doc["vocab"].items():
        if tid in seen:
            raise VocabularyError(f"duplicate token id {tid} ({seen[tid]!r} and {token_str!r})")
        seen[tid] = token_str
        entries[tid] = decode_token_string(token_str)

    known = set(entries.values())
    merges = []
    for i, merge_str in enumerate(doc["merges"]):
        parts = merge_str.split(" ")
        if len(parts) != 2:
            raise VocabularyError(f"merge {i}: expected 'left right', got {merge_str!r}")
        left, right = decode_token_string(parts[0]), decode_token_string(parts[1])
        for operand, name in ((left, parts[0]), (right, parts[1])):
            if operand not in known:
                raise VocabularyError(f"merge {i}: dangling operand {name!r} not in vocab")
        if left + right not in known:
            raise VocabularyError(f"merge {i}: result of {merge_str!r} not in vocab")
        merges.append((left, right))

    special_tokens = tuple(doc.get("special_tokens", []))
    return Vocabulary(entries=entries, merges=tuple(merges), special_tokens=special_tokens)


def build_long_token_set(v: Vocabulary, ranges=DEFAULT_CJK_RANGES) -> frozenset[int]:
    """Ids of all long tokens. Special tokens are never included."""
    special_raw = {s.encode("utf-8") for s in v.special_tokens}
    return frozenset(
        tid
        for tid, raw in v.entries.items()
        if raw not in special_raw and classify_token(raw, ranges) is TokenClass.LONG
    )


def prune(v: Vocabulary, ranges=DEFAULT_CJK_RANGES) -> PrunedVocabulary:
    """Drop merges producing long tokens, transitively."""
    long_set = build_long_token_set(v, ranges)
    long_raw = {v.entries[tid] for tid in long_set}

    producible = {bytes([b]) for b in range(256)}
    surviving = []
    for left, right in v.merges:
        result = left + right
        if result in long_raw:
            continue
        if left in producible and right in producible:
            surviving.append((left, right))
            producible.add(result)
    return PrunedVocabulary(base=v, long_set=long_set, surviving_merges=tuple(surviving))


# --- tokenization engine ---


@lru_cache(maxsize=8)
def _merge_ranks_cached(merges_key):
    return {pair: rank for rank, pair in enumerate(merges_key)}


def _merge_ranks(merges: tuple) -> dict:
    return _merge_ranks_cached(merges)


def _split_specials(text: str, special_tokens: tuple[str, ...]):
    """Yield (is_special, segment) pairs, matching specials atomically,
    longest first."""
    if not special_tokens:
        yield (False, text)
        return
    ordered = sorted(special_tokens, key=len, reverse=True)
    pos = 0
    while pos < len(text):
        nearest = None
        for s in ordered:
            idx = text.find(s, pos)
            if idx != -1 and (nearest is None or idx < nearest[0]):
                nearest = (idx, s)
        if nearest is None:
            yield (False, text[pos:])
            return
        idx, s = nearest
        if idx > pos:
            yield (False, text[pos:idx])
        yield (True, s)
        pos = idx + len(s)


def _split_chinese_boundaries(segment: str):
    """Split a plain-text segment at Chinese/non-Chinese boundaries so
    merges never straddle them."""
    if not segment:
        return
    start = 0
    current = is_chinese(segment[0])
    for i in range(1, len(segment)):
        flag = is_chinese(segment[i])
        if flag != current:
            yield segment[start:i]
            start = i
            current = flag
    yield segment[start:]


def _bpe(seg: bytes, ranks: dict) -> list[bytes]:
    symbols = [bytes([b]) for b in seg]
    while len(symbols) > 1:
        best_rank = None
        best_i = -1
        for i in range(len(symbols) - 1):
            r = ranks.get((symbols[i], symbols[i + 1]))
            if r is not None and (best_rank is None or r < best_rank):
                best_rank = r
                best_i = i
        if best_rank is None:
            break
        symbols[best_i : best_i + 2] = [symbols[best_i] + symbols[best_i + 1]]
    return symbols


def _tokenize(text, entries, id_of, ranks, special_tokens) -> list[int]:
    out: list[int] = []
    offset = 0
    for is_special, segment in _split_specials(text, special_tokens):
        if is_special:
            out.append(id_of[segment.encode("utf-8")])
            offset += len(segment.encode("utf-8"))
            continue
        for run in _split_chinese_boundaries(segment):
            raw = run.encode("utf-8")
            for sym in _bpe(raw, ranks):
                tid = id_of.get(sym)
                if tid is None:
                    # only possible when the base vocab lacks byte tokens
                    raise TokenizationError(
                        f"unrepresentable byte sequence {sym!r} at byte offset {offset}"
                    )
                out.append(tid)
                offset += len(sym)
    return out


def _detokenize(ids, entries) -> str:
    chunks = []
    for tid in ids:
        if tid not in entries:
            raise TokenizationError(f"unknown token id {tid}")
        chunks.append(entries[tid])
    raw = b"".join(chunks)
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise TokenizationError(f"invalid UTF-8 at byte offset {e.start}") from None
