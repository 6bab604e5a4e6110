"""Character-by-character decoding with long-token masking.

The loop is backend-agnostic: anything that maps a token-id context to a
logit vector over the full vocabulary can drive it. The long-token mask
is always applied before sampling, so no backend or policy can emit more
than one Chinese character per step. Optional strict mode additionally
constrains each step to the form's masked template, which makes the
output well-formed by construction.
"""

from __future__ import annotations

import json
import socket
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from .charclass import DEFAULT_CJK_RANGES, TokenClass, classify_token
from .forms import MASK, PoemForm, masked_template
from .logitmask import DEFAULT_PENALTY, apply_long_token_mask, masked_softmax
from .prompting import EOP, build_generation_prompt
from .vocab import PrunedVocabulary


class DecodeError(RuntimeError):
    pass


class StopReason(Enum):
    EOP = "eop"
    MAX_STEPS = "max_steps"


@dataclass(frozen=True)
class DecodePolicy:
    strategy: str = "temperature"  # greedy | temperature | top_p
    temperature: float = 0.8
    top_p: float = 0.9
    max_steps: int = 0  # 0: derive from the form
    template_enforce: bool = False
    seed: int | None = None

    def __post_init__(self):
        if self.strategy not in ("greedy", "temperature", "top_p"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")
        if not (0 < self.top_p <= 1):
            raise ValueError("top_p must be in (0, 1]")


@dataclass(frozen=True)
class Step:
    position: int
    token_id: int
    prob: float


@dataclass(frozen=True)
class PoemResult:
    text: str
    steps: tuple[Step, ...]
    stop_reason: StopReason


# --- backends ---


class ScriptedBackend:
    """Replays a fixed id sequence: the next scripted id always gets the
    dominant logit. One instance drives one decode session."""

    def __init__(self, pv: PrunedVocabulary, ids: list[int]):
        self.vocab_size = pv.size
        self._ids = list(ids)
        self._base_len: int | None = None

    @classmethod
    def replaying_text(cls, pv: PrunedVocabulary, text: str) -> "ScriptedBackend":
        ids = pv.tokenize(text)
        ids.append(pv.special_id(EOP))
        return cls(pv, ids)

    def logits(self, context: list[int]) -> np.ndarray:
        if self._base_len is None:
            self._base_len = len(context)
        step = len(context) - self._base_len
        out = np.zeros(self.vocab_size)
        if step < len(self._ids):
            out[self._ids[step]] = 100.0
        return out


class UniformBackend:
    """Flat logits: uniform over whatever the masks allow."""

    def __init__(self, vocab_size: int):
        self.vocab_size = vocab_size

    def logits(self, context: list[int]) -> np.ndarray:
        return np.zeros(self.vocab_size)


class NgramBackend:
    """Order-3 interpolated character-level n-gram model with add-k
    smoothing. A desk-scale stand-in for the pruned LLM; quality is not
    comparable, but the decoding contract is identical."""

    ORDER = 3
    K = 0.01
    LAMBDAS = (0.5, 0.3, 0.2)  # trigram, bigram, unigram

    def __init__(self, pv: PrunedVocabulary, corpus: list[str]):
        self.vocab_size = pv.size
        eop = pv.special_id(EOP)
        uni = np.zeros(self.vocab_size)
        bi: dict[int, dict[int, int]] = {}
        tri: dict[tuple[int, int], dict[int, int]] = {}
        for poem in corpus:
            ids = pv.tokenize(poem) + [eop]
            for i, t in enumerate(ids):
                uni[t] += 1
                if i >= 1:
                    bi.setdefault(ids[i - 1], {})[t] = bi.setdefault(ids[i - 1], {}).get(t, 0) + 1
                if i >= 2:
                    key = (ids[i - 2], ids[i - 1])
                    tri.setdefault(key, {})[t] = tri.setdefault(key, {}).get(t, 0) + 1
        self._uni = (uni + self.K) / (uni.sum() + self.K * self.vocab_size)
        self._bi = {k: self._freeze(v) for k, v in bi.items()}
        self._tri = {k: self._freeze(v) for k, v in tri.items()}

    def _freeze(self, counts: dict[int, int]):
        ids = np.fromiter(counts.keys(), dtype=np.int64)
        vals = np.fromiter(counts.values(), dtype=np.float64)
        return ids, vals, vals.sum()

    def _cond(self, table, key) -> np.ndarray:
        entry = table.get(key)
        if entry is None:
            return self._uni
        ids, vals, total = entry
        probs = np.full(self.vocab_size, self.K / (total + self.K * self.vocab_size))
        probs[ids] += vals / (total + self.K * self.vocab_size)
        return probs

    def logits(self, context: list[int]) -> np.ndarray:
        l3, l2, l1 = self.LAMBDAS
        probs = l1 * self._uni
        if len(context) >= 1:
            probs = probs + l2 * self._cond(self._bi, context[-1])
        if len(context) >= 2:
            probs = probs + l3 * self._cond(self._tri, (context[-2], context[-1]))
        return np.log(probs)


class RemoteBackend:
    """Client for the line-delimited JSON backend protocol:
    one request {"context_ids": [...]} per line, one response
    {"logits": [...]} or {"top_k": [[id, logit], ...]} per line."""

    def __init__(self, host: str, port: int, vocab_size: int, timeout: float = 30.0):
        self.vocab_size = vocab_size
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._reader = self._sock.makefile("r", encoding="utf-8")
        self._writer = self._sock.makefile("w", encoding="utf-8")

    @classmethod
    def from_url(cls, url: str, vocab_size: int) -> "RemoteBackend":
        if url.startswith("tcp://"):
            url = url[len("tcp://"):]
        host, _, port = url.rpartition(":")
        return cls(host, int(port), vocab_size)

    def logits(self, context: list[int]) -> np.ndarray:
        self._writer.write(json.dumps({"context_ids": context}) + "\n")
        self._writer.flush()
        line = self._reader.readline()
        if not line:
            raise DecodeError("remote backend closed the connection")
        doc = json.loads(line)
        if "logits" in doc:
            out = np.asarray(doc["logits"], dtype=np.float64)
            if out.shape != (self.vocab_size,):
                raise DecodeError(f"remote backend returned {out.shape[0]} logits, expected {self.vocab_size}")
            return out
        if "top_k" in doc:
            out = np.full(self.vocab_size, -1e4)
            for tid, logit in doc["top_k"]:
                out[tid] = logit
            return out
        raise DecodeError(f"remote backend response missing logits/top_k: {doc}")

    def close(self):
        self._sock.close()


# --- template enforcement ---


@lru_cache(maxsize=4)
def _chinese_utf8_tables(ranges=DEFAULT_CJK_RANGES):
    """Complete UTF-8 encodings of all configured Chinese characters,
    plus the set of their proper byte prefixes."""
    complete = set()
    prefixes = set()
    for lo, hi in ranges:
        for cp in range(lo, hi + 1):
            enc = chr(cp).encode("utf-8")
            complete.add(enc)
            for i in range(1, len(enc)):
                prefixes.add(enc[:i])
    return complete, prefixes


CHAR_SLOT = "char"
LITERAL_SLOT = "literal"


def template_slots(template: str) -> list[tuple[str, str]]:
    """Flatten a masked template into (kind, payload) slots: one CHAR
    slot per [M], one LITERAL slot per punctuation/newline character."""
    slots = []
    i = 0
    while i < len(template):
        if template.startswith(MASK, i):
            slots.append((CHAR_SLOT, ""))
            i += len(MASK)
        else:
            slots.append((LITERAL_SLOT, template[i]))
            i += 1
    return slots


def template_constraint(template: str, position: int):
    """Predicate over (token_bytes, pending_bytes) for the given slot.

    Past the final slot only [EOP] is allowed.
    """
    slots = template_slots(template)
    if position >= len(slots):
        eop_raw = EOP.encode("utf-8")
        return lambda token, pending=b"": token == eop_raw

    kind, payload = slots[position]
    if kind == CHAR_SLOT:
        complete, prefixes = _chinese_utf8_tables()

        def char_ok(token: bytes, pending: bytes = b"") -> bool:
            merged = pending + token
            return merged in complete or merged in prefixes

        return char_ok

    target = payload.encode("utf-8")

    def literal_ok(token: bytes, pending: bytes = b"") -> bool:
        remaining = target[len(pending):]
        return bool(token) and remaining.startswith(token)

    return literal_ok


# per-vocabulary static tables shared by all template sessions
_session_statics: dict[int, tuple] = {}


def _vocab_statics(pv: PrunedVocabulary):
    key = id(pv.base)
    cached = _session_statics.get(key)
    if cached is not None:
        return cached
    _, prefixes = _chinese_utf8_tables()
    short_ids = [(tid, raw) for tid, raw in pv.base.entries.items() if len(raw) <= 8]
    single_chinese = [
        tid
        for tid, raw in pv.base.entries.items()
        if classify_token(raw) is TokenClass.SINGLE_CHINESE
    ]
    char_start = single_chinese + [tid for tid, raw in short_ids if raw in prefixes]
    allowed_cache: dict[tuple, list[int]] = {}
    statics = (short_ids, single_chinese, char_start, allowed_cache)
    _session_statics[key] = statics
    return statics


class TemplateSession:
    """Tracks progress through a masked template during one decode,
    including partial UTF-8 bytes inside a character slot."""

    def __init__(self, pv: PrunedVocabulary, form: PoemForm):
        self.pv = pv
        self.slots = template_slots(masked_template(form))
        self.position = 0
        self.pending = b""
        self._complete, self._prefixes = _chinese_utf8_tables()
        self._eop_id = pv.special_id(EOP)
        (
            self._short_ids,
            self._single_chinese,
            self._char_start,
            self._allowed_cache,
        ) = _vocab_statics(pv)

    def done(self) -> bool:
        return self.position >= len(self.slots)

    def allowed_ids(self) -> list[int]:
        if self.done():
            return [self._eop_id]
        kind, payload = self.slots[self.position]
        if kind == CHAR_SLOT and not self.pending:
            return self._char_start
        key = (kind, payload, self.pending)
        cached = self._allowed_cache.get(key)
        if cached is not None:
            return cached
        if kind == CHAR_SLOT:
            allowed = []
            for tid, raw in self._short_ids:
                merged = self.pending + raw
                if merged in self._complete or merged in self._prefixes:
                    allowed.append(tid)
        else:
            target = payload.encode("utf-8")
            remaining = target[len(self.pending):]
            allowed = [
                tid
                for tid, raw in self._short_ids
                if raw and remaining.startswith(raw)
            ]
        self._allowed_cache[key] = allowed
        return allowed

    def advance(self, token_id: int) -> None:
        if self.done():
            return
        raw = self.pv.base.entries[token_id]
        kind, payload = self.slots[self.position]
        if kind == CHAR_SLOT:
            merged = self.pending + raw
            if merged in self._complete:
                self.position += 1
                self.pending = b""
            else:
                self.pending = merged
        else:
            target = payload.encode("utf-8")
            merged = self.pending + raw
            if merged == target:
                self.position += 1
                self.pending = b""
            else:
                self.pending = merged


# --- sampling ---


def _sample(probs: np.ndarray, policy: DecodePolicy, rng: np.random.Generator) -> int:
    if policy.strategy == "greedy":
        return int(np.argmax(probs))
    if policy.strategy == "top_p":
        order = np.argsort(probs)[::-1]
        cum = np.cumsum(probs[order])
        cutoff = int(np.searchsorted(cum, policy.top_p) + 1)
        keep = order[:cutoff]
        kept = probs[keep] / probs[keep].sum()
        return int(rng.choice(keep, p=kept))
    return int(rng.choice(len(probs), p=probs))


# --- generation loop ---


@dataclass(frozen=True)
class GenerationRequest:
    user_prompt: str
    form: PoemForm


def default_max_steps(form: PoemForm) -> int:
    punct = sum(len(l.trailing_punct) for l in form.lines)
    # chars may take up to 3 byte-level steps each; +newlines +[EOP] +slack
    return form.total_chars * 3 + punct + len(form.lines) + 8


def generate_poem(
    request: GenerationRequest,
    backend,
    policy: DecodePolicy,
    pv: PrunedVocabulary,
    penalty: float = DEFAULT_PENALTY,
) -> PoemResult:
    if backend.vocab_size != pv.size:
        raise DecodeError(
            f"backend vocab size {backend.vocab_size} != vocabulary size {pv.size}"
        )
    prompt = build_generation_prompt(request.user_prompt, request.form)
    context = pv.tokenize(prompt.text)
    eop_id = pv.special_id(EOP)
    max_steps = policy.max_steps or default_max_steps(request.form)
    rng = np.random.default_rng(policy.seed)

    enforcer = TemplateSession(pv, request.form) if policy.template_enforce else None
    generated: list[int] = []
    steps: list[Step] = []
    stop_reason = StopReason.MAX_STEPS

    for step_idx in range(max_steps):
        try:
            logits = np.asarray(backend.logits(context), dtype=np.float64)
        except DecodeError:
            raise
        except Exception as e:
            raise DecodeError(f"backend failed at step {step_idx}: {e}") from e
        logits = apply_long_token_mask(logits, pv.long_set, penalty)

        disallowed = np.zeros(pv.size, dtype=bool)
        if enforcer is not None:
            allowed = enforcer.allowed_ids()
            if not allowed:
                raise DecodeError(f"no token allowed at constrained step {step_idx}")
            disallowed = np.ones(pv.size, dtype=bool)
            disallowed[allowed] = False

        scaled = logits / policy.temperature if policy.strategy != "greedy" else logits
        probs = masked_softmax(scaled, disallowed)
        chosen = _sample(probs, policy, rng)
        steps.append(Step(position=step_idx, token_id=chosen, prob=float(probs[chosen])))
        context.append(chosen)

        if chosen == eop_id:
            stop_reason = StopReason.EOP
            break
        generated.append(chosen)
        if enforcer is not None:
            enforcer.advance(chosen)

    text = pv.detokenize(generated)
    return PoemResult(text=text, steps=tuple(steps), stop_reason=stop_reason)
