"""Loaders for the bundled fixtures: vocabulary, poem corpus, and the
n-gram backend trained on them. Everything is cached after first load."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from .decoding import NgramBackend
from .vocab import PrunedVocabulary, Vocabulary, load_vocabulary, prune


def _data(name: str) -> bytes:
    return resources.files("charpoet.data").joinpath(name).read_bytes()


@lru_cache(maxsize=1)
def bundled_vocabulary() -> Vocabulary:
    return load_vocabulary(_data("vocab_5k.json"))


@lru_cache(maxsize=1)
def bundled_pruned_vocabulary() -> PrunedVocabulary:
    return prune(bundled_vocabulary())


@lru_cache(maxsize=1)
def bundled_corpus() -> tuple[str, ...]:
    text = _data("poems_1k.txt").decode("utf-8")
    return tuple(block.strip() for block in text.split("\n\n") if block.strip())


@lru_cache(maxsize=1)
def bundled_ngram_backend() -> NgramBackend:
    return NgramBackend(bundled_pruned_vocabulary(), list(bundled_corpus()))
