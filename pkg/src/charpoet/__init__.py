"""charpoet: token-free constrained generation for Chinese classical poetry.

Prunes a token-based BPE vocabulary down to character/byte level, masks
long-token logits, builds mask-filling prompts, decodes character by
character against a pluggable backend, and validates the perfect-match
format metric.
"""

from .charclass import CharClass, TokenClass, classify_char, classify_token
from .decoding import (
    DecodePolicy,
    GenerationRequest,
    NgramBackend,
    PoemResult,
    ScriptedBackend,
    StopReason,
    UniformBackend,
    generate_poem,
)
from .forms import FormRegistry, LineSpec, PoemForm, default_registry, load_form_registry, masked_template
from .logitmask import apply_long_token_mask, masked_softmax
from .prompting import build_baseline_prompt, build_generation_prompt
from .validation import ValidationReport, corpus_format_accuracy, split_lines, validate_poem
from .vocab import PrunedVocabulary, Vocabulary, build_long_token_set, load_vocabulary, prune

__version__ = "0.1.0"

__all__ = [
    "CharClass",
    "TokenClass",
    "classify_char",
    "classify_token",
    "DecodePolicy",
    "GenerationRequest",
    "NgramBackend",
    "PoemResult",
    "ScriptedBackend",
    "StopReason",
    "UniformBackend",
    "generate_poem",
    "FormRegistry",
    "LineSpec",
    "PoemForm",
    "default_registry",
    "load_form_registry",
    "masked_template",
    "apply_long_token_mask",
    "masked_softmax",
    "build_baseline_prompt",
    "build_generation_prompt",
    "ValidationReport",
    "corpus_format_accuracy",
    "split_lines",
    "validate_poem",
    "PrunedVocabulary",
    "Vocabulary",
    "build_long_token_set",
    "load_vocabulary",
    "prune",
]
