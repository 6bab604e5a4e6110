"""Long-token logit masking.

Two equivalent routes: `masked_softmax` folds an indicator for the long
token set directly into the softmax, zeroing long-token probabilities
exactly; `apply_long_token_mask` adds a large negative penalty to the
long-token logits so a downstream standard softmax does the same job.
"""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np

DEFAULT_PENALTY = -1e9


class MaskError(ValueError):
    """Raised when every token in the vocabulary is masked out."""


def _mask_array(n: int, long_set) -> np.ndarray:
    """Index iterable or boolean array -> boolean mask of masked-out ids."""
    if isinstance(long_set, np.ndarray) and long_set.dtype == bool:
        return long_set
    mask = np.zeros(n, dtype=bool)
    idx = np.fromiter(long_set, dtype=np.int64, count=-1)
    if idx.size:
        mask[idx] = True
    return mask


def masked_softmax(logits: np.ndarray, long_set: Iterable[int]) -> np.ndarray:
    """Softmax with long-token probabilities forced to exactly zero.

    Stabilized by subtracting the max over allowed indices; raises
    MaskError if no index is allowed.
    """
    logits = np.asarray(logits, dtype=np.float64)
    masked = _mask_array(logits.shape[-1], long_set)
    allowed = ~masked
    if not allowed.any():
        raise MaskError("all tokens masked: empty allowed set")
    shifted = logits - logits[allowed].max()
    weights = np.where(allowed, np.exp(shifted), 0.0)
    return weights / weights.sum()


def apply_long_token_mask(
    logits: np.ndarray, long_set: Iterable[int], penalty: float = DEFAULT_PENALTY
) -> np.ndarray:
    """Return logits with `penalty` added at every long-token index."""
    if penalty > -1e4:
        raise ValueError(f"penalty {penalty} too weak; must be <= -1e4")
    logits = np.asarray(logits, dtype=np.float64)
    out = logits.copy()
    masked = _mask_array(logits.shape[-1], long_set)
    out[masked] += penalty
    return out


def softmax(logits: np.ndarray) -> np.ndarray:
    """Plain stabilized softmax (no masking)."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max()
    weights = np.exp(shifted)
    return weights / weights.sum()
