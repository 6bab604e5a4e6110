"""Prompt assembly for mask-filling generation and external baselines.

The generation prompt turns poem writing into a mask-filling task: the
user's request plus the form's masked template, wrapped in the
[SOP]/[EOP] piece markers, ending right where the model continues.
"""

from __future__ import annotations

from dataclasses import dataclass

from .forms import PoemForm, masked_template
from .validation import validate_poem

SOP = "[SOP]"
EOP = "[EOP]"

# Mask-filling instruction; the Chinese variant is what a Chinese-facing
# deployment would use, the English one is canonical for tests.
FILL_INSTRUCTION = {
    "en": "Fill in all the masks [M].",
    "zh": "填写所有的[M]。",
}


class PromptError(ValueError):
    pass


@dataclass(frozen=True)
class PromptText:
    text: str

    @property
    def sop_positions(self) -> list[int]:
        return _find_all(self.text, SOP)

    @property
    def eop_positions(self) -> list[int]:
        return _find_all(self.text, EOP)


def _find_all(text: str, marker: str) -> list[int]:
    out, pos = [], text.find(marker)
    while pos != -1:
        out.append(pos)
        pos = text.find(marker, pos + 1)
    return out


def build_generation_prompt(user_prompt: str, form: PoemForm, lang: str = "en") -> PromptText:
    """Mask-filling prompt, ending at the assistant continuation point."""
    if not user_prompt:
        raise PromptError("user prompt must be nonempty")
    text = (
        f"{SOP}user\n"
        f"{FILL_INSTRUCTION[lang]}\n"
        f"{user_prompt}\n"
        f"Output: {masked_template(form)}\n"
        f"{EOP}\n"
        f"{SOP}assistant\n"
    )
    return PromptText(text)


def build_baseline_prompt(form: PoemForm, topic: str, example_poem: str) -> PromptText:
    """Prompt for driving an external token-based baseline: the request,
    a strict character-count instruction, and an example poem of the form."""
    report = validate_poem(example_poem, form)
    if not report.passes:
        counts = [r.actual for r in report.per_line]
        raise PromptError(
            f"example poem does not match form {form.name!r}: "
            f"line counts {counts}, expected {form.line_counts}"
        )
    label = form.display_name or form.name
    text = (
        f"请写一首{label}，主题或要求为“{topic}”。"
        f"请严格按照{label}对每一句话的字数要求，下面给出一个例子：\n"
        f"{example_poem}"
    )
    return PromptText(text)
