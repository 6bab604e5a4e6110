"""Poem form registry and masked-template rendering.

A form fixes the per-line character counts and trailing punctuation.
The masked template replaces every Chinese character slot with [M] and
keeps punctuation and line breaks as is; it doubles as the format hint
embedded in generation prompts and as the reference for strict decoding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

MASK = "[M]"


class FormError(ValueError):
    """Malformed form registry entry."""


@dataclass(frozen=True)
class LineSpec:
    char_count: int
    trailing_punct: str

    def __post_init__(self):
        if self.char_count < 1:
            raise FormError(f"line char_count must be >= 1, got {self.char_count}")
        if not self.trailing_punct:
            raise FormError("trailing_punct must be nonempty")


@dataclass(frozen=True)
class PoemForm:
    name: str
    category: str  # "SHI" or "CI"
    lines: tuple[LineSpec, ...]
    total_chars: int
    display_name: str = ""

    def __post_init__(self):
        if self.category not in ("SHI", "CI"):
            raise FormError(f"form {self.name!r}: unknown category {self.category!r}")
        if not self.lines:
            raise FormError(f"form {self.name!r}: no lines")
        declared = self.total_chars
        actual = sum(l.char_count for l in self.lines)
        if declared != actual:
            raise FormError(
                f"form {self.name!r}: declared total {declared} != sum of line counts {actual}"
            )

    @property
    def line_counts(self) -> list[int]:
        return [l.char_count for l in self.lines]


@dataclass
class FormRegistry:
    forms: dict[str, PoemForm] = field(default_factory=dict)

    def __iter__(self):
        return iter(self.forms.values())

    def __len__(self):
        return len(self.forms)

    def __contains__(self, name: str) -> bool:
        return name in self.forms

    def get(self, name: str) -> PoemForm:
        try:
            return self.forms[name]
        except KeyError:
            raise FormError(f"unknown form {name!r}") from None

    def names(self) -> list[str]:
        return list(self.forms)


def load_form_registry(source) -> FormRegistry:
    """Parse a registry file: JSON array of
    {name, category, lines: [{n, punct}], total}."""
    if hasattr(source, "read"):
        payload = source.read()
    else:
        payload = source
    if isinstance(payload, bytes):
        payload = payload.decode("utf-8")
    try:
        doc = json.loads(payload)
    except json.JSONDecodeError as e:
        raise FormError(f"registry parse error at line {e.lineno} column {e.colno}: {e.msg}") from None

    registry = FormRegistry()
    for entry in doc:
        form = PoemForm(
            name=entry["name"],
            category=entry["category"],
            lines=tuple(LineSpec(l["n"], l["punct"]) for l in entry["lines"]),
            total_chars=entry["total"],
            display_name=entry.get("display_name", ""),
        )
        if form.name in registry.forms:
            raise FormError(f"duplicate form {form.name!r}")
        registry.forms[form.name] = form
    return registry


def default_registry() -> FormRegistry:
    """The bundled registry, covering the ten standard benchmark forms."""
    data = resources.files("charpoet.data").joinpath("forms.json").read_bytes()
    return load_form_registry(data)


def masked_template(form: PoemForm) -> str:
    """Render the form as lines of [M] runs plus trailing punctuation."""
    return "\n".join(MASK * l.char_count + l.trailing_punct for l in form.lines)
