"""Perfect-match format validation.

A poem is accurate only if every line has exactly the expected number of
Chinese characters. Punctuation and any non-Chinese characters never
count toward line length, so "！" vs "。" cannot affect the verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .charclass import count_chinese, is_chinese
from .forms import PoemForm

# Sentence-final punctuation that delimits lines, alongside newlines.
DEFAULT_LINE_PUNCT = "，。、；？！"


@dataclass(frozen=True)
class LineResult:
    expected: int
    actual: int
    match: bool


@dataclass(frozen=True)
class ValidationReport:
    passes: bool
    per_line: tuple[LineResult, ...]
    line_count_match: bool
    excess_positions: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "passes": self.passes,
            "line_count_match": self.line_count_match,
            "per_line": [
                {"expected": r.expected, "actual": r.actual, "match": r.match}
                for r in self.per_line
            ],
            "excess_positions": list(self.excess_positions),
        }


def split_lines(poem: str, punct: str = DEFAULT_LINE_PUNCT) -> list[str]:
    """Split on line breaks and sentence-final punctuation; empty
    segments are dropped."""
    lines = []
    current: list[str] = []
    for ch in poem:
        if ch == "\n" or ch in punct:
            if current:
                lines.append("".join(current))
                current = []
        else:
            current.append(ch)
    if current:
        lines.append("".join(current))
    return lines


def extract_poem_lines(text: str, punct: str = DEFAULT_LINE_PUNCT) -> list[str]:
    """Keep only physical lines containing Chinese characters, then split.

    Used when scoring LLM baseline output that wraps the poem in prose
    (titles, translations); off for our own decoder output.
    """
    kept = [ln for ln in text.split("\n") if any(is_chinese(c) for c in ln)]
    return split_lines("\n".join(kept), punct)


def validate_poem(
    poem: str, form: PoemForm, punct: str = DEFAULT_LINE_PUNCT, extract: bool = False
) -> ValidationReport:
    """Compare per-line Chinese character counts against the form.

    Total: malformed input yields passes == False, never an exception.
    """
    lines = extract_poem_lines(poem, punct) if extract else split_lines(poem, punct)
    expected = form.line_counts
    line_count_match = len(lines) == len(expected)

    per_line = []
    excess: list[int] = []
    char_pos = 0
    for i in range(max(len(lines), len(expected))):
        exp = expected[i] if i < len(expected) else 0
        line = lines[i] if i < len(lines) else ""
        act = count_chinese(line)
        per_line.append(LineResult(expected=exp, actual=act, match=(act == exp)))
        # flag trailing surplus characters of over-long lines
        if act > exp:
            seen = 0
            for ch in line:
                if is_chinese(ch):
                    if seen >= exp:
                        excess.append(char_pos + seen)
                    seen += 1
        char_pos += act

    passes = line_count_match and all(r.match for r in per_line)
    return ValidationReport(
        passes=passes,
        per_line=tuple(per_line),
        line_count_match=line_count_match,
        excess_positions=tuple(excess),
    )


def corpus_format_accuracy(reports: list[ValidationReport]) -> float:
    """Fraction of reports that pass."""
    if not reports:
        raise ValueError("cannot compute accuracy of an empty report list")
    return sum(1 for r in reports if r.passes) / len(reports)
