"""Format-accuracy evaluation, length regression, and content judging.

The format harness runs generate -> validate over forms x prompts and
aggregates perfect-match accuracy per cell. The regression quantifies
how accuracy degrades with poem length. Content judging renders a
five-criterion rubric for an external LLM judge, with record/replay so
tests never need a live endpoint.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .decoding import DecodePolicy, GenerationRequest, generate_poem
from .forms import FormRegistry
from .validation import corpus_format_accuracy, validate_poem
from .vocab import PrunedVocabulary

# Published format-accuracy columns (keyword setting), used as fixed
# inputs for the accuracy-vs-length regression. (#chars, accuracy).
CHARPOET_KEYWORD_ACCURACY = [
    (20, 0.98), (40, 0.97), (28, 1.00), (56, 0.97), (33, 1.00),
    (44, 1.00), (46, 0.95), (60, 0.99), (93, 0.95), (114, 0.82),
]
GPT4_KEYWORD_ACCURACY = [
    (20, 0.49), (40, 0.29), (28, 0.88), (56, 0.81), (33, 0.13),
    (44, 0.81), (46, 0.13), (60, 0.21), (93, 0.07), (114, 0.00),
]

CONTENT_CRITERIA = ("fluency", "meaning", "coherence", "relevance", "aesthetics")


class EvalError(RuntimeError):
    pass


@dataclass(frozen=True)
class EvalSetting:
    mode: str  # "keyword" | "instruction"
    prompts: tuple[str, ...]
    forms: tuple[str, ...]

    def __post_init__(self):
        if self.mode not in ("keyword", "instruction"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not self.prompts:
            raise ValueError("prompts must be nonempty")


@dataclass
class TrialRecord:
    form: str
    mode: str
    prompt: str
    poem: str
    passes: bool
    backend_error: str | None = None


@dataclass
class AccuracyTable:
    cells: dict[tuple[str, str], dict] = field(default_factory=dict)
    trials: list[TrialRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "cells": [
                {"form": form, "mode": mode, **cell}
                for (form, mode), cell in self.cells.items()
            ],
            "trials": [vars(t) for t in self.trials],
        }

    def render(self) -> str:
        """Plain-text table: one row per form, one column per mode."""
        modes = sorted({mode for _, mode in self.cells})
        forms = list(dict.fromkeys(form for form, _ in self.cells))
        header = "Format Type".ljust(18) + "".join(m.ljust(14) for m in modes)
        rows = [header]
        for form in forms:
            row = form.ljust(18)
            for mode in modes:
                cell = self.cells.get((form, mode))
                row += (f"{cell['accuracy']:.2f}" if cell else "-").ljust(14)
            rows.append(row)
        return "\n".join(rows)


def load_prompt_list(mode: str) -> tuple[str, ...]:
    """Bundled prompt fixtures: 100 idioms (keyword) or 100 natural
    language instructions. Stand-ins for the original unpublished lists."""
    fname = {"keyword": "idioms_100.txt", "instruction": "instructions_100.txt"}[mode]
    text = resources.files("charpoet.data").joinpath(fname).read_text(encoding="utf-8")
    return tuple(line.strip() for line in text.splitlines() if line.strip())


def run_format_eval(
    setting: EvalSetting,
    backend_factory,
    policy: DecodePolicy,
    pv: PrunedVocabulary,
    registry: FormRegistry,
    count_failures: bool = True,
) -> AccuracyTable:
    """Generate and validate one poem per (form, prompt) pair.

    `backend_factory` is called once per trial (stateful backends) or may
    be a plain backend instance (shared read-only).
    """
    table = AccuracyTable()
    for form_name in setting.forms:
        form = registry.get(form_name)
        reports = []
        for i, prompt in enumerate(setting.prompts):
            backend = backend_factory() if callable(backend_factory) else backend_factory
            trial_policy = policy
            if policy.seed is not None:
                trial_policy = DecodePolicy(
                    strategy=policy.strategy,
                    temperature=policy.temperature,
                    top_p=policy.top_p,
                    max_steps=policy.max_steps,
                    template_enforce=policy.template_enforce,
                    seed=policy.seed + i,
                )
            try:
                result = generate_poem(
                    GenerationRequest(user_prompt=prompt, form=form), backend, trial_policy, pv
                )
                report = validate_poem(result.text, form)
                table.trials.append(
                    TrialRecord(form_name, setting.mode, prompt, result.text, report.passes)
                )
                reports.append(report)
            except Exception as e:
                table.trials.append(
                    TrialRecord(form_name, setting.mode, prompt, "", False, backend_error=str(e))
                )
                if count_failures:
                    reports.append(validate_poem("", form))
        accuracy = corpus_format_accuracy(reports) if reports else 0.0
        table.cells[(form_name, setting.mode)] = {"accuracy": accuracy, "n": len(reports)}
    return table


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r2: float


def fit_accuracy_regression(points: list[tuple[float, float]]) -> RegressionFit:
    """Ordinary least squares of accuracy on character count."""
    if len(points) < 2:
        raise ValueError("need at least two points")
    x = np.array([p[0] for p in points], dtype=np.float64)
    y = np.array([p[1] for p in points], dtype=np.float64)
    if np.all(x == x[0]):
        raise ValueError("degenerate input: all character counts equal")
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return RegressionFit(slope=float(slope), intercept=float(intercept), r2=r2)


# --- content judging ---


@dataclass(frozen=True)
class ContentScores:
    fluency: float
    meaning: float
    coherence: float
    relevance: float
    aesthetics: float

    def __post_init__(self):
        for name in CONTENT_CRITERIA:
            v = getattr(self, name)
            if not (1 <= v <= 5):
                raise ValueError(f"{name} score {v} outside the 5-point scale")


def rubric_prompt(poem: str, user_prompt: str) -> str:
    template = resources.files("charpoet.data").joinpath("judge_rubric.txt").read_text(encoding="utf-8")
    return template.format(poem=poem, user_prompt=user_prompt)


_SCORE_RE = re.compile(r"\d+(?:\.\d+)?")


def _parse_scores(text: str) -> ContentScores:
    values = [float(m) for m in _SCORE_RE.findall(text)]
    if len(values) < 5:
        raise EvalError(f"judge output does not contain five scores: {text!r}")
    return ContentScores(*values[:5])


def judge_content(poem: str, user_prompt: str, judge) -> ContentScores:
    """Score the poem on the five-criterion rubric via `judge.complete`.

    Unparseable output is retried once, then surfaced.
    """
    prompt = rubric_prompt(poem, user_prompt)
    try:
        return _parse_scores(judge.complete(prompt))
    except EvalError:
        return _parse_scores(judge.complete(prompt))


class HttpJudge:
    """Chat-completion client; endpoint and credential come from the
    JUDGE_URL / JUDGE_API_KEY environment variables unless given."""

    def __init__(self, url: str | None = None, api_key: str | None = None, model: str = "gpt-4"):
        self.url = url or os.environ.get("JUDGE_URL", "")
        self.api_key = api_key or os.environ.get("JUDGE_API_KEY", "")
        self.model = model
        if not self.url:
            raise EvalError("no judge endpoint configured (JUDGE_URL)")

    def complete(self, prompt: str) -> str:
        import httpx

        resp = httpx.post(
            self.url,
            json={"model": self.model, "messages": [{"role": "user", "content": prompt}]},
            headers={"Authorization": f"Bearer {self.api_key}"} if self.api_key else {},
            timeout=60.0,
        )
        resp.raise_for_status()
        return resp.json()["choices"][0]["message"]["content"]


class ReplayJudge:
    """Replays recorded transcripts keyed by prompt hash."""

    def __init__(self, cassette_dir: str | Path):
        self.dir = Path(cassette_dir)

    @staticmethod
    def _key(prompt: str) -> str:
        return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]

    def complete(self, prompt: str) -> str:
        path = self.dir / f"{self._key(prompt)}.json"
        if not path.exists():
            raise EvalError(f"no recorded transcript for prompt (expected {path})")
        return json.loads(path.read_text(encoding="utf-8"))["response"]

    def record(self, prompt: str, response: str) -> None:
        self.dir.mkdir(parents=True, exist_ok=True)
        path = self.dir / f"{self._key(prompt)}.json"
        path.write_text(
            json.dumps({"prompt": prompt, "response": response}, ensure_ascii=False, indent=2),
            encoding="utf-8",
        )


class RecordingJudge:
    """Wraps a live judge and records every transcript for replay."""

    def __init__(self, inner, cassette_dir: str | Path):
        self.inner = inner
        self.replay = ReplayJudge(cassette_dir)

    def complete(self, prompt: str) -> str:
        response = self.inner.complete(prompt)
        self.replay.record(prompt, response)
        return response
