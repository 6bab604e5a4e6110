"""HTTP facade: prompt in, poem plus validation report out.

Stateless per request: registries and the vocabulary are shared
read-only, each request runs its own decode session, so concurrent
requests cannot contaminate each other.
"""

from __future__ import annotations

import time

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .decoding import DecodeError, DecodePolicy, GenerationRequest, generate_poem
from .forms import FormRegistry, masked_template
from .validation import validate_poem
from .vocab import PrunedVocabulary

MAX_PROMPT_CHARS = 2000


class GenerateIn(BaseModel):
    prompt: str
    form: str
    strict: bool = False
    seed: int | None = None
    temperature: float = Field(default=0.8, gt=0)


class ValidateIn(BaseModel):
    poem: str
    form: str


def create_app(
    pv: PrunedVocabulary,
    registry: FormRegistry,
    backend_factory,
    max_prompt_chars: int = MAX_PROMPT_CHARS,
    cors_origins: list[str] | None = None,
) -> FastAPI:
    app = FastAPI(title="charpoet")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def resolve_form(name: str):
        if name not in registry:
            raise HTTPException(status_code=400, detail=f"unknown form {name!r}")
        return registry.get(name)

    @app.post("/api/generate")
    def handle_generate(req: GenerateIn):
        form = resolve_form(req.form)
        if not req.prompt:
            raise HTTPException(status_code=400, detail="prompt must be nonempty")
        if len(req.prompt) > max_prompt_chars:
            raise HTTPException(
                status_code=400,
                detail=f"prompt too long ({len(req.prompt)} > {max_prompt_chars} chars)",
            )
        try:
            backend = backend_factory() if callable(backend_factory) else backend_factory
        except Exception as e:
            raise HTTPException(status_code=503, detail=f"backend unavailable: {e}")

        policy = DecodePolicy(
            strategy="temperature",
            temperature=req.temperature,
            template_enforce=req.strict,
            seed=req.seed,
        )
        start = time.monotonic()
        try:
            result = generate_poem(
                GenerationRequest(user_prompt=req.prompt, form=form), backend, policy, pv
            )
        except DecodeError as e:
            raise HTTPException(status_code=422, detail=f"decode failed: {e}")
        elapsed_ms = int((time.monotonic() - start) * 1000)

        report = validate_poem(result.text, form)
        return {
            "poem": result.text,
            "report": report.to_dict(),
            "masked_template": masked_template(form),
            "stop_reason": result.stop_reason.value,
            "timing_ms": elapsed_ms,
        }

    @app.get("/api/forms")
    def handle_forms():
        return [
            {
                "name": f.name,
                "display_name": f.display_name,
                "category": f.category,
                "total_chars": f.total_chars,
                "masked_template": masked_template(f),
            }
            for f in registry
        ]

    @app.post("/api/validate")
    def handle_validate(req: ValidateIn):
        form = resolve_form(req.form)
        return validate_poem(req.poem, form).to_dict()

    return app
