import json
import socket
import threading

import numpy as np
import pytest

from charpoet.charclass import TokenClass, classify_token
from charpoet.decoding import (
    DecodeError,
    DecodePolicy,
    GenerationRequest,
    RemoteBackend,
    ScriptedBackend,
    StopReason,
    UniformBackend,
    _sample,
    generate_poem,
    template_constraint,
    template_slots,
)
from charpoet.forms import masked_template
from charpoet.validation import validate_poem

from conftest import RUMENGLING_SAMPLE_1


class TestScriptedReplay:
    def test_replays_sample_poem(self, pruned, registry):
        backend = ScriptedBackend.replaying_text(pruned, RUMENGLING_SAMPLE_1)
        policy = DecodePolicy(strategy="greedy")
        result = generate_poem(
            GenerationRequest("write a cheerful poem", registry.get("Rumengling")),
            backend,
            policy,
            pruned,
        )
        assert result.text == RUMENGLING_SAMPLE_1
        assert result.stop_reason is StopReason.EOP

    def test_greedy_is_deterministic(self, pruned, registry):
        texts = set()
        for _ in range(10):
            backend = ScriptedBackend.replaying_text(pruned, RUMENGLING_SAMPLE_1)
            result = generate_poem(
                GenerationRequest("x", registry.get("Rumengling")),
                backend,
                DecodePolicy(strategy="greedy"),
                pruned,
            )
            texts.add(result.text)
        assert texts == {RUMENGLING_SAMPLE_1}

    def test_steps_recorded(self, pruned, registry):
        backend = ScriptedBackend.replaying_text(pruned, RUMENGLING_SAMPLE_1)
        result = generate_poem(
            GenerationRequest("x", registry.get("Rumengling")),
            backend,
            DecodePolicy(strategy="greedy"),
            pruned,
        )
        assert [s.position for s in result.steps] == list(range(len(result.steps)))
        assert all(0 <= s.prob <= 1 for s in result.steps)


class TestEnforcedMode:
    @pytest.mark.parametrize("form_name", ["Wuyanjueju", "Rumengling", "Manjianghong"])
    def test_uniform_backend_always_valid(self, pruned, registry, form_name):
        form = registry.get(form_name)
        backend = UniformBackend(pruned.size)
        policy = DecodePolicy(template_enforce=True, seed=11)
        result = generate_poem(GenerationRequest("春", form), backend, policy, pruned)
        assert result.stop_reason is StopReason.EOP
        assert validate_poem(result.text, form).passes

    def test_ngram_backend_valid(self, pruned, registry, ngram_backend):
        form = registry.get("Qiyanjueju")
        policy = DecodePolicy(template_enforce=True, seed=5)
        result = generate_poem(GenerationRequest("秋", form), backend=ngram_backend, policy=policy, pv=pruned)
        assert validate_poem(result.text, form).passes

    def test_same_seed_same_poem(self, pruned, registry, ngram_backend):
        form = registry.get("Rumengling")
        policy = DecodePolicy(template_enforce=True, seed=99)
        r1 = generate_poem(GenerationRequest("月", form), ngram_backend, policy, pruned)
        r2 = generate_poem(GenerationRequest("月", form), ngram_backend, policy, pruned)
        assert r1.text == r2.text


class TestTokenFreeInvariant:
    @pytest.mark.parametrize("strategy", ["greedy", "temperature", "top_p"])
    def test_no_long_ids_any_policy(self, pruned, registry, ngram_backend, strategy):
        policy = DecodePolicy(strategy=strategy, seed=3)
        result = generate_poem(
            GenerationRequest("春风", registry.get("Wuyanjueju")), ngram_backend, policy, pruned
        )
        for step in result.steps:
            assert step.token_id not in pruned.long_set

    def test_each_step_at_most_one_chinese_char(self, pruned, registry, ngram_backend):
        result = generate_poem(
            GenerationRequest("山", registry.get("Wuyanjueju")),
            ngram_backend,
            DecodePolicy(seed=8),
            pruned,
        )
        for step in result.steps:
            raw = pruned.base.entries[step.token_id]
            assert classify_token(raw) is not TokenClass.LONG


class TestTemplateConstraint:
    def test_char_slot_forbids_punctuation(self, registry):
        template = masked_template(registry.get("Rumengling"))
        ok = template_constraint(template, 0)
        assert ok("笑".encode("utf-8"))
        assert not ok("，".encode("utf-8"))
        assert not ok(b"a")

    def test_literal_slot_requires_exact(self, registry):
        template = masked_template(registry.get("Rumengling"))
        slots = template_slots(template)
        punct_pos = next(i for i, (kind, _) in enumerate(slots) if kind == "literal")
        ok = template_constraint(template, punct_pos)
        assert ok("，".encode("utf-8"))
        assert not ok("。".encode("utf-8"))
        assert not ok("笑".encode("utf-8"))

    def test_terminal_position_only_eop(self, registry):
        template = masked_template(registry.get("Rumengling"))
        ok = template_constraint(template, len(template_slots(template)))
        assert ok(b"[EOP]")
        assert not ok("笑".encode("utf-8"))

    def test_byte_continuations_allowed(self, registry):
        template = masked_template(registry.get("Rumengling"))
        ok = template_constraint(template, 0)
        assert ok(b"\xe7")  # first byte of many CJK chars
        assert ok(b"\xac", pending=b"\xe7")
        assert not ok(b"\xff", pending=b"\xe7")


class TestSampling:
    def test_empirical_frequencies_match(self):
        probs = np.array([0.5, 0.3, 0.15, 0.05])
        rng = np.random.default_rng(123)
        policy = DecodePolicy(strategy="temperature", seed=0)
        n = 10_000
        counts = np.zeros(4)
        for _ in range(n):
            counts[_sample(probs, policy, rng)] += 1
        freqs = counts / n
        sigma = np.sqrt(probs * (1 - probs) / n)
        assert np.all(np.abs(freqs - probs) < 3 * sigma + 1e-12)

    def test_top_p_excludes_tail(self):
        probs = np.array([0.6, 0.35, 0.04, 0.01])
        rng = np.random.default_rng(7)
        policy = DecodePolicy(strategy="top_p", top_p=0.9, seed=0)
        drawn = {_sample(probs, policy, rng) for _ in range(500)}
        assert drawn <= {0, 1}


class TestBackendContract:
    def test_vocab_size_mismatch(self, pruned, registry):
        backend = UniformBackend(pruned.size + 1)
        with pytest.raises(DecodeError, match="vocab size"):
            generate_poem(
                GenerationRequest("x", registry.get("Wuyanjueju")),
                backend,
                DecodePolicy(),
                pruned,
            )

    def test_backend_failure_propagates_step(self, pruned, registry):
        class Exploding:
            vocab_size = pruned.size

            def logits(self, context):
                raise RuntimeError("boom")

        with pytest.raises(DecodeError, match="step 0"):
            generate_poem(
                GenerationRequest("x", registry.get("Wuyanjueju")),
                Exploding(),
                DecodePolicy(),
                pruned,
            )


class TestRemoteBackend:
    def test_line_delimited_protocol(self, pruned):
        server = socket.socket()
        server.bind(("127.0.0.1", 0))
        server.listen(1)
        port = server.getsockname()[1]

        def serve():
            conn, _ = server.accept()
            reader = conn.makefile("r")
            writer = conn.makefile("w")
            for line in reader:
                doc = json.loads(line)
                n = len(doc["context_ids"])
                if n % 2 == 0:
                    writer.write(json.dumps({"logits": [float(n)] * pruned.size}) + "\n")
                else:
                    writer.write(json.dumps({"top_k": [[0, 5.0], [1, 1.0]]}) + "\n")
                writer.flush()

        thread = threading.Thread(target=serve, daemon=True)
        thread.start()

        backend = RemoteBackend("127.0.0.1", port, pruned.size)
        out = backend.logits([1, 2])
        assert out.shape == (pruned.size,)
        assert out[0] == 2.0
        out = backend.logits([1, 2, 3])
        assert out[0] == 5.0 and out[1] == 1.0
        backend.close()
        server.close()
