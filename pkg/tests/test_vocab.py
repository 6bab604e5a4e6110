import json
from importlib import resources

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from charpoet.charclass import TokenClass, classify_token, count_chinese
from charpoet.vocab import (
    TokenizationError,
    VocabularyError,
    build_long_token_set,
    load_vocabulary,
    prune,
)

from conftest import make_vocab


class TestLoad:
    def test_minimal_file(self):
        v = make_vocab({"us": 0, "er": 1, "user": 2}, merges=[("us", "er")])
        assert v.entries[2] == b"user"
        assert len(v.merges) == 1

    def test_dangling_merge_operand(self):
        doc = {"vocab": {"a": 0, "ab": 1, "b": 2}, "merges": ["a q"], "special_tokens": []}
        with pytest.raises(VocabularyError, match="dangling operand 'q'"):
            load_vocabulary(json.dumps(doc))

    def test_parse_error_reports_position(self):
        with pytest.raises(VocabularyError, match="line"):
            load_vocabulary(b'{"vocab": {')

    def test_duplicate_id_rejected(self):
        doc = {"vocab": {"a": 0, "b": 0}, "merges": []}
        with pytest.raises(VocabularyError, match="duplicate"):
            load_vocabulary(json.dumps(doc))

    def test_fixture_counts_match_manifest(self, vocab):
        # oracle: independent recount of the raw JSON sections
        raw = json.loads(
            resources.files("charpoet.data").joinpath("vocab_5k.json").read_text(encoding="utf-8")
        )
        manifest = json.loads(
            resources.files("charpoet.data").joinpath("vocab_manifest.json").read_text(encoding="utf-8")
        )
        assert len(raw["vocab"]) == manifest["entries"] == len(vocab.entries)
        assert len(raw["merges"]) == manifest["merges"] == len(vocab.merges)


class TestLongTokenSet:
    def test_three_char_token_is_long(self):
        v = make_vocab({"大": 0, "模": 1, "大模型": 2, "大模": 3})
        assert build_long_token_set(v) == {2, 3}

    def test_ascii_vocab_has_none(self):
        v = make_vocab({"us": 0, "er": 1, "user": 2}, merges=[("us", "er")])
        assert build_long_token_set(v) == frozenset()

    def test_specials_excluded(self):
        v = make_vocab({"[M]": 0, "山河": 1}, specials=["[M]"])
        assert build_long_token_set(v) == {1}

    def test_fixture_matches_brute_force_rescan(self, vocab):
        # oracle: classify every entry independently of the builder
        specials = {s.encode("utf-8") for s in vocab.special_tokens}
        expected = set()
        for tid, raw in vocab.entries.items():
            if raw in specials:
                continue
            try:
                text = raw.decode("utf-8")
            except UnicodeDecodeError:
                continue
            n = count_chinese(text)
            if n >= 2 or (n == 1 and len(text) > 1):
                expected.add(tid)
        assert build_long_token_set(vocab) == expected


class TestPrune:
    def test_long_producing_merge_removed(self):
        v = make_vocab({"大": 0, "模": 1, "大模": 2}, merges=[("大", "模")])
        pv = prune(v)
        assert pv.surviving_merges == ()

    def test_ascii_merge_kept(self):
        v = make_vocab({"us": 0, "er": 1, "user": 2, "u": 3, "s": 4, "e": 5, "r": 6},
                       merges=[("u", "s"), ("e", "r"), ("us", "er")])
        pv = prune(v)
        assert (b"us", b"er") in pv.surviving_merges

    def test_transitive_removal(self):
        # the trigram merge depends on the removed bigram result
        v = make_vocab({"大": 0, "模": 1, "型": 2, "大模": 3, "大模型": 4},
                       merges=[("大", "模"), ("大模", "型")])
        pv = prune(v)
        assert pv.surviving_merges == ()

    def test_ids_stable(self, vocab, pruned):
        assert pruned.base.entries is vocab.entries

    def test_fixture_never_emits_long_id(self, pruned, corpus):
        # exhaustive scan oracle over all tokenizer output
        entries = pruned.base.entries
        for poem in corpus:
            for tid in pruned.tokenize(poem):
                assert tid not in pruned.long_set
                assert classify_token(entries[tid]) is not TokenClass.LONG


class TestTokenize:
    def test_long_token_split_to_chars(self, pruned):
        ids = pruned.tokenize("大模型")
        assert [pruned.base.entries[i] for i in ids] == ["大".encode(), "模".encode(), "型".encode()]

    def test_unpruned_emits_the_long_token(self, vocab):
        ids = vocab.tokenize("大模型")
        assert [vocab.entries[i] for i in ids] == ["大模型".encode()]

    def test_empty(self, pruned):
        assert pruned.tokenize("") == []

    def test_roundtrip_fixture_poem(self, pruned):
        text = "母爱万金难拟"
        assert pruned.detokenize(pruned.tokenize(text)) == text

    def test_chinese_char_outside_vocab_falls_back_to_bytes(self, pruned):
        rare = "鬱"  # CJK char absent from the bundled corpus
        ids = pruned.tokenize(rare)
        assert pruned.id_of(rare.encode("utf-8")) is None
        assert len(ids) >= 2  # byte-level fallback
        assert pruned.detokenize(ids) == rare

    def test_special_tokens_atomic(self, pruned):
        ids = pruned.tokenize("[SOP]user\n")
        assert ids[0] == pruned.special_id("[SOP]")

    def test_non_chinese_preservation(self, vocab, pruned):
        for text in ("user assistant", "Fill in all the masks.", "hello, world 123"):
            assert pruned.tokenize(text) == vocab.tokenize(text)

    def test_detokenize_empty(self, pruned):
        assert pruned.detokenize([]) == ""

    def test_lone_continuation_byte_fails(self, pruned):
        cont = pruned.id_of(b"\xa7")
        with pytest.raises(TokenizationError, match="byte offset"):
            pruned.detokenize([cont])

    def test_unknown_id(self, pruned):
        with pytest.raises(TokenizationError, match="unknown token id"):
            pruned.detokenize([10**7])

    @settings(max_examples=50, deadline=None)
    @given(st.text(alphabet="大模型山河user，。 \n兴高采烈", max_size=30))
    def test_roundtrip_property(self, text):
        from charpoet.bundle import bundled_pruned_vocabulary

        pv = bundled_pruned_vocabulary()
        assert pv.detokenize(pv.tokenize(text)) == text

    def test_corpus_tokens_at_most_one_chinese_char(self, pruned, corpus):
        entries = pruned.base.entries
        for poem in corpus[:100]:
            for tid in pruned.tokenize(poem):
                text = entries[tid].decode("utf-8", errors="ignore")
                assert count_chinese(text) <= 1
