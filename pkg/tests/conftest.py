import json

import pytest

from charpoet.bundle import (
    bundled_corpus,
    bundled_ngram_backend,
    bundled_pruned_vocabulary,
    bundled_vocabulary,
)
from charpoet.forms import default_registry
from charpoet.vocab import Vocabulary, encode_token_string, load_vocabulary

# First sample poem shipped with the original demonstration, in the
# Rumengling form; line counts 6,6,5,6,2,2,6.
RUMENGLING_SAMPLE_1 = "笑口频开深院，更说秋风天气。心事向人知，却好兴高采烈。休觅，休觅，酒到不知醒地。"
RUMENGLING_SAMPLE_2 = "生日恰逢今日，母爱万金难拟。恩重更情浓，岁岁同歌同醉。同醉，同醉，寿星高上天际。"
# Li Qingzhao's Rumengling, the canonical example poem for baselines.
RUMENGLING_EXAMPLE = "常记溪亭日暮，沉醉不知归路。兴尽晚回舟，误入藕花深处。争渡，争渡，惊起一滩鸥鹭。"


@pytest.fixture(scope="session")
def vocab():
    return bundled_vocabulary()


@pytest.fixture(scope="session")
def pruned():
    return bundled_pruned_vocabulary()


@pytest.fixture(scope="session")
def registry():
    return default_registry()


@pytest.fixture(scope="session")
def corpus():
    return bundled_corpus()


@pytest.fixture(scope="session")
def ngram_backend():
    return bundled_ngram_backend()


def make_vocab(tokens: dict[str, int], merges: list[tuple[str, str]] = (), specials: list[str] = ()):
    """Build a small Vocabulary from plain strings. Byte tokens 0..255
    are appended automatically after the given ids."""
    doc = {"vocab": {}, "merges": [], "special_tokens": list(specials)}
    for tok, tid in tokens.items():
        doc["vocab"][encode_token_string(tok.encode("utf-8"))] = tid
    next_id = max(tokens.values(), default=-1) + 1
    for b in range(256):
        key = encode_token_string(bytes([b]))
        if key not in doc["vocab"]:
            doc["vocab"][key] = next_id
            next_id += 1
    for left, right in merges:
        doc["merges"].append(
            f"{encode_token_string(left.encode('utf-8'))} {encode_token_string(right.encode('utf-8'))}"
        )
    return load_vocabulary(json.dumps(doc))
