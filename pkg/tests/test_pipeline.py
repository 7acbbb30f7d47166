import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semkb import channel as ch
from semkb.classical import ClassicalPipeline, char_frequencies, classical_pipeline, huffman_build
from semkb.classical.source_codes import ALPHABET
from semkb.corpus import detokenize
from semkb.harness.experiments import default_ldpc

HUFF = huffman_build(char_frequencies(["mr president , the committee voted today ."], pseudocount=1.0))
LDPC = default_ldpc()
CONFIGS = [(s, c) for s in ("huffman", "fixed6") for c in ("rs", "ldpc", "none")]
text = st.text(alphabet=st.sampled_from(ALPHABET), min_size=1, max_size=60)


@settings(max_examples=25)
@given(text, st.sampled_from(CONFIGS), st.sampled_from(ch.KINDS))
def test_noiseless_round_trip(sentence, config, kind):
    pipe = ClassicalPipeline(*config, huffman=HUFF, ldpc=LDPC)
    res = pipe.transmit(sentence, ch.ChannelConfig(kind, math.inf), np.random.default_rng(0))
    assert res.text == sentence and res.source_ok


@pytest.mark.parametrize("config", CONFIGS)
def test_symbol_count_accounting(config):
    pipe = ClassicalPipeline(*config, huffman=HUFF, ldpc=LDPC)
    s = "we shall vote on the report tomorrow ."
    coded, _ = pipe.channel_encode(pipe.source_encode(s))
    res = pipe.transmit(s, ch.ChannelConfig("awgn", 20.0), np.random.default_rng(1))
    assert res.symbols == pipe.symbol_count(s) == math.ceil(coded.size / 6)


def test_wrapper_returns_text_and_symbols():
    out, n = classical_pipeline("hello world", "fixed6", "rs", ch.ChannelConfig("awgn", math.inf),
                                np.random.default_rng(0))
    assert out == "hello world" and n == math.ceil(math.ceil(66 / 15) * 21 / 6)


def test_huffman_uses_fewer_symbols_on_desk_corpus(desk_sentences):
    texts = [detokenize(s) for s in desk_sentences]
    huff = huffman_build(char_frequencies(texts, pseudocount=1.0))
    for chan in ("rs", "ldpc"):
        h = np.mean([ClassicalPipeline("huffman", chan, huff, LDPC).symbol_count(t) for t in texts[:300]])
        f = np.mean([ClassicalPipeline("fixed6", chan, huff, LDPC).symbol_count(t) for t in texts[:300]])
        assert h < f


def test_low_snr_garbles_text():
    rng = np.random.default_rng(2)
    pipe = ClassicalPipeline("huffman", "rs", HUFF, LDPC)
    s = "mr president , the committee voted today ."
    outs = [pipe.transmit(s, ch.ChannelConfig("awgn", -3.0), rng).text for _ in range(10)]
    assert all(o != s for o in outs)


def test_configuration_errors():
    with pytest.raises(ValueError):
        ClassicalPipeline("huffman", "rs")
    with pytest.raises(ValueError):
        ClassicalPipeline("fixed6", "ldpc")
    with pytest.raises(ValueError):
        ClassicalPipeline("arith", "rs")
