import math

import pytest
import torch
from hypothesis import given
from hypothesis import strategies as st

from semkb import channel as ch
from semkb.corpus import build_vocabulary
from semkb.neural.model import ModelConfig
from semkb.neural.train import (
    NULL_KNOWLEDGE,
    Dataset,
    TorchChannel,
    TrainConfig,
    TrainingDiverged,
    cosine_lr,
    end_to_end_transmit,
    init_model,
    stratified_snrs,
    train,
    transmit_batch,
)


@pytest.fixture(scope="module")
def tiny(desk_sentences):
    sents = desk_sentences[:40]
    vocab = build_vocabulary(sents, 1000)
    return sents, vocab, Dataset.build(sents, vocab, None)


def test_desk_profile():
    c = TrainConfig.desk()
    assert (c.lr, c.batch_size, c.epochs, c.snr_range, c.val_snr_db) == (1.0, 32, 20, (0.0, 10.0), 3.0)
    with pytest.raises(ValueError):
        TrainConfig(snr_range=(5.0, 1.0))


def test_cosine_lr_endpoints():
    assert cosine_lr(1.0, 0, 20, 1e-4) == pytest.approx(1.0)
    assert cosine_lr(1.0, 19, 20, 1e-4) == pytest.approx(1e-4)
    assert cosine_lr(2.0, 5, 11, 0.0) == pytest.approx(1.0)
    assert cosine_lr(0.5, 0, 1, 0.1) == 0.5
    lrs = [cosine_lr(1.0, e, 10, 0.01) for e in range(10)]
    assert all(a >= b for a, b in zip(lrs, lrs[1:]))


@given(st.integers(1, 80), st.integers(0, 2**31 - 1))
def test_stratified_snrs_cover_every_stratum_once(n, seed):
    snrs = stratified_snrs(n, (0.0, 10.0), torch.Generator().manual_seed(seed))
    assert len(snrs) == n
    assert sorted(int(s * n / 10.0) for s in snrs) == list(range(n))


def test_stratified_snrs_are_marginally_uniform():
    gen = torch.Generator().manual_seed(0)
    first = [stratified_snrs(7, (0.0, 10.0), gen)[0] for _ in range(4000)]
    assert abs(sum(first) / len(first) - 5.0) < 0.15
    assert sum(s < 2.5 for s in first) / len(first) == pytest.approx(0.25, abs=0.03)


def test_no_knowledge_dataset_uses_null_entry(tiny):
    _, _, data = tiny
    assert all(k == NULL_KNOWLEDGE for k in data.knowledge)
    assert data.knowledge_index == [-1] * len(data)


def test_channel_identity_at_infinite_snr():
    x = torch.randn(2, 3, 4, 2, dtype=torch.float64)
    for kind in (None, "awgn", "rayleigh", "rician"):
        chan = TorchChannel(kind, torch.Generator().manual_seed(0), snr_db=math.inf)
        assert torch.equal(chan(x), x)


def test_channel_equalization_removes_fading_without_noise():
    x = torch.randn(3, 2, 4, 2, dtype=torch.float64)
    chan = TorchChannel("rayleigh", torch.Generator().manual_seed(0), snr_db=300.0)
    torch.testing.assert_close(chan(x), x, atol=1e-9, rtol=0)


def test_channel_noise_variance():
    x = torch.zeros(400, 50, 4, 2, dtype=torch.float64)
    chan = TorchChannel("awgn", torch.Generator().manual_seed(0), snr_db=3.0)
    y = chan(x)
    power = float((y**2).sum(-1).mean())
    assert power == pytest.approx(10 ** (-0.3), rel=0.01)
    chan = TorchChannel("awgn", torch.Generator().manual_seed(0))
    chan(x)
    assert 0.0 <= chan.last_snr_db <= 10.0


def test_untrained_model_output_length_and_symbols(tiny):
    sents, vocab, _ = tiny
    from semkb import knowledge_base as kbm
    from semkb.metrics import HashedEmbedder

    kb = kbm.build(sents, 0.3, None, HashedEmbedder())
    model = init_model(ModelConfig.desk(len(vocab)), seed=0)
    for s in sents[:5]:
        out, symbols, idx = end_to_end_transmit(model, kb, vocab, s, ch.ChannelConfig("awgn", 6.0),
                                                torch.Generator().manual_seed(1))
        assert len(out) == len(s)
        assert symbols == len(s) * 4
        assert 0 <= idx < len(kb)


def test_float64_training_is_bit_reproducible(tiny):
    _, vocab, data = tiny
    cfg = TrainConfig.desk(epochs=2, dtype="float64", seed=3)
    runs = []
    for _ in range(2):
        model = init_model(ModelConfig.desk(len(vocab)), seed=1, dtype=torch.float64)
        r = train(model, data, cfg, channel_kind="rayleigh", val_data=data)
        runs.append((r.step_loss, r.val_loss, [p.detach().clone() for p in r.model.parameters()]))
    assert runs[0][0] == runs[1][0]
    assert runs[0][1] == runs[1][1]
    assert all(torch.equal(a, b) for a, b in zip(runs[0][2], runs[1][2]))
    csv_text = r.loss_csv().splitlines()
    assert csv_text[0] == "epoch,train_loss,val_loss" and len(csv_text) == 3


def test_nan_parameter_raises_with_state_dump(tiny):
    _, vocab, data = tiny
    model = init_model(ModelConfig.desk(len(vocab)), seed=0)
    with torch.no_grad():
        model.output.bias[0] = float("nan")
    with pytest.raises(TrainingDiverged, match="output.bias"):
        train(model, data, TrainConfig.desk(epochs=1), channel_kind=None)


@pytest.mark.slow
def test_overfit_small_set_noiseless(overfit_run):
    assert overfit_run["result"].step_loss[-1] < 0.05


@pytest.mark.slow
def test_memorized_sentences_round_trip(overfit_run):
    model, data = overfit_run["result"].model, overfit_run["data"]
    out = transmit_batch(model, data.messages, data.knowledge,
                         TorchChannel(None, torch.Generator().manual_seed(0)))
    assert out == data.messages
