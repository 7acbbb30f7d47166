import pytest
import torch

from semkb.neural import checkpoint
from semkb.neural.model import ModelConfig
from semkb.neural.train import init_model


@pytest.mark.parametrize("dtype", [torch.float32, torch.float64])
def test_round_trip_is_byte_identical(tmp_path, dtype):
    cfg = ModelConfig(vocab_size=30, embed_dim=8, attn_dim=4, n_heads=2, symbols_per_word=3,
                      integration_residual="both", integration_dense=True)
    model = init_model(cfg, seed=4, dtype=dtype)
    meta = {"use_knowledge": True, "seed": 4}
    path = tmp_path / "m.ckpt"
    checkpoint.save(model, path, meta)
    loaded, got_meta = checkpoint.load(path)
    assert loaded.cfg == cfg
    assert got_meta == {"seed": "4", "use_knowledge": "1"}
    for (n1, p1), (n2, p2) in zip(model.named_parameters(), loaded.named_parameters()):
        assert n1 == n2 and p1.dtype == p2.dtype and torch.equal(p1, p2)
    assert checkpoint.dumps(loaded, meta) == path.read_bytes()


def test_header_is_readable_text():
    data = checkpoint.dumps(init_model(ModelConfig(vocab_size=10, embed_dim=4, attn_dim=2, n_heads=1), 0))
    header = data[: data.index(b"\nend\n")].decode("ascii").splitlines()
    assert header[0] == checkpoint.MAGIC and header[1] == "dtype float32"
    names = [line.split()[1] for line in header if line.startswith("param ")]
    assert names == sorted(names)


def test_corruption_detected():
    data = bytearray(checkpoint.dumps(init_model(ModelConfig(vocab_size=10, embed_dim=4, attn_dim=2, n_heads=1), 0)))
    data[-20] ^= 0x01
    with pytest.raises(checkpoint.CheckpointError, match="checksum"):
        checkpoint.loads(bytes(data))
    with pytest.raises(checkpoint.CheckpointError):
        checkpoint.loads(b"garbage")
    with pytest.raises(checkpoint.CheckpointError):
        checkpoint.loads(bytes(data[:-3]))
