"""Checkpoint files: text header, little-endian IEEE-754 payload, trailing FNV-1a 64 checksum."""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import torch

from ..metrics import fnv1a_64
from .model import ModelConfig, Transceiver

MAGIC = "semkb-checkpoint 1"
_DTYPES = {"float32": ("<f4", torch.float32), "float64": ("<f8", torch.float64)}


class CheckpointError(ValueError):
    pass


def _fnv_array(data: bytes) -> int:
    # byte-at-a-time FNV is slow in Python; fold 8-byte words instead
    h = 0xCBF29CE484222325
    words = np.frombuffer(data[: len(data) // 8 * 8], dtype="<u8")
    for w in words.tolist():
        h ^= w
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    tail = data[len(data) // 8 * 8 :]
    return fnv1a_64(tail) ^ h if tail else h


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    return str(v)


def dumps(model: Transceiver, meta: dict | None = None) -> bytes:
    params = dict(model.named_parameters())
    names = sorted(params)
    dtype_name = "float64" if next(iter(params.values())).dtype == torch.float64 else "float32"
    np_dtype = _DTYPES[dtype_name][0]
    lines = [MAGIC, f"dtype {dtype_name}"]
    lines += [f"config {k}={_format_value(v)}" for k, v in model.cfg.to_dict().items()]
    lines += [f"meta {k}={_format_value(v)}" for k, v in sorted((meta or {}).items())]
    lines += [f"param {n} {' '.join(str(d) for d in params[n].shape)}" for n in names]
    lines.append("end")
    payload = b"".join(params[n].detach().cpu().numpy().astype(np_dtype).tobytes() for n in names)
    return ("\n".join(lines) + "\n").encode("ascii") + payload + struct.pack("<Q", _fnv_array(payload))


def save(model: Transceiver, path: str | Path, meta: dict | None = None) -> None:
    Path(path).write_bytes(dumps(model, meta))


def _parse_config(items: dict[str, str]) -> ModelConfig:
    types = {f: type(v) for f, v in ModelConfig(vocab_size=2).to_dict().items()}
    kw = {}
    for k, v in items.items():
        t = types.get(k)
        if t is None:
            raise CheckpointError(f"unknown config key {k!r}")
        kw[k] = (v == "1") if t is bool else t(v)
    return ModelConfig(**kw)


def loads(data: bytes) -> tuple[Transceiver, dict[str, str]]:
    end = data.find(b"\nend\n")
    if not data.startswith(MAGIC.encode()) or end < 0:
        raise CheckpointError("not a checkpoint file")
    header = data[:end].decode("ascii").split("\n")
    body = data[end + len(b"\nend\n") :]
    if len(body) < 8:
        raise CheckpointError("truncated checkpoint")
    payload, (checksum,) = body[:-8], struct.unpack("<Q", body[-8:])
    if _fnv_array(payload) != checksum:
        raise CheckpointError("checksum mismatch")
    dtype_name, cfg_items, meta, shapes = None, {}, {}, []
    for line in header[1:]:
        kind, _, rest = line.partition(" ")
        if kind == "dtype":
            dtype_name = rest
        elif kind in ("config", "meta"):
            k, _, v = rest.partition("=")
            (cfg_items if kind == "config" else meta)[k] = v
        elif kind == "param":
            name, *dims = rest.split(" ")
            shapes.append((name, tuple(int(d) for d in dims)))
        else:
            raise CheckpointError(f"bad header line {line!r}")
    if dtype_name not in _DTYPES:
        raise CheckpointError(f"unsupported dtype {dtype_name!r}")
    np_dtype, t_dtype = _DTYPES[dtype_name]
    model = Transceiver(_parse_config(cfg_items)).to(t_dtype)
    params = dict(model.named_parameters())
    if sorted(params) != [n for n, _ in shapes]:
        raise CheckpointError("parameter names do not match the model configuration")
    offset, itemsize = 0, np.dtype(np_dtype).itemsize
    with torch.no_grad():
        for name, shape in shapes:
            if tuple(params[name].shape) != shape:
                raise CheckpointError(f"shape mismatch for {name}")
            count = int(np.prod(shape)) if shape else 1
            chunk = np.frombuffer(payload, dtype=np_dtype, count=count, offset=offset)
            params[name].copy_(torch.from_numpy(chunk.reshape(shape).copy()))
            offset += count * itemsize
    if offset != len(payload):
        raise CheckpointError("payload size does not match header")
    model.eval()
    return model, meta


def load(path: str | Path) -> tuple[Transceiver, dict[str, str]]:
    return loads(Path(path).read_bytes())
