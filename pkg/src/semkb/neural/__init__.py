"""Attention-based knowledge-assisted transceiver (PyTorch autograd)."""
from .model import (
    LayerNorm,
    ModelConfig,
    MultiHeadAttention,
    Transceiver,
    cross_entropy_loss,
    logits_loss,
    power_normalize,
)
from .train import (
    Dataset,
    TorchChannel,
    TrainConfig,
    TrainResult,
    TrainingDiverged,
    end_to_end_transmit,
    init_model,
    train,
    transmit_batch,
)
