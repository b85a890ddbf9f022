"""Network building blocks and the serialized-weights container."""

from quickvc.nn.ops import (
    conv1d,
    conv_transpose1d,
    leaky_relu,
    lstm_forward,
    resblock,
    wn_stack,
)

__all__ = [
    "conv1d",
    "conv_transpose1d",
    "leaky_relu",
    "lstm_forward",
    "resblock",
    "wn_stack",
]
