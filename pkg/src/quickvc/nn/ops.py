"""Inference-time network ops on plain float64 arrays.

Activations and structure follow the usual convention for this model
family: conv1d is cross-correlation (kernels not flipped), transposed conv
is its exact adjoint sharing the same weight layout, and the gated stack
is the WaveNet-style tanh/sigmoid residual ladder.

Shapes are single-utterance: (channels, time) everywhere, no batch axis.
"""

import numpy as np

from quickvc import kernels
from quickvc.errors import ConfigError, InvalidArgument, ShapeError


def _check_positive_int(name: str, value, minimum: int = 1) -> int:
    if not isinstance(value, (int, np.integer)) or value < minimum:
        raise InvalidArgument(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def conv1d(
    x: np.ndarray,
    w: np.ndarray,
    bias: np.ndarray | None = None,
    stride: int = 1,
    padding: int = 0,
    dilation: int = 1,
) -> np.ndarray:
    """Cross-correlate (C_in, T) input with (C_out, C_in, K) weights.

    Output length is ``(T + 2*padding - dilation*(K-1) - 1) // stride + 1``.
    """
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if x.ndim != 2 or w.ndim != 3:
        raise ShapeError(
            f"conv1d expects (C_in, T) input and (C_out, C_in, K) weights, "
            f"got {x.shape} and {w.shape}"
        )
    if w.shape[1] != x.shape[0]:
        raise ShapeError(
            f"weight input channels {w.shape[1]} != input channels {x.shape[0]}"
        )
    stride = _check_positive_int("stride", stride)
    dilation = _check_positive_int("dilation", dilation)
    padding = _check_positive_int("padding", padding, minimum=0)
    t_in = x.shape[1]
    k = w.shape[2]
    t_out = (t_in + 2 * padding - dilation * (k - 1) - 1) // stride + 1
    if t_out <= 0:
        raise ShapeError(
            f"conv1d output would be empty: T={t_in}, K={k}, "
            f"stride={stride}, padding={padding}, dilation={dilation}"
        )
    if padding:
        xp = np.zeros((x.shape[0], t_in + 2 * padding))
        xp[:, padding : padding + t_in] = x
    else:
        xp = x
    out = kernels.backend().conv1d_padded(xp, w, stride, dilation, t_out)
    if bias is not None:
        bias = np.asarray(bias, dtype=np.float64)
        if bias.shape != (w.shape[0],):
            raise ShapeError(f"bias shape {bias.shape} != ({w.shape[0]},)")
        out += bias[:, None]
    return out


def conv_transpose1d(
    x: np.ndarray,
    w: np.ndarray,
    bias: np.ndarray | None = None,
    stride: int = 1,
    padding: int = 0,
) -> np.ndarray:
    """Adjoint of conv1d: (C_in, T) input, (C_in, C_out, K) weights.

    Output length is ``(T - 1) * stride - 2*padding + K``; equivalently the
    gradient of conv1d with the same weight tensor, which is what ties the
    upsampling stages to their training-time counterparts.
    """
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if x.ndim != 2 or w.ndim != 3:
        raise ShapeError(
            f"conv_transpose1d expects (C_in, T) input and (C_in, C_out, K) "
            f"weights, got {x.shape} and {w.shape}"
        )
    if w.shape[0] != x.shape[0]:
        raise ShapeError(
            f"weight input channels {w.shape[0]} != input channels {x.shape[0]}"
        )
    stride = _check_positive_int("stride", stride)
    padding = _check_positive_int("padding", padding, minimum=0)
    t_in = x.shape[1]
    k = w.shape[2]
    t_out = (t_in - 1) * stride - 2 * padding + k
    if t_out <= 0:
        raise ShapeError(
            f"conv_transpose1d output would be empty: T={t_in}, K={k}, "
            f"stride={stride}, padding={padding}"
        )
    full = kernels.backend().conv_transpose_full(x, w, stride)
    out = full[:, padding : padding + t_out]
    if bias is not None:
        bias = np.asarray(bias, dtype=np.float64)
        if bias.shape != (w.shape[1],):
            raise ShapeError(f"bias shape {bias.shape} != ({w.shape[1]},)")
        out = out + bias[:, None]
    return np.ascontiguousarray(out)


def leaky_relu(x: np.ndarray, negative_slope: float = 0.1) -> np.ndarray:
    return np.where(x >= 0, x, negative_slope * x)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def wn_stack(
    x: np.ndarray,
    g: np.ndarray | None,
    in_weights: list,
    in_biases: list,
    res_skip_weights: list,
    res_skip_biases: list,
    cond_weight: np.ndarray | None = None,
    cond_bias: np.ndarray | None = None,
    dilation_rate: int = 1,
) -> np.ndarray:
    """Gated dilated residual stack over (hidden, T).

    Layer i applies a dilated conv to 2*hidden channels, adds that layer's
    slice of the conditioning projection, gates with tanh * sigmoid, and
    splits a 1x1 projection into a residual half (added to the running x)
    and a skip half (accumulated into the output). The final layer is skip
    only. ``g`` is a (g_channels, 1) global conditioning column or None.
    """
    n_layers = len(in_weights)
    if n_layers == 0:
        raise InvalidArgument("wn_stack needs at least one layer")
    hidden = x.shape[0]
    if g is not None:
        if cond_weight is None:
            raise ConfigError(
                "conditioning input given but the stack has no conditioning weights"
            )
        cond = conv1d(g, cond_weight, cond_bias)
    else:
        cond = None

    output = np.zeros_like(x)
    for i in range(n_layers):
        dilation = dilation_rate**i
        k = in_weights[i].shape[2]
        pad = (k - 1) * dilation // 2
        x_in = conv1d(x, in_weights[i], in_biases[i], padding=pad, dilation=dilation)
        if cond is not None:
            x_in = x_in + cond[2 * hidden * i : 2 * hidden * (i + 1)]
        acts = np.tanh(x_in[:hidden]) * _sigmoid(x_in[hidden:])
        res_skip = conv1d(acts, res_skip_weights[i], res_skip_biases[i])
        if i < n_layers - 1:
            x = x + res_skip[:hidden]
            output += res_skip[hidden:]
        else:
            output += res_skip
    return output


def resblock(
    x: np.ndarray,
    conv1_weights: list,
    conv1_biases: list,
    conv2_weights: list,
    conv2_biases: list,
    dilations: tuple,
    negative_slope: float = 0.1,
) -> np.ndarray:
    """Residual block: per dilation, lrelu -> dilated conv -> lrelu -> conv,
    added back onto the input. All convs are same-length."""
    if len(conv1_weights) != len(dilations):
        raise ShapeError(
            f"{len(conv1_weights)} first-stage convs for {len(dilations)} dilations"
        )
    for i, d in enumerate(dilations):
        k = conv1_weights[i].shape[2]
        xt = leaky_relu(x, negative_slope)
        xt = conv1d(xt, conv1_weights[i], conv1_biases[i], padding=(k - 1) * d // 2, dilation=d)
        xt = leaky_relu(xt, negative_slope)
        k2 = conv2_weights[i].shape[2]
        xt = conv1d(xt, conv2_weights[i], conv2_biases[i], padding=(k2 - 1) // 2)
        x = x + xt
    return x


def lstm_forward(
    x: np.ndarray,
    w_ih: np.ndarray,
    w_hh: np.ndarray,
    b_ih: np.ndarray,
    b_hh: np.ndarray,
) -> np.ndarray:
    """Single-layer LSTM over (T, features), gate order (input, forget,
    cell, output). Returns the hidden-state sequence (T, hidden)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"lstm_forward expects (T, features), got {x.shape}")
    hidden = w_hh.shape[1]
    if w_ih.shape != (4 * hidden, x.shape[1]) or w_hh.shape != (4 * hidden, hidden):
        raise ShapeError(
            f"inconsistent LSTM shapes: w_ih {w_ih.shape}, w_hh {w_hh.shape}, "
            f"input features {x.shape[1]}"
        )
    gates_x = x @ w_ih.T + b_ih + b_hh
    h = np.zeros(hidden)
    c = np.zeros(hidden)
    out = np.empty((x.shape[0], hidden))
    for t in range(x.shape[0]):
        gates = gates_x[t] + w_hh @ h
        i = _sigmoid(gates[:hidden])
        f = _sigmoid(gates[hidden : 2 * hidden])
        g = np.tanh(gates[2 * hidden : 3 * hidden])
        o = _sigmoid(gates[3 * hidden :])
        c = f * c + i * g
        h = o * np.tanh(c)
        out[t] = h
    return out
