"""Pure-numpy conv backend: im2col + one GEMM per chunk.

Chunking bounds the im2col buffer near 16 MB so large inputs do not blow
the working set; the GEMM itself is delegated to BLAS.
"""

import numpy as np

_CHUNK_BYTES = 16 * 1024 * 1024


def conv1d_padded(xp, w, stride, dilation, t_out):
    """Cross-correlate pre-padded (C, Tp) input with (O, C, K) weights."""
    cout, cin, k = w.shape
    w2 = np.ascontiguousarray(w.transpose(0, 2, 1).reshape(cout, k * cin))
    chunk = max(64, min(t_out, _CHUNK_BYTES // (k * cin * 8)))
    out = np.empty((cout, t_out))
    cols = np.empty((k * cin, chunk))
    for start in range(0, t_out, chunk):
        width = min(chunk, t_out - start)
        cbuf = cols[:, :width]
        for j in range(k):
            off = j * dilation + start * stride
            if stride == 1:
                cbuf[j * cin : (j + 1) * cin] = xp[:, off : off + width]
            else:
                cbuf[j * cin : (j + 1) * cin] = xp[:, off : off + width * stride : stride]
        out[:, start : start + width] = w2 @ cbuf
    return out


def conv_transpose_full(x, w, stride):
    """Scatter adjoint: (C, T) input, (C, O, K) weights, no padding crop."""
    t_in = x.shape[1]
    cout, k = w.shape[1], w.shape[2]
    full = np.zeros((cout, (t_in - 1) * stride + k))
    prod = np.tensordot(w, x, axes=([0], [0]))
    for j in range(k):
        full[:, j : j + (t_in - 1) * stride + 1 : stride] += prod[:, j, :]
    return full
