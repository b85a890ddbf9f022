"""Conv kernel backends and the switch between them.

Two interchangeable implementations of the same two primitives:

- ``cython``: compiled extension, plain vectorizable loops, no BLAS.
- ``numpy``: im2col + GEMM, speed comes from whatever BLAS numpy links.

The active backend is picked lazily from QVC_KERNELS (``auto``, ``cython``
or ``numpy``; default ``auto`` prefers the extension when it compiled).
Both produce identical results up to f64 rounding; the benchmark command
times them against each other.
"""

import os

from quickvc.errors import ConfigError

_EXTENSION_AVAILABLE = None
_ACTIVE = None


def _extension_available() -> bool:
    global _EXTENSION_AVAILABLE
    if _EXTENSION_AVAILABLE is None:
        try:
            from quickvc.kernels import _core  # noqa: F401

            _EXTENSION_AVAILABLE = True
        except ImportError:
            _EXTENSION_AVAILABLE = False
    return _EXTENSION_AVAILABLE


def available_backends() -> tuple:
    """Names of the backends importable in this environment."""
    names = ["numpy"]
    if _extension_available():
        names.insert(0, "cython")
    return tuple(names)


def _resolve(name: str):
    if name == "auto":
        name = "cython" if _extension_available() else "numpy"
    if name == "numpy":
        from quickvc.kernels import _numpy

        return "numpy", _numpy
    if name == "cython":
        if not _extension_available():
            raise ConfigError(
                "kernel backend 'cython' requested but the compiled extension "
                "is not importable; rebuild the package or set QVC_KERNELS=numpy"
            )
        from quickvc.kernels import _cython

        return "cython", _cython
    raise ConfigError(
        f"unknown kernel backend {name!r}; expected auto, cython or numpy"
    )


def set_backend(name: str) -> str:
    """Select a backend by name ('auto', 'cython', 'numpy'). Returns the
    resolved name."""
    global _ACTIVE
    _ACTIVE = _resolve(name)
    return _ACTIVE[0]


def backend():
    """The active backend module (selecting one on first use)."""
    global _ACTIVE
    if _ACTIVE is None:
        _ACTIVE = _resolve(os.environ.get("QVC_KERNELS", "auto"))
    return _ACTIVE[1]


def active_name() -> str:
    backend()
    return _ACTIVE[0]
