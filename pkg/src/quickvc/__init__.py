"""Voice-conversion inference engine with a multi-band iSTFT decoder."""

from quickvc.errors import QvcError

__version__ = "0.1.0"

__all__ = ["QvcError", "__version__"]
