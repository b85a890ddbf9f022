"""Signal-processing primitives: FFT, STFT/iSTFT, mel projection, multi-band filters."""

from quickvc.dsp.fft import fft, ifft, irfft, rfft
from quickvc.dsp.mel import mel_filterbank, mel_spectrogram, sr_resize
from quickvc.dsp.multiband import design_synthesis_bank, fir_filter, zero_insert_upsample
from quickvc.dsp.stft import hann_window, istft, linear_magnitude, stft

__all__ = [
    "fft",
    "ifft",
    "rfft",
    "irfft",
    "hann_window",
    "stft",
    "istft",
    "linear_magnitude",
    "mel_filterbank",
    "mel_spectrogram",
    "sr_resize",
    "zero_insert_upsample",
    "fir_filter",
    "design_synthesis_bank",
]
