import pytest

from quickvc import kernels
from quickvc.nn.weights import ModelConfig


@pytest.fixture(params=kernels.available_backends())
def backend_name(request):
    """Run the decorated test once per importable kernel backend."""
    prev = kernels.active_name()
    kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(prev)


def make_small_config(**over):
    """A miniature but fully consistent model config for fast tests."""
    base = dict(
        n_fft=64,
        hop_length=40,
        win_length=64,
        mel_bands=8,
        content_dim=12,
        latent_channels=8,
        hidden_channels=8,
        embed_dim=6,
        posterior_layers=2,
        flow_couplings=2,
        flow_wn_layers=2,
        speaker_lstm_hidden=6,
        decoder_base_channels=16,
        upsample_scales=(5,),
        upsample_kernels=(11,),
        resblock_kernels=(3,),
        resblock_dilations=((1, 2),),
        istft_n_fft=4,
        istft_hop=2,
        subbands=4,
        synthesis_taps=7,
    )
    base.update(over)
    return ModelConfig(**base)
