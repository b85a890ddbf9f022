"""Training objectives, exposed so trained checkpoints can be audited
without a training framework. All inputs are plain arrays; every function
validates finiteness and raises NumericalError on NaN/inf rather than
propagating them into a report.
"""

import numpy as np

from quickvc.errors import NumericalError, ShapeError

_LOG_2PI = np.log(2.0 * np.pi)


def _finite(name, *arrays):
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise NumericalError(f"{name}: non-finite values in input")


def recon_loss(a: np.ndarray, b: np.ndarray) -> float:
    """Mean absolute difference between two equally shaped arrays."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"recon_loss shapes differ: {a.shape} vs {b.shape}")
    _finite("recon_loss", a, b)
    return float(np.mean(np.abs(a - b)))


def gaussian_log_density(z, mean, log_std):
    """Elementwise log N(z; mean, exp(log_std)^2)."""
    z = np.asarray(z, dtype=np.float64)
    mean = np.asarray(mean, dtype=np.float64)
    log_std = np.asarray(log_std, dtype=np.float64)
    return -0.5 * _LOG_2PI - log_std - 0.5 * (z - mean) ** 2 * np.exp(-2.0 * log_std)


def kl_loss(z_q, m_q, logs_q, z_p, m_p, logs_p, logdet: float = 0.0) -> float:
    """Single-sample KL estimate between the posterior and the
    flow-transported prior, averaged per element.

    ``z_q`` is the posterior sample, ``z_p`` its image under the flow,
    ``logdet`` the flow's log-Jacobian along the way:
    ``(log q(z_q) - log p(z_p) - logdet) / N``.
    """
    arrays = [np.asarray(a, dtype=np.float64) for a in (z_q, m_q, logs_q, z_p, m_p, logs_p)]
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        raise ShapeError(f"kl_loss arrays must share one shape, got {sorted(shapes)}")
    _finite("kl_loss", *arrays, np.asarray([logdet]))
    z_q, m_q, logs_q, z_p, m_p, logs_p = arrays
    log_q = np.sum(gaussian_log_density(z_q, m_q, logs_q))
    log_p = np.sum(gaussian_log_density(z_p, m_p, logs_p))
    return float((log_q - log_p - logdet) / z_q.size)


def adv_loss_g(disc_fake: list) -> float:
    """Least-squares generator adversarial loss: each discriminator's fake
    scores are pushed toward 1."""
    if not disc_fake:
        raise ShapeError("adv_loss_g needs at least one discriminator output")
    total = 0.0
    for scores in disc_fake:
        scores = np.asarray(scores, dtype=np.float64)
        _finite("adv_loss_g", scores)
        total += np.mean((scores - 1.0) ** 2)
    return float(total)


def adv_loss_d(disc_real: list, disc_fake: list) -> float:
    """Least-squares discriminator loss: real scores toward 1, fake toward 0."""
    if len(disc_real) != len(disc_fake) or not disc_real:
        raise ShapeError(
            f"adv_loss_d needs matching non-empty lists, got {len(disc_real)} "
            f"real and {len(disc_fake)} fake"
        )
    total = 0.0
    for real, fake in zip(disc_real, disc_fake):
        real = np.asarray(real, dtype=np.float64)
        fake = np.asarray(fake, dtype=np.float64)
        _finite("adv_loss_d", real, fake)
        total += np.mean((real - 1.0) ** 2) + np.mean(fake**2)
    return float(total)


def feature_matching_loss(real_features: list, fake_features: list) -> float:
    """Mean absolute difference between real and fake intermediate
    discriminator features, summed over every layer of every
    discriminator, times 2."""
    if len(real_features) != len(fake_features):
        raise ShapeError("feature lists must pair up per discriminator")
    total = 0.0
    for real_layers, fake_layers in zip(real_features, fake_features):
        if len(real_layers) != len(fake_layers):
            raise ShapeError("feature lists must pair up per layer")
        for r, f in zip(real_layers, fake_layers):
            r = np.asarray(r, dtype=np.float64)
            f = np.asarray(f, dtype=np.float64)
            if r.shape != f.shape:
                raise ShapeError(f"feature shapes differ: {r.shape} vs {f.shape}")
            _finite("feature_matching_loss", r, f)
            total += np.mean(np.abs(r - f))
    return float(2.0 * total)


def generator_total(
    recon: float,
    kl: float,
    adv: float,
    fm: float,
    recon_weight: float = 45.0,
    kl_weight: float = 1.0,
    unweighted: bool = False,
) -> float:
    """Combined generator objective.

    Default applies the reference training weights (reconstruction scaled
    by 45); ``unweighted=True`` sums the four terms as published, which is
    the form audits compare against.
    """
    values = np.asarray([recon, kl, adv, fm], dtype=np.float64)
    _finite("generator_total", values)
    if unweighted:
        return float(values.sum())
    return float(recon_weight * recon + kl_weight * kl + adv + fm)
