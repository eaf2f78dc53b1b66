"""Gamma-function based constants shared by the kernel and criteria code."""
import math


def gamma_fn(s: float) -> float:
    """``Gamma(|s-1|/2) / (sqrt(pi) Gamma(s/2))`` for ``s > 0``, ``s != 1``.

    Evaluated through ``lgamma`` so large orders do not overflow.
    """
    s = float(s)
    if not s > 0.0:
        raise ValueError(f"gamma_fn needs s > 0, got {s}")
    if s == 1.0:
        raise ValueError("gamma_fn has a pole at s = 1; use (1-s)*gamma_fn(s) -> 2/pi")
    return math.exp(math.lgamma(abs(s - 1.0) / 2.0) - math.lgamma(s / 2.0)) / math.sqrt(math.pi)


def bessel_normalization(s: float) -> float:
    """Prefactor ``1 / (sqrt(4 pi) Gamma(s/2))`` of the Bessel-potential integral."""
    return math.exp(-math.lgamma(s / 2.0)) / math.sqrt(4.0 * math.pi)
