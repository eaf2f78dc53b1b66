"""Pure-numpy twin of the compiled kernels in ``_kernels.pyx``."""
import numpy as np

# elements of the phase matrix materialized per chunk
_CHUNK = 1 << 21


def trig_sum(coef, base, x0, points):
    coef = np.ascontiguousarray(coef, dtype=np.complex128)
    points = np.ascontiguousarray(points, dtype=np.float64)
    nrows, nmodes = coef.shape
    out = np.empty((nrows, points.size))
    k = np.arange(nmodes)
    step = max(1, _CHUNK // max(nmodes, 1))
    for start in range(0, points.size, step):
        theta = base * (points[start:start + step] - x0)
        phase = np.exp(1j * np.outer(theta, k))
        out[:, start:start + step] = (phase @ coef.T).real.T
    return out
