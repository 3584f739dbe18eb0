import math

import numpy as np
import pytest

from zernlets import DiskPolynomial, dim_v


def brute_radial(n, m, r):
    """Radial polynomial straight from the factorial sum."""
    m = abs(m)
    total = 0.0
    for s in range((n - m) // 2 + 1):
        c = (-1) ** s * math.factorial(n - s)
        c /= math.factorial(s) * math.factorial((n + m) // 2 - s) * math.factorial((n - m) // 2 - s)
        total = total + c * np.asarray(r, dtype=float) ** (n - 2 * s)
    return total


def brute_zernike(n, m, r, phi):
    return math.sqrt((n + 1) / math.pi) * brute_radial(n, m, r) * np.exp(1j * m * np.asarray(phi))


def random_poly(rng, N, real=False):
    J = dim_v(N)
    c = rng.normal(size=J) + 1j * rng.normal(size=J)
    p = DiskPolynomial(N, c)
    if real:
        # symmetrise: c_{n,-m} = conj(c_{n,m})
        from zernlets import index_pack, index_unpack

        d = c.copy()
        for j in range(J):
            n, m = index_unpack(j)
            if m == 0:
                d[j] = c[j].real
            elif m < 0:
                d[j] = np.conj(c[index_pack(n, -m)])
        p = DiskPolynomial(N, d)
    return p


def random_disk_points(rng, k):
    return np.sqrt(rng.uniform(0, 1, k)), rng.uniform(0, 2 * np.pi, k)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
