"""Pinned deterministic random number generation.

Model files store seeds instead of matrices, so every random draw in the
package must be regenerable bit-for-bit. This module fixes the generator
once and for all:

* a splitmix64-style counter generator (vectorised over numpy uint64),
* 53-bit uniforms in [0, 1),
* Gaussians via Box-Muller on those uniforms,
* permutations via Fisher-Yates with ``floor(u * i)`` index draws,
* chi(df) draws via a Marsaglia-Tsang gamma sampler on the same stream,
* substream derivation via :func:`derive_seed` so independent consumers
  (ensemble members, stacks, folds) never share a stream.

Nothing here touches ``numpy.random``; all state is local to a
:class:`Stream` instance.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_DERIVE_XOR = 0xA5A5B4B4C3C3D2D2
_DERIVE_STEP = 0xD1B54A32D192ED03

_U_GOLDEN = np.uint64(_GOLDEN)
_U_MIX1 = np.uint64(_MIX1)
_U_MIX2 = np.uint64(_MIX2)
_TWO_NEG53 = 2.0 ** -53


def mix64(z: int) -> int:
    """Splitmix64 finalizer on a Python int, masked to 64 bits."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Seed for substream ``index`` of ``seed``.

    Used for member seeds from the master seed, stack seeds from a member
    seed, and so on. The XOR/step constants differ from the main stream's
    increment so substream seeds never coincide with stream outputs.
    """
    return mix64(((seed & _MASK64) ^ _DERIVE_XOR) + (index + 1) * _DERIVE_STEP)


class Stream:
    """Sequential deterministic random stream.

    Output ``i`` (1-based) is ``mix64(seed + i * golden)``; draws of any
    batch size consume the same underlying sequence, so a given seed always
    yields the same values regardless of how calls are batched (with the
    one pinned exception that ``normals`` consumes uniforms in pairs and
    discards the unused half of an odd final pair).
    """

    def __init__(self, seed: int):
        self._seed = np.uint64(seed & _MASK64)
        self._pos = 0

    def raw(self, n: int) -> np.ndarray:
        """Next ``n`` raw 64-bit outputs as a uint64 array."""
        idx = np.arange(self._pos + 1, self._pos + n + 1, dtype=np.uint64)
        self._pos += n
        z = self._seed + idx * _U_GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _U_MIX1
        z = (z ^ (z >> np.uint64(27))) * _U_MIX2
        return z ^ (z >> np.uint64(31))

    def uniforms(self, n: int) -> np.ndarray:
        """``n`` uniforms in [0, 1) with 53-bit resolution."""
        return (self.raw(n) >> np.uint64(11)).astype(np.float64) * _TWO_NEG53

    def normals(self, n: int) -> np.ndarray:
        """``n`` standard normals via Box-Muller."""
        if n == 0:
            return np.empty(0, dtype=np.float64)
        pairs = (n + 1) // 2
        u = self.uniforms(2 * pairs)
        u1 = u[0::2]
        u2 = u[1::2]
        r = np.sqrt(-2.0 * np.log1p(-u1))
        theta = (2.0 * np.pi) * u2
        out = np.empty(2 * pairs, dtype=np.float64)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:n]

    def rademacher(self, n: int) -> np.ndarray:
        """``n`` independent +/-1 draws (float64)."""
        bit = self.raw(n) >> np.uint64(63)
        return np.where(bit == 0, 1.0, -1.0)

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates permutation of 0..n-1 with floor(u * i) draws."""
        perm = np.arange(n, dtype=np.int64)
        if n <= 1:
            return perm
        u = self.uniforms(n - 1)
        for k, i in enumerate(range(n - 1, 0, -1)):
            j = int(u[k] * (i + 1))
            perm[i], perm[j] = perm[j], perm[i]
        return perm

    def gammas(self, alpha: float, n: int) -> np.ndarray:
        """``n`` Gamma(alpha, 1) draws (Marsaglia-Tsang, rejection)."""
        if n == 0:
            return np.empty(0, dtype=np.float64)
        if alpha < 1.0:
            # boost: Gamma(a) = Gamma(a + 1) * U^(1/a)
            g = self.gammas(alpha + 1.0, n)
            u = self.uniforms(n)
            return g * u ** (1.0 / alpha)
        d = alpha - 1.0 / 3.0
        c = 1.0 / np.sqrt(9.0 * d)
        out = np.empty(n, dtype=np.float64)
        remaining = np.arange(n)
        while remaining.size:
            k = remaining.size
            x = self.normals(k)
            u = self.uniforms(k)
            v = (1.0 + c * x) ** 3
            with np.errstate(divide="ignore", invalid="ignore"):
                ok = (v > 0) & (
                    np.log(u) < 0.5 * x * x + d - d * v + d * np.log(np.where(v > 0, v, 1.0))
                )
            out[remaining[ok]] = d * v[ok]
            remaining = remaining[~ok]
        return out

    def chis(self, df: int, n: int) -> np.ndarray:
        """``n`` chi(df) draws (norm distribution of a df-dim Gaussian)."""
        return np.sqrt(2.0 * self.gammas(df / 2.0, n))
