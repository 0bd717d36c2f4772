"""Seeded random streams.

Every generator in the package draws from a :class:`Stream`, a thin layer over
numpy's Philox-4x64 counter-based bit generator (Salmon et al., Random123).
Only raw 53-bit uniforms are taken from numpy; Gaussian variates use the
Box-Muller transform and permutations use a partial Fisher-Yates shuffle, so a
port that reproduces the Philox uniform stream reproduces every draw here.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


class Stream:
    """A deterministic stream of variates keyed by a 64-bit seed."""

    def __init__(self, seed):
        self.seed = int(seed) & _MASK64
        self._gen = np.random.Generator(np.random.Philox(key=self.seed))

    def uniform(self, size):
        """Uniforms on [0, 1) built from the top 53 bits of each raw word."""
        return self._gen.random(size)

    def normal(self, size):
        """Standard normal variates by Box-Muller, consuming two uniforms per pair."""
        size = int(size)
        half = (size + 1) // 2
        u = self.uniform(2 * half)
        u1 = 1.0 - u[:half]  # (0, 1], keeps log finite
        u2 = u[half:]
        rad = np.sqrt(-2.0 * np.log(u1))
        ang = 2.0 * np.pi * u2
        out = np.empty(2 * half)
        out[0::2] = rad * np.cos(ang)
        out[1::2] = rad * np.sin(ang)
        return out[:size]

    def complex_normal(self, size):
        """Circular complex normal with unit variance (real and imag each N(0, 1/2))."""
        g = self.normal(2 * int(size))
        return (g[0::2] + 1j * g[1::2]) / np.sqrt(2.0)

    def sample_without_replacement(self, n, k):
        """``k`` distinct indices from ``range(n)``, uniformly over ordered k-tuples."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot draw {k} items from {n}")
        pool = np.arange(n)
        u = self.uniform(k)
        for i in range(k):
            j = i + int(u[i] * (n - i))
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k].copy()


def derive_seed(base, *keys):
    """Mix a base seed with integer keys into a new 64-bit seed (splitmix64 finalizer)."""
    x = int(base) & _MASK64
    for key in keys:
        x = (x + 0x9E3779B97F4A7C15 + (int(key) & _MASK64)) & _MASK64
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        x = z ^ (z >> 31)
    return x
