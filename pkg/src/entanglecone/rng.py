"""Deterministic random streams for restartable searches.

All stochastic routines in this package draw from SplitMix64 streams
derived from ``(seed, stream index)``. The derivation is a pure
function, so restart ``k`` of a search produces the same vectors no
matter how many worker threads run, in which order they finish, or on
which platform the process runs. That property is what makes the CLI
output byte-identical across runs and thread counts.
"""
from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    """Finalization mix of SplitMix64; bijective on 64-bit words."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Minimal SplitMix64 generator.

    State advances by the golden-ratio increment and each output is the
    finalization mix of the state. Good enough statistical quality for
    restart vectors, and trivially reproducible from a single integer.
    """

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return _mix(self._state)

    def next_float(self) -> float:
        """Uniform draw in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * 2.0 ** -53

    def next_gaussian_pair(self) -> tuple[float, float]:
        """Two independent standard normals via Box-Muller."""
        # 1 - u keeps the argument of log strictly positive.
        u1 = 1.0 - self.next_float()
        u2 = self.next_float()
        r = np.sqrt(-2.0 * np.log(u1))
        return r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)

    def gaussian_vector(self, size: int) -> np.ndarray:
        out = np.empty(size, dtype=np.float64)
        i = 0
        while i < size:
            a, b = self.next_gaussian_pair()
            out[i] = a
            if i + 1 < size:
                out[i + 1] = b
            i += 2
        return out

    def complex_unit_vector(self, dim: int) -> np.ndarray:
        """Haar-like random unit vector in C^dim."""
        re = self.gaussian_vector(dim)
        im = self.gaussian_vector(dim)
        v = re + 1j * im
        return v / np.linalg.norm(v)


def derive_stream(seed: int, index: int) -> SplitMix64:
    """Independent child stream number ``index`` of a master seed.

    child_state = mix(seed XOR mix((index + 1) * gamma)); the double mix
    decorrelates neighbouring indices and neighbouring seeds.
    """
    if index < 0:
        raise ValueError("stream index must be nonnegative")
    child = _mix((seed & _MASK) ^ _mix(((index + 1) * _GAMMA) & _MASK))
    return SplitMix64(child)


def derive_int_seed(seed: int, index: int) -> int:
    """64-bit integer usable as a seed for auxiliary generators."""
    return derive_stream(seed, index).next_u64()


def gaussian_complex_matrix(stream: SplitMix64, rows: int, cols: int) -> np.ndarray:
    re = stream.gaussian_vector(rows * cols).reshape(rows, cols)
    im = stream.gaussian_vector(rows * cols).reshape(rows, cols)
    return (re + 1j * im) / np.sqrt(2.0)


def random_unitary(stream: SplitMix64, n: int) -> np.ndarray:
    """Haar-distributed unitary via QR with the standard phase fix."""
    z = gaussian_complex_matrix(stream, n, n)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_density(stream: SplitMix64, n: int) -> np.ndarray:
    """Random full-rank density matrix (PSD, trace one)."""
    g = gaussian_complex_matrix(stream, n, n)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(stream: SplitMix64, n: int) -> np.ndarray:
    g = gaussian_complex_matrix(stream, n, n)
    return (g + g.conj().T) / 2.0
