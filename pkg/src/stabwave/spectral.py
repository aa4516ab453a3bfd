"""Fourier pseudospectral primitives on periodic grids.

Grids live on (-l, l) with a power-of-two number of nodes; transforms use the
unnormalized-forward / (1/m)-inverse convention internally, and every public
contract here is stated normalization-free. Linear constant-coefficient
operators are applied as diagonal multipliers in transform space.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid1D",
    "Grid2D",
    "wavenumbers",
    "wavenumbers2d",
    "apply_multiplier",
    "apply_multiplier2d",
    "hilbert",
    "derivative_symbol",
]


def _check_points(m, label):
    if m < 8 or (m & (m - 1)) != 0:
        raise ValueError("%s must be a power of two >= 8, got %r" % (label, m))


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid x_j = -l + j*h on (-l, l), h = 2l/m."""

    half_length: float
    points: int

    def __post_init__(self):
        if not self.half_length > 0:
            raise ValueError("half_length must be positive")
        _check_points(self.points, "points")

    @property
    def spacing(self):
        return 2.0 * self.half_length / self.points

    @property
    def nodes(self):
        return -self.half_length + self.spacing * np.arange(self.points)


@dataclass(frozen=True)
class Grid2D:
    """Tensor grid of two 1D periodic axes (x and z)."""

    half_length_x: float
    points_x: int
    half_length_z: float
    points_z: int

    def __post_init__(self):
        if not (self.half_length_x > 0 and self.half_length_z > 0):
            raise ValueError("half lengths must be positive")
        _check_points(self.points_x, "points_x")
        _check_points(self.points_z, "points_z")

    @property
    def axis_x(self):
        return Grid1D(self.half_length_x, self.points_x)

    @property
    def axis_z(self):
        return Grid1D(self.half_length_z, self.points_z)


def wavenumbers(grid):
    """Wavenumber vector (pi/l) * p in transform-native order.

    Mode indices run p = 0..m/2-1, -m/2..-1, so multiplying coefficient
    arrays by a function of this vector is index-aligned with the FFT.
    """
    m = grid.points
    modes = np.fft.fftfreq(m) * m
    return (np.pi / grid.half_length) * modes


def wavenumbers2d(grid):
    """Meshed (KX, KZ) wavenumber arrays of shape (points_x, points_z)."""
    kx = wavenumbers(grid.axis_x)
    kz = wavenumbers(grid.axis_z)
    return np.meshgrid(kx, kz, indexing="ij")


def _conjugate_symmetric(sigma):
    m = sigma.shape[0]
    mirrored = sigma[(-np.arange(m)) % m]
    scale = np.max(np.abs(sigma)) or 1.0
    return np.allclose(mirrored, np.conj(sigma), atol=1e-13 * scale, rtol=1e-13)


def apply_multiplier(u, sigma):
    """Return inverse-transform(sigma * forward-transform(u)).

    For real input the multiplier must be conjugate-symmetric so the result
    is real; the (tiny) imaginary residue is then truncated.
    """
    u = np.asarray(u)
    sigma = np.asarray(sigma)
    if u.shape != sigma.shape:
        raise ValueError(
            "length mismatch: state has %d entries, multiplier %d"
            % (u.shape[0], sigma.shape[0])
        )
    if not np.iscomplexobj(u):
        if not _conjugate_symmetric(sigma):
            raise ValueError("multiplier is not conjugate-symmetric on real input")
        return np.fft.ifft(sigma * np.fft.fft(u)).real
    return np.fft.ifft(sigma * np.fft.fft(u))


def apply_multiplier2d(u, sigma):
    """2D analogue of apply_multiplier; tensor-product transforms."""
    u = np.asarray(u)
    if u.shape != sigma.shape:
        raise ValueError("shape mismatch between state %s and multiplier %s"
                         % (u.shape, sigma.shape))
    out = np.fft.ifft2(sigma * np.fft.fft2(u))
    return out.real if not np.iscomplexobj(u) else out


def derivative_symbol(grid, order):
    """(i*kappa)**order with the Nyquist entry zeroed for odd orders.

    The Nyquist mode has no paired partner, so odd symbols are ambiguous
    there; zeroing keeps real states real.
    """
    k = wavenumbers(grid)
    sym = (1j * k) ** order
    if order % 2 == 1:
        sym[grid.points // 2] = 0.0
    return sym


def hilbert(u, grid):
    """Periodic Hilbert transform: multiplier -i*sign(kappa).

    The zero mode and the (unpaired) Nyquist mode map to zero, so applying
    the transform twice negates everything except the mean.
    """
    k = wavenumbers(grid)
    sym = -1j * np.sign(k)
    sym[grid.points // 2] = 0.0
    return apply_multiplier(u, sym)
