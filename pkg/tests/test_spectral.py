"""Transform-layer checks: wavenumber layout, multipliers, Hilbert identities."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stabwave.spectral import (
    Grid1D,
    Grid2D,
    apply_multiplier,
    apply_multiplier2d,
    derivative_symbol,
    hilbert,
    wavenumbers,
    wavenumbers2d,
)

# pi/64 evaluated in extended precision, frozen
KAPPA1_L64 = 0.049087385212340516


def grids(min_exp=3, max_exp=8):
    return st.builds(
        Grid1D,
        half_length=st.floats(0.5, 100.0),
        points=st.sampled_from([2 ** e for e in range(min_exp, max_exp + 1)]),
    )


def random_state(grid, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(grid.points)


class TestGrid:
    def test_spacing_consistency(self):
        g = Grid1D(64.0, 1024)
        assert g.spacing * g.points == pytest.approx(2 * g.half_length, abs=1e-12)
        assert g.nodes[0] == -64.0
        assert g.nodes[1] - g.nodes[0] == pytest.approx(g.spacing)

    @pytest.mark.parametrize("bad", [7, 12, 1000, 0, -8])
    def test_rejects_non_power_of_two(self, bad):
        with pytest.raises(ValueError):
            Grid1D(1.0, bad)

    def test_rejects_nonpositive_length(self):
        with pytest.raises(ValueError):
            Grid1D(0.0, 16)

    def test_grid2d_axes(self):
        g = Grid2D(128.0, 512, 64.0, 256)
        assert g.axis_x.points == 512
        assert g.axis_z.half_length == 64.0


class TestWavenumbers:
    def test_unit_scaled_modes(self):
        k = wavenumbers(Grid1D(np.pi, 8))
        assert np.allclose(k, [0, 1, 2, 3, -4, -3, -2, -1], atol=1e-14)

    def test_pi_over_l_scaling(self):
        k = wavenumbers(Grid1D(2 * np.pi, 8))
        assert np.allclose(k, [0, 0.5, 1, 1.5, -2, -1.5, -1, -0.5], atol=1e-14)

    def test_first_mode_l64(self):
        k = wavenumbers(Grid1D(64.0, 16))
        assert k[1] == pytest.approx(KAPPA1_L64, abs=5e-15)

    def test_zero_mode_and_pairing(self):
        g = Grid1D(3.0, 32)
        k = wavenumbers(g)
        assert k[0] == 0.0
        # every mode except Nyquist has its negative present
        for j in range(1, 16):
            assert -k[j] in k

    def test_2d_mesh_shapes(self):
        g = Grid2D(8.0, 16, 4.0, 32)
        kx, kz = wavenumbers2d(g)
        assert kx.shape == kz.shape == (16, 32)
        assert kx[3, 0] == pytest.approx(wavenumbers(g.axis_x)[3])
        assert kz[0, 5] == pytest.approx(wavenumbers(g.axis_z)[5])


class TestApplyMultiplier:
    def test_derivative_of_sine(self):
        g = Grid1D(np.pi, 64)
        x = g.nodes
        out = apply_multiplier(np.sin(x), derivative_symbol(g, 1))
        assert np.max(np.abs(out - np.cos(x))) <= 1e-12

    def test_identity_multiplier(self):
        g = Grid1D(5.0, 32)
        u = random_state(g, 7)
        out = apply_multiplier(u, np.ones(g.points))
        assert np.max(np.abs(out - u)) <= 1e-13

    def test_second_derivative_cos3x(self):
        g = Grid1D(np.pi, 64)
        x = g.nodes
        sym = (1j * wavenumbers(g)) ** 2
        out = apply_multiplier(np.cos(3 * x), sym)
        assert np.max(np.abs(out - (-9.0) * np.cos(3 * x))) <= 1e-11

    def test_length_mismatch_rejected(self):
        g = Grid1D(1.0, 16)
        with pytest.raises(ValueError, match="length mismatch"):
            apply_multiplier(np.zeros(16), np.zeros(8))

    def test_asymmetric_multiplier_rejected_on_real_input(self):
        g = Grid1D(1.0, 16)
        sigma = np.zeros(16, dtype=complex)
        sigma[1] = 1.0  # no conjugate partner at mode -1
        with pytest.raises(ValueError, match="conjugate-symmetric"):
            apply_multiplier(np.ones(16), sigma)

    def test_2d_laplacian_of_plane_wave(self):
        g = Grid2D(np.pi, 32, np.pi, 32)
        kx, kz = wavenumbers2d(g)
        x = g.axis_x.nodes[:, None]
        z = g.axis_z.nodes[None, :]
        u = np.cos(2 * x + 3 * z)
        out = apply_multiplier2d(u, -(kx ** 2 + kz ** 2))
        assert np.max(np.abs(out - (-13.0) * u)) <= 1e-10

    def test_odd_order_symbol_zeroes_nyquist(self):
        g = Grid1D(np.pi, 16)
        sym = derivative_symbol(g, 1)
        assert sym[8] == 0.0
        assert derivative_symbol(g, 2)[8] != 0.0


class TestHilbert:
    def test_single_mode_rotation(self):
        g = Grid1D(np.pi, 64)
        x = g.nodes
        for k in (1, 3, 7):
            out = hilbert(np.cos(k * x), g)
            assert np.max(np.abs(out - np.sin(k * x))) <= 1e-12

    def test_constant_annihilated(self):
        g = Grid1D(2.0, 32)
        out = hilbert(np.full(32, 3.7), g)
        assert np.max(np.abs(out)) <= 1e-13

    def test_double_application_identity(self):
        # H(H(u)) = -u + mean(u) whenever the Nyquist coefficient is zero
        g = Grid1D(4.0, 128)
        rng = np.random.default_rng(3)
        u = rng.standard_normal(g.points)
        coeffs = np.fft.fft(u)
        coeffs[g.points // 2] = 0.0
        u = np.fft.ifft(coeffs).real
        out = hilbert(hilbert(u, g), g)
        expected = -u + np.mean(u)
        assert np.max(np.abs(out - expected)) <= 1e-12 * max(1.0, np.max(np.abs(u)))


@settings(max_examples=30, deadline=None)
@given(grid=grids(), seed=st.integers(0, 2 ** 31))
def test_round_trip(grid, seed):
    u = random_state(grid, seed)
    out = np.fft.ifft(np.fft.fft(u)).real
    assert np.linalg.norm(out - u) <= 1e-13 * max(1.0, np.linalg.norm(u))


@settings(max_examples=30, deadline=None)
@given(grid=grids(), seed=st.integers(0, 2 ** 31))
def test_parseval(grid, seed):
    u = random_state(grid, seed)
    coeffs = np.fft.fft(u)
    lhs = np.sum(u ** 2)
    rhs = np.sum(np.abs(coeffs) ** 2) / grid.points
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, lhs)


@settings(max_examples=20, deadline=None)
@given(grid=grids(min_exp=4, max_exp=7), mode=st.integers(1, 7))
def test_differentiation_is_exact_per_mode(grid, mode):
    # d/dx of a resolved complex exponential multiplies by i*kappa_mode
    k = wavenumbers(grid)
    x = grid.nodes
    u = np.exp(1j * k[mode] * x)
    out = apply_multiplier(u, 1j * k)
    assert np.max(np.abs(out - 1j * k[mode] * u)) <= 1e-10 * max(1.0, abs(k[mode]))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 31))
def test_hilbert_involution_property(seed):
    g = Grid1D(6.0, 64)
    u = random_state(g, seed)
    coeffs = np.fft.fft(u)
    coeffs[g.points // 2] = 0.0
    u = np.fft.ifft(coeffs).real
    twice = hilbert(hilbert(u, g), g)
    assert np.linalg.norm(twice + u - np.mean(u)) <= 1e-11 * max(1.0, np.linalg.norm(u))
