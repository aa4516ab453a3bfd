"""Session fixtures: the shared 1D benchmark model and its converged run.

Solves are cached at session scope because several suites interrogate the
same converged profile; each solve is a second or less but they add up.
"""

import numpy as np
import pytest

from stabwave.iterate import StoppingConfig, run
from stabwave.models import (
    BoussinesqParams,
    boussinesq_solitary,
    gnls_ground_state,
    initial_guess,
    nls_ground_state,
)
from stabwave.spectral import Grid1D
from stabwave.spectrum import classical_map, leading_eigs, petviashvili_map


@pytest.fixture(scope="session")
def boussinesq_bench():
    grid = Grid1D(64.0, 1024)
    model = boussinesq_solitary(BoussinesqParams.classical(1.3), grid)
    guess = initial_guess("sech2", model)
    return model, guess


@pytest.fixture(scope="session")
def boussinesq_trace(boussinesq_bench):
    model, guess = boussinesq_bench
    trace = run(guess, model, StoppingConfig(tol=1e-13, max_iters=400))
    assert trace.reason == "converged"
    return trace


@pytest.fixture(scope="session")
def boussinesq_profile(boussinesq_bench, boussinesq_trace):
    model, _ = boussinesq_bench
    return model, np.asarray(boussinesq_trace.final_state)


@pytest.fixture(scope="session")
def boussinesq_spectra(boussinesq_profile):
    # dense 2048x2048 eigendecompositions; by far the slowest fixtures, so
    # they are computed once and shared between the unit and acceptance suites
    model, state = boussinesq_profile
    plain = leading_eigs(classical_map(state, model), 8)
    stabilized = leading_eigs(petviashvili_map(state, model), 6)
    return plain, stabilized


@pytest.fixture(scope="session")
def nls13_profile():
    grid = Grid1D(32.0, 512)
    model = nls_ground_state(1.3, grid)
    x = grid.nodes
    # odd two-lobe seed: the bound states here are dipoles with a node at
    # the origin, and a symmetric bump sits in the wrong basin
    guess = (0.7 / np.cosh(0.8 * (x - 0.9)) ** 2
             - 0.7 / np.cosh(0.8 * (x + 0.9)) ** 2)
    # the residual floor of the inverse on this grid sits near 3e-13
    trace = run(guess, model, StoppingConfig(tol=1e-12, max_iters=200))
    assert trace.reason == "converged"
    return model, np.asarray(trace.final_state)


@pytest.fixture(scope="session")
def gnls_plain_trace():
    grid = Grid1D(32.0, 512)
    model = gnls_ground_state(3.281, 0.01247946, grid)
    x = grid.nodes
    # lopsided seed weighted toward the shallower well; a balanced one
    # relaxes onto a different branch with a third of the squared norm
    guess = 1.0 / np.cosh(x + 1.5) ** 2 + 3.0 / np.cosh(x - 1.5) ** 2
    trace = run(guess, model, StoppingConfig(tol=1e-10, max_iters=1200),
                stepper="e_petviashvili")
    assert trace.reason == "converged"
    return model, trace
