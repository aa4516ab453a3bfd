"""Eigenvalue diagnostics of the iteration maps at a computed profile.

Two linearizations matter: the plain fixed-point map, whose spectrum
contains the homogeneity degree p and therefore explains the divergence of
the unstabilized iteration, and the stabilized map, whose construction
moves that eigenvalue to p + q (zero for the optimal exponent) while
leaving the rest of the spectrum in place. Both are exposed matrix-free;
the derivative of the stabilized map is assembled analytically because
finite differencing costs the digits the comparison needs.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur, solve_triangular
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigs

from .errors import NoConvergence
from .iterate import _resolve_exponents, part_factors

__all__ = [
    "DENSE_LIMIT",
    "LinearMap",
    "SpectrumReport",
    "classical_map",
    "petviashvili_map",
    "leading_eigs",
]

# above this dimension the map is never assembled densely
DENSE_LIMIT = 2500


@dataclass(frozen=True)
class LinearMap:
    """A matrix-free linear action on states of a fixed dimension."""

    dimension: int
    matvec: callable


@dataclass(frozen=True)
class SpectrumReport:
    """Leading eigenvalues by magnitude plus their per-pair residual norms.

    requested records the count asked for; one extra entry may be present
    when the cut would have split a complex-conjugate pair.
    """

    requested: int
    eigenvalues: np.ndarray
    residual_norms: np.ndarray

    def magnitudes(self):
        return np.abs(self.eigenvalues)


def classical_map(u, model):
    """Derivative of the plain fixed-point map: v -> solve_L(N'(u) v)."""
    state = np.asarray(u, dtype=float)

    def matvec(v):
        return model.solve_L(model.nonlinear_derivative(state, np.asarray(v, dtype=float)))

    return LinearMap(state.size, matvec)


def petviashvili_map(u, model, stab=None, extended=True):
    """Analytic derivative of the stabilized map at a state.

    Differentiating solve_L(sum_j s_j(u) N_j(u)) splits into the factor
    variations and the nonlinearity variations; every factor is a power of
    the one shared ratio, so its gradient is that power's multiple of a
    single bracket term built from four inner products.
    """
    state = np.asarray(u, dtype=float)
    exponents = _resolve_exponents(stab, model, extended)
    factors = part_factors(state, model, exponents)
    applied = model.apply_L(state)
    full = model.nonlinear(state)
    l_pair = float(np.dot(applied, state))
    n_pair = float(np.dot(full, state))
    part_values = [part.evaluate(state) for part in model.parts]

    def matvec(v):
        probe = np.asarray(v, dtype=float)
        l_probe = model.apply_L(probe)
        derivatives = [part.directional_derivative(state, probe)
                       for part in model.parts]
        total_derivative = derivatives[0]
        for extra in derivatives[1:]:
            total_derivative = total_derivative + extra
        bracket = (
            (float(np.dot(l_probe, state)) + float(np.dot(applied, probe))) / l_pair
            - (float(np.dot(total_derivative, state)) + float(np.dot(full, probe)))
            / n_pair
        )
        rhs = np.zeros_like(state)
        for gamma, s, value, derivative in zip(
            exponents, factors, part_values, derivatives
        ):
            rhs = rhs + (gamma * s * bracket) * value + s * derivative
        return model.solve_L(rhs)

    return LinearMap(state.size, matvec)


def _extend_past_pair(values, take):
    # never cut between a conjugate pair: magnitudes tie, so the partner
    # sits right behind the cut when it is about to be lost
    if (
        take < values.size
        and abs(values[take - 1].imag) > 0.0
        and np.isclose(values[take], np.conj(values[take - 1]), rtol=1e-10, atol=0.0)
    ):
        take += 1
    return take


def _sorted_pairs(values, vectors, count):
    order = np.argsort(-np.abs(values), kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    take = _extend_past_pair(values, min(count, values.size))
    return values[:take], vectors[:, :take]


def _dense_pairs(linmap, count):
    """Leading eigenpairs of a densely assembled map via its Schur form.

    These maps are heavily graded (profile tails decay past 1e-30), and the
    balancing step inside the usual eigensolver trades per-pair residuals in
    the original coordinates for eigenvalue accuracy. The Schur route uses
    orthogonal similarities only, so each extracted pair stays exact for a
    matrix a rounding error away.
    """
    n = linmap.dimension
    basis = np.eye(n)
    dense = np.column_stack([linmap.matvec(basis[:, j]) for j in range(n)])
    form, transform = schur(dense, output="complex")
    diagonal = np.diag(form)
    order = np.argsort(-np.abs(diagonal), kind="stable")
    take = _extend_past_pair(diagonal[order], min(count, n))
    floor = np.finfo(float).eps * max(np.abs(form).max(), 1.0)
    values = []
    vectors = []
    for k in order[:take]:
        lam = diagonal[k]
        coeffs = np.zeros(n, dtype=complex)
        coeffs[k] = 1.0
        if k:
            system = form[:k, :k] - lam * np.eye(k)
            pivots = system.diagonal().copy()
            # repeated eigenvalues make exact zero pivots; nudging them by
            # one rounding unit is the standard back-substitution guard
            weak = np.abs(pivots) < floor
            pivots[weak] = floor
            np.fill_diagonal(system, pivots)
            coeffs[:k] = solve_triangular(system, -form[:k, k])
        vector = transform @ coeffs
        vector /= np.linalg.norm(vector)
        values.append(lam)
        vectors.append(vector)
    return np.array(values), np.column_stack(vectors)


def leading_eigs(linmap, count, seed=0):
    """Largest-magnitude eigenvalues of a LinearMap with residual norms.

    Small maps are assembled densely through their matvec and solved
    exactly; large ones go through restarted Arnoldi on the matrix-free
    action with a seeded random start, so repeated calls agree.
    """
    if count < 1 or count > linmap.dimension:
        raise ValueError("count must lie in [1, dimension]")
    if linmap.dimension <= DENSE_LIMIT:
        values, vectors = _dense_pairs(linmap, count)
    else:
        operator = LinearOperator(
            (linmap.dimension, linmap.dimension),
            matvec=lambda v: linmap.matvec(np.real(v)),
            dtype=float,
        )
        start = np.random.default_rng(seed).standard_normal(linmap.dimension)
        try:
            values, vectors = eigs(
                operator,
                k=count,
                which="LM",
                tol=1e-8,
                ncv=min(linmap.dimension, max(4 * count, 20)),
                v0=start,
            )
        except ArpackNoConvergence as stall:
            achieved = []
            for lam, vec in zip(stall.eigenvalues, stall.eigenvectors.T):
                image = linmap.matvec(np.real(vec)) + 1j * linmap.matvec(np.imag(vec))
                achieved.append(float(np.linalg.norm(image - lam * vec)))
            raise NoConvergence(achieved) from None
        values, vectors = _sorted_pairs(values, vectors, count)
    residuals = np.empty(values.size)
    for j, lam in enumerate(values):
        vec = vectors[:, j]
        if np.iscomplexobj(vec) and np.abs(vec.imag).max() > 0.0:
            image = linmap.matvec(vec.real) + 1j * linmap.matvec(vec.imag)
        else:
            image = linmap.matvec(np.real(vec))
        residuals[j] = float(np.linalg.norm(image - lam * vec))
    return SpectrumReport(
        requested=count, eigenvalues=values, residual_norms=residuals
    )
