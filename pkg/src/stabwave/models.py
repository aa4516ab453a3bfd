"""Discretized traveling-wave problems in fixed-point form L u = N(u).

Seven concrete problems are built here: three two-component long-wave systems
(solitary classical, solitary KdV-KdV, periodic BBM-BBM with integration
constants), single and multi-term Schrodinger ground states, and the 1D/2D
interfacial-wave equations with a Hilbert-transform dispersion term.

States are flat float arrays: two-component 1D states stack the surface and
velocity halves as [eta; u]; 2D states are row-major flattened (x outer,
z inner). The nonlinear side is kept split into homogeneous parts so the
iteration layer can attach one stabilizing exponent per part.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import IncompatibleKind, SingularBlock, SingularOperator, SingularSymbol
from .spectral import Grid1D, Grid2D, wavenumbers, wavenumbers2d

__all__ = [
    "HomogeneousPart",
    "Model",
    "BoussinesqParams",
    "BenjaminParams",
    "boussinesq_solitary",
    "boussinesq_constants",
    "boussinesq_periodic",
    "nls_ground_state",
    "gnls_ground_state",
    "benjamin_1d",
    "benjamin_2d",
    "initial_guess",
    "power",
]

GUESS_KINDS = ("sech2", "gaussian", "kdv_soliton", "kp_lump")


@dataclass(frozen=True)
class HomogeneousPart:
    """One homogeneous term of the nonlinear side.

    degree is the scaling exponent: evaluate(lam*u) = lam**degree * evaluate(u),
    and the directional derivative satisfies the Euler identity
    directional_derivative(u, u) = degree * evaluate(u).
    """

    degree: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    directional_derivative: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def __post_init__(self):
        if abs(self.degree) <= 1:
            raise ValueError("homogeneity degree must satisfy |p| > 1")


@dataclass(frozen=True)
class Model:
    """A discretized problem L u = N(u) with N split into homogeneous parts."""

    name: str
    grid: object
    components: int
    size: int
    parts: tuple
    apply_L: Callable[[np.ndarray], np.ndarray]
    solve_L: Callable[[np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)
    # additive shift restoring original variables for shifted formulations
    offset: Optional[np.ndarray] = None
    # projection onto the constraint subspace, identity when None
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def nonlinear(self, u):
        total = self.parts[0].evaluate(u)
        for part in self.parts[1:]:
            total = total + part.evaluate(u)
        return total

    def nonlinear_derivative(self, u, v):
        total = self.parts[0].directional_derivative(u, v)
        for part in self.parts[1:]:
            total = total + part.directional_derivative(u, v)
        return total

    def residual_norm(self, u):
        return float(np.linalg.norm(self.apply_L(u) - self.nonlinear(u)))

    def reconstruct(self, u):
        return u if self.offset is None else u + self.offset


# ---------------------------------------------------------------------------
# two-component long-wave systems


@dataclass(frozen=True)
class BoussinesqParams:
    """Dispersion coefficients (a, b, c, d) and wave speed for the 2x2 systems.

    The admissible families keep a + b + c + d = 1/3. For the periodic branch
    the two integration constants and the selected constant solution (C1, C2)
    ride along.
    """

    a: float
    b: float
    c: float
    d: float
    speed: float
    K1: float = 0.0
    K2: float = 0.0
    C1: float = 0.0
    C2: float = 0.0

    def __post_init__(self):
        if abs(self.a + self.b + self.c + self.d - 1.0 / 3.0) > 1e-14:
            raise ValueError("coefficients must satisfy a + b + c + d = 1/3")

    @staticmethod
    def classical(speed):
        return BoussinesqParams(0.0, 0.0, 0.0, 1.0 / 3.0, speed)

    @staticmethod
    def kdv_kdv(speed):
        return BoussinesqParams(1.0 / 6.0, 0.0, 1.0 / 6.0, 0.0, speed)

    @staticmethod
    def bbm_bbm(speed, K1=0.0, K2=0.0, C1=0.0, C2=0.0):
        return BoussinesqParams(0.0, 1.0 / 6.0, 0.0, 1.0 / 6.0, speed,
                                K1=K1, K2=K2, C1=C1, C2=C2)


def _boussinesq_blocks(params, grid, C1=0.0, C2=0.0):
    # Per-mode 2x2 blocks of the linear side in transform space. The shifts
    # C1, C2 enter only the zeroth-order entries (they come from linearizing
    # around a constant state, which leaves the dispersive terms alone).
    k2 = wavenumbers(grid) ** 2
    cs = params.speed
    a11 = cs * (1.0 + params.b * k2) - C2
    a12 = -(1.0 - params.a * k2) - C1
    a21 = -(1.0 - params.c * k2)
    a22 = cs * (1.0 + params.d * k2) - C2
    det = a11 * a22 - a12 * a21
    scale = np.maximum.reduce([np.abs(a11), np.abs(a12), np.abs(a21), np.abs(a22)])
    bad = np.abs(det) < 1e-12 * scale ** 2
    if np.any(bad):
        j = int(np.argmax(bad))
        mode = int(round(wavenumbers(grid)[j] * grid.half_length / np.pi))
        raise SingularBlock(mode, float(np.abs(det[j])))
    return a11, a12, a21, a22, det


def _two_component_operator(blocks, m):
    a11, a12, a21, a22, det = blocks

    def apply_L(state):
        e = np.fft.fft(state[:m])
        u = np.fft.fft(state[m:])
        top = np.fft.ifft(a11 * e + a12 * u).real
        bot = np.fft.ifft(a21 * e + a22 * u).real
        return np.concatenate([top, bot])

    def solve_L(state):
        r1 = np.fft.fft(state[:m])
        r2 = np.fft.fft(state[m:])
        e = (a22 * r1 - a12 * r2) / det
        u = (-a21 * r1 + a11 * r2) / det
        return np.concatenate([np.fft.ifft(e).real, np.fft.ifft(u).real])

    return apply_L, solve_L


def _quadratic_pair_part(m):
    # N(eta, u) = (eta*u, u^2/2), degree 2 in the stacked state.
    def evaluate(state):
        eta, u = state[:m], state[m:]
        return np.concatenate([eta * u, 0.5 * u * u])

    def derivative(state, direction):
        eta, u = state[:m], state[m:]
        de, du = direction[:m], direction[m:]
        return np.concatenate([u * de + eta * du, u * du])

    return HomogeneousPart(2, evaluate, derivative)


def boussinesq_solitary(params, grid):
    """Two-component solitary-wave system; per-mode 2x2 block solves."""
    m = grid.points
    blocks = _boussinesq_blocks(params, grid)
    apply_L, solve_L = _two_component_operator(blocks, m)
    return Model(
        name="boussinesq",
        grid=grid,
        components=2,
        size=2 * m,
        parts=(_quadratic_pair_part(m),),
        apply_L=apply_L,
        solve_L=solve_L,
        params={"a": params.a, "b": params.b, "c": params.c, "d": params.d,
                "speed": params.speed},
    )


def boussinesq_constants(K1, K2, speed):
    """All real constant solutions (C1, C2) of the integrated system.

    Eliminating C1 turns the pair of constant equations into a cubic in C2;
    roots come from the companion matrix, polished by one Newton step, and
    each is paired with its C1. Sorted ascending by C2.
    """
    cs = speed
    # coefficients of C2^3/2 - (3/2) cs C2^2 + (cs^2 - 1 + K2) C2 - cs K2 - K1
    poly = np.array([0.5, -1.5 * cs, cs * cs - 1.0 + K2, -cs * K2 - K1])
    roots = np.roots(poly)
    deriv = np.polyder(poly)
    out = []
    for r in roots:
        if abs(r.imag) > 1e-10 * max(1.0, abs(r)):
            continue
        c2 = r.real
        dp = np.polyval(deriv, c2)
        if dp != 0.0:
            c2 = c2 - np.polyval(poly, c2) / dp
        c1 = cs * c2 - 0.5 * c2 * c2 - K2
        out.append((float(c1), float(c2)))
    out.sort(key=lambda pair: pair[1])
    return out


def boussinesq_periodic(params, grid):
    """Shifted two-component system around the constant branch (C1, C2).

    The model iterates in the shifted variables; reconstruct() restores the
    original ones by adding the constants back.
    """
    m = grid.points
    c1, c2 = params.C1, params.C2
    # the selected branch must genuinely solve the constant system
    r1 = params.speed * c1 - c2 - c1 * c2 - params.K1
    r2 = -c1 + params.speed * c2 - 0.5 * c2 * c2 - params.K2
    if max(abs(r1), abs(r2)) > 1e-12 * max(1.0, abs(c1), abs(c2)):
        raise ValueError(
            "constant branch (C1, C2) does not satisfy the constant system "
            "(residuals %.3e, %.3e)" % (abs(r1), abs(r2))
        )
    blocks = _boussinesq_blocks(params, grid, C1=c1, C2=c2)
    apply_L, solve_L = _two_component_operator(blocks, m)
    offset = np.concatenate([np.full(m, c1), np.full(m, c2)])
    return Model(
        name="boussinesq_periodic",
        grid=grid,
        components=2,
        size=2 * m,
        parts=(_quadratic_pair_part(m),),
        apply_L=apply_L,
        solve_L=solve_L,
        params={"a": params.a, "b": params.b, "c": params.c, "d": params.d,
                "speed": params.speed, "K1": params.K1, "K2": params.K2,
                "C1": c1, "C2": c2},
        offset=offset,
    )


# ---------------------------------------------------------------------------
# Schrodinger ground states


def _dense_second_derivative(grid):
    # Assemble the Fourier second-derivative matrix by applying the symbol to
    # the canonical basis; dense because the potential breaks diagonality.
    m = grid.points
    sym = -(wavenumbers(grid) ** 2)
    return np.fft.ifft(sym[:, None] * np.fft.fft(np.eye(m), axis=0), axis=0).real


def _factorized_operator(matrix):
    lu, piv = lu_factor(matrix)
    diag = np.abs(np.diag(lu))
    if diag.min() < 1e-12 * max(1.0, diag.max()):
        raise SingularOperator(
            "operator factorization is rank deficient (pivot ratio %.3e)"
            % (diag.min() / max(1.0, diag.max()))
        )

    def apply_L(u):
        return matrix @ u

    def solve_L(u):
        return lu_solve((lu, piv), u)

    return apply_L, solve_L


def _power_law_part(degree, coefficient):
    # coefficient * |U|^(degree-1) * U restricted to real states
    def evaluate(u):
        return coefficient * np.abs(u) ** (degree - 1) * u

    def derivative(u, v):
        return coefficient * degree * np.abs(u) ** (degree - 1) * v

    return HomogeneousPart(degree, evaluate, derivative)


def nls_ground_state(mu, grid):
    """Cubic ground-state problem with a single sech^2 potential well.

    L = D2 + diag(V) - mu*I with V(x) = 6 sech(x)^2, N(U) = -U^3. The inverse
    is a cached dense factorization; mu must avoid the operator's spectrum.
    """
    x = grid.nodes
    V = 6.0 / np.cosh(x) ** 2
    matrix = _dense_second_derivative(grid) + np.diag(V - mu)
    apply_L, solve_L = _factorized_operator(matrix)
    return Model(
        name="nls",
        grid=grid,
        components=1,
        size=grid.points,
        parts=(_power_law_part(3, -1.0),),
        apply_L=apply_L,
        solve_L=solve_L,
        params={"mu": mu},
    )


def gnls_ground_state(mu, nu, grid):
    """Ground states with two potential wells and three nonlinear terms.

    L = mu*I - D2 + diag(V), V(x) = -3.5 sech(x+1.5)^2 - 3 sech(x-1.5)^2;
    the nonlinear side is |U|^2 U - 0.2 |U|^4 U + nu |U|^6 U, so the
    iteration layer attaches one exponent per degree (3, 5, 7).
    """
    x = grid.nodes
    V = -3.5 / np.cosh(x + 1.5) ** 2 - 3.0 / np.cosh(x - 1.5) ** 2
    matrix = np.diag(mu + V) - _dense_second_derivative(grid)
    apply_L, solve_L = _factorized_operator(matrix)
    parts = (
        _power_law_part(3, 1.0),
        _power_law_part(5, -0.2),
        _power_law_part(7, nu),
    )
    return Model(
        name="gnls",
        grid=grid,
        components=1,
        size=grid.points,
        parts=parts,
        apply_L=apply_L,
        solve_L=solve_L,
        params={"mu": mu, "nu": nu},
    )


# ---------------------------------------------------------------------------
# interfacial waves with Hilbert-transform dispersion


@dataclass(frozen=True)
class BenjaminParams:
    """Coefficients of the 1D equation and the 2D lump variant.

    1D: (alpha - speed) phi - gamma*H(phi') - delta*phi'' + (beta/2) phi^2 = 0
    rearranged to L phi = N(phi). The symbol stays positive iff
    gamma < gamma* = 2 sqrt(delta (alpha - speed)), checked at the vertex.
    2D: only (Gamma, speed) are used.
    """

    speed: float
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 0.0
    delta: float = 1.0
    Gamma: float = 0.0

    def __post_init__(self):
        if self.gamma < 0 or self.Gamma < 0:
            raise ValueError("dispersion strengths must be nonnegative")

    def check_1d(self):
        gap = self.alpha - self.speed
        if gap <= 0:
            raise ValueError("need alpha > speed for a positive symbol")
        gamma_star = 2.0 * np.sqrt(self.delta * gap)
        # vertex of the symbol parabola sits at |kappa| = gamma / (2 delta)
        vertex = gap - self.gamma ** 2 / (4.0 * self.delta)
        if self.gamma >= gamma_star or vertex <= 0:
            raise ValueError(
                "gamma = %g reaches the critical value %g; symbol loses positivity"
                % (self.gamma, gamma_star)
            )


def benjamin_1d(params, grid):
    """Scalar 1D problem with symbol (alpha - speed) - gamma|k| + delta k^2."""
    params.check_1d()
    k = wavenumbers(grid)
    sym = (params.alpha - params.speed) - params.gamma * np.abs(k) \
        + params.delta * k ** 2
    small = np.abs(sym) < 1e-12
    if np.any(small):
        j = int(np.argmax(small))
        raise SingularSymbol(int(round(k[j] * grid.half_length / np.pi)),
                             float(np.abs(sym[j])))

    def apply_L(u):
        return np.fft.ifft(sym * np.fft.fft(u)).real

    def solve_L(u):
        return np.fft.ifft(np.fft.fft(u) / sym).real

    beta = params.beta

    def evaluate(u):
        return -0.5 * beta * u * u

    def derivative(u, v):
        return -beta * u * v

    return Model(
        name="benjamin1d",
        grid=grid,
        components=1,
        size=grid.points,
        parts=(HomogeneousPart(2, evaluate, derivative),),
        apply_L=apply_L,
        solve_L=solve_L,
        params={"speed": params.speed, "alpha": params.alpha, "beta": params.beta,
                "gamma": params.gamma, "delta": params.delta},
    )


def benjamin_2d(params, grid):
    """2D lump problem; diagonal symbol kx^2(cs + 2 Gamma|kx| + kx^2) + kz^2.

    The x-differentiated structure puts the weight kx^2 on the nonlinear
    side as well. The (0,0) mode is not determined by the equation and is
    pinned to zero after every inverse and every nonlinear application.
    """
    if params.speed <= 0:
        raise ValueError("need a positive speed")
    nx, nz = grid.points_x, grid.points_z
    kx, kz = wavenumbers2d(grid)
    abskx = np.abs(kx)
    sym = kx ** 2 * (params.speed + 2.0 * params.Gamma * abskx + kx ** 2) + kz ** 2
    sym_safe = sym.copy()
    sym_safe[0, 0] = 1.0  # excluded mode, value never used
    weight = kx ** 2
    shape = (nx, nz)

    def apply_L(u):
        out = np.fft.ifft2(sym * np.fft.fft2(u.reshape(shape))).real
        return out.ravel()

    def solve_L(u):
        coeffs = np.fft.fft2(u.reshape(shape)) / sym_safe
        coeffs[0, 0] = 0.0
        return np.fft.ifft2(coeffs).real.ravel()

    def evaluate(u):
        eta = u.reshape(shape)
        out = np.fft.ifft2(weight * np.fft.fft2(eta * eta)).real
        return out.ravel()

    def derivative(u, v):
        eta = u.reshape(shape)
        d = v.reshape(shape)
        out = np.fft.ifft2(weight * np.fft.fft2(2.0 * eta * d)).real
        return out.ravel()

    def project(u):
        eta = u.reshape(shape)
        return (eta - eta.mean()).ravel()

    return Model(
        name="benjamin2d",
        grid=grid,
        components=1,
        size=nx * nz,
        parts=(HomogeneousPart(2, evaluate, derivative),),
        apply_L=apply_L,
        solve_L=solve_L,
        params={"speed": params.speed, "Gamma": params.Gamma},
        project=project,
    )


# ---------------------------------------------------------------------------
# seeds and functionals


def _bump_sum(x, centers, amplitude, width, shape):
    total = np.zeros_like(x)
    for c in centers:
        if shape == "sech2":
            total += amplitude / np.cosh(width * (x - c)) ** 2
        else:
            total += amplitude * np.exp(-width * (x - c) ** 2)
    return total


def initial_guess(kind, model, amplitude=1.0, width=1.0, centers=(0.0,)):
    """Build a starting state of the requested kind for the given model.

    sech2 and gaussian are generic localized bumps (a sum over centers);
    kdv_soliton and kp_lump are the closed forms of the zero-dispersion
    limits of the 1D and 2D interfacial problems and read the model's own
    parameters.
    """
    if kind not in GUESS_KINDS:
        raise IncompatibleKind("unknown guess kind %r" % (kind,))
    if kind in ("sech2", "gaussian"):
        if isinstance(model.grid, Grid2D):
            raise IncompatibleKind("%s is a 1D profile" % kind)
        x = model.grid.nodes
        bump = _bump_sum(x, centers, amplitude, width, kind)
        if model.components == 2:
            return np.concatenate([bump, bump])
        return bump
    if kind == "kdv_soliton":
        if model.name != "benjamin1d":
            raise IncompatibleKind("kdv_soliton needs the 1D interfacial model")
        p = model.params
        gap = p["alpha"] - p["speed"]
        x = model.grid.nodes
        # polarity: the quadratic term enters with a minus sign, so the
        # zero-dispersion soliton is a depression wave
        return -3.0 * gap / p["beta"] / np.cosh(np.sqrt(gap / (4.0 * p["delta"])) * x) ** 2
    # kp_lump
    if model.name != "benjamin2d":
        raise IncompatibleKind("kp_lump needs the 2D interfacial model")
    cs = model.params["speed"]
    x = model.grid.axis_x.nodes[:, None]
    z = model.grid.axis_z.nodes[None, :]
    denom = (3.0 + cs * x ** 2 + cs ** 2 * z ** 2) ** 2
    lump = 12.0 * cs * (3.0 + cs ** 2 * z ** 2 - cs * x ** 2) / denom
    return lump.ravel()


def power(u, grid):
    """Discrete squared-norm functional h * sum(u^2) for 1D single fields."""
    return float(grid.spacing * np.sum(np.asarray(u) ** 2))
