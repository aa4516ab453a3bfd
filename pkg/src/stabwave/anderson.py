"""Windowed Anderson mixing around the stabilized fixed-point step.

Both variants combine the same history of states u_i and step images
g_i = sum_j s_j(u_i) N_j(u_i), differing only in how the combination
coefficients are obtained from the residuals f_i = L u_i - g_i: Type-II
minimizes the residual combination in least squares, Type-I projects it
obliquely through the state differences. The next state always comes from
one linear solve, solve_L(g_k - sum_j gamma_j (g_{j+1} - g_j)).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import IllConditioned
from .extrap import _pivoted_lstsq

__all__ = [
    "AndersonConfig",
    "ResidualHistory",
    "aa1_step",
    "aa2_step",
    "alphas_from_gammas",
    "residual",
]

VARIANTS = ("type1", "type2")


@dataclass(frozen=True)
class AndersonConfig:
    variant: str = "type2"
    window: int = 5
    # near convergence the projected system's conditioning legitimately
    # reaches ~1/sqrt(eps); a looser tolerance aborts healthy runs
    rank_tol: float = 1e-16

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError("variant must be one of %r" % (VARIANTS,))
        if not isinstance(self.window, int) or self.window < 1:
            raise ValueError("window must be a positive integer")
        if not (self.rank_tol > 0.0):
            raise ValueError("rank_tol must be positive")


@dataclass
class ResidualHistory:
    """Raw recent states, step images, and residuals for one solve.

    Differences are recomputed per step from the raw entries; for windows
    this small that costs nothing and avoids incremental drift. The last
    solved coefficients are kept for diagnostics only.
    """

    states: list = field(default_factory=list)
    images: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    last_gamma: np.ndarray = None
    last_alpha: np.ndarray = None
    last_objective: float = float("nan")

    def push(self, state, image, resid):
        self.states.append(np.asarray(state, dtype=float))
        self.images.append(np.asarray(image, dtype=float))
        self.residuals.append(np.asarray(resid, dtype=float))

    def trim(self, window):
        # keep window + 1 entries: enough for window difference columns
        while len(self.states) > window + 1:
            self.states.pop(0)
            self.images.pop(0)
            self.residuals.pop(0)

    def __len__(self):
        return len(self.states)


def residual(u, model, stab=None):
    """Stabilized residual L u - sum_j s_j(u) N_j(u) at a state."""
    from .iterate import stabilized_rhs

    state = np.asarray(u, dtype=float)
    return model.apply_L(state) - stabilized_rhs(state, model, stab)


def alphas_from_gammas(gammas):
    """Map combination coefficients to the affine weights, which sum to 1."""
    g = np.asarray(gammas, dtype=float)
    alphas = np.empty(g.size + 1)
    alphas[0] = g[0] if g.size else 1.0
    for i in range(1, g.size):
        alphas[i] = g[i] - g[i - 1]
    alphas[-1] = 1.0 - (g[-1] if g.size else 0.0)
    return alphas


def _window_columns(history, count):
    # newest `count` consecutive differences of each stored sequence
    take = len(history) - 1 - count
    dres = [history.residuals[i + 1] - history.residuals[i]
            for i in range(take, len(history) - 1)]
    dimg = [history.images[i + 1] - history.images[i]
            for i in range(take, len(history) - 1)]
    dsta = [history.states[i + 1] - history.states[i]
            for i in range(take, len(history) - 1)]
    return dres, dimg, dsta


def _apply_combination(history, gammas, dimg, model):
    rhs = history.images[-1].copy()
    for g, column in zip(gammas, dimg):
        rhs -= g * column
    return model.solve_L(rhs)


def aa2_step(history, model, config):
    """Type-II step: least-squares residual combination.

    A rank-deficient residual-difference matrix truncates its oldest columns
    and retries; with every column gone the step degrades to the plain
    stabilized step, never to a failure.
    """
    available = min(config.window, len(history) - 1)
    f_latest = history.residuals[-1]
    while available > 0:
        dres, dimg, _ = _window_columns(history, available)
        matrix = np.stack(dres, axis=1)
        gammas, rank = _pivoted_lstsq(matrix, f_latest, rank_tol=config.rank_tol)
        if rank == available:
            history.last_gamma = gammas
            history.last_alpha = alphas_from_gammas(gammas)
            history.last_objective = float(
                np.linalg.norm(matrix @ gammas - f_latest))
            return _apply_combination(history, gammas, dimg, model)
        available -= 1
    history.last_gamma = np.zeros(0)
    history.last_alpha = alphas_from_gammas(np.zeros(0))
    history.last_objective = float(np.linalg.norm(f_latest))
    return model.solve_L(history.images[-1])


def aa1_step(history, model, config):
    """Type-I step: oblique projection through the state differences.

    The projected system is square; when its conditioning passes the gate it
    is solved directly, otherwise the failure surfaces as IllConditioned as
    observed behavior rather than being repaired silently.
    """
    available = min(config.window, len(history) - 1)
    f_latest = history.residuals[-1]
    if available == 0:
        history.last_gamma = np.zeros(0)
        history.last_alpha = alphas_from_gammas(np.zeros(0))
        history.last_objective = float(np.linalg.norm(f_latest))
        return model.solve_L(history.images[-1])
    dres, dimg, dsta = _window_columns(history, available)
    fmat = np.stack(dres, axis=1)
    hmat = np.stack(dsta, axis=1)
    system = hmat.T @ fmat
    singvals = np.linalg.svd(system, compute_uv=False)
    if singvals[0] == 0.0 or singvals[-1] < config.rank_tol * singvals[0]:
        estimate = np.inf if singvals[-1] == 0.0 else singvals[0] / singvals[-1]
        raise IllConditioned(float(estimate))
    gammas = np.linalg.solve(system, hmat.T @ f_latest)
    history.last_gamma = gammas
    history.last_alpha = alphas_from_gammas(gammas)
    history.last_objective = float(np.linalg.norm(fmat @ gammas - f_latest))
    return _apply_combination(history, gammas, dimg, model)
