"""Vector extrapolation: polynomial methods and epsilon-algorithms.

All five methods are pure functions over a window of consecutive iterates
u_0 .. u_mw. Polynomial methods (mpe, rre, mmpe) consume mw = kappa + 1
inner steps per cycle, epsilon-algorithms (vea, tea) consume mw = 2 kappa.
The cycling driver restarts the base iteration from each extrapolated point.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import Breakdown

__all__ = [
    "VemConfig",
    "cycle",
    "extrapolate",
    "mmpe",
    "mmpe_vectors",
    "mpe",
    "rre",
    "tea",
    "vea",
]

POLYNOMIAL = ("mpe", "rre", "mmpe")
EPSILON = ("vea", "tea")


@dataclass(frozen=True)
class VemConfig:
    method: str
    kappa: int
    breakdown_tol: float = 1e-14
    # policy selectors; single supported policy each, kept explicit so the
    # choice is visible in configs and fingerprints
    mmpe_vector_policy: str = "orthonormal"
    tea_anchor_policy: str = "first_difference"

    def __post_init__(self):
        if self.method not in POLYNOMIAL + EPSILON:
            raise ValueError("unknown extrapolation method %r" % (self.method,))
        if not isinstance(self.kappa, int) or self.kappa < 1:
            raise ValueError("kappa must be a positive integer")
        if not (self.breakdown_tol > 0.0):
            raise ValueError("breakdown_tol must be positive")
        if self.mmpe_vector_policy != "orthonormal":
            raise ValueError("unsupported mmpe vector policy")
        if self.tea_anchor_policy != "first_difference":
            raise ValueError("unsupported tea anchor policy")

    @property
    def width(self):
        # inner steps consumed per cycle
        if self.method in POLYNOMIAL:
            return self.kappa + 1
        return 2 * self.kappa


def _pivoted_lstsq(matrix, rhs, rank_tol=None):
    """Column-pivoted least squares with explicit rank control.

    Returns (coefficients, rank). Columns whose pivot falls below the rank
    tolerance are dropped and get zero coefficients. With rank_tol None the
    threshold is rows * eps * (largest column norm), an absolute floor;
    otherwise rank_tol is relative to the leading pivot.
    """
    matrix = np.asarray(matrix, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    m, n = matrix.shape
    if n == 0:
        return np.zeros(0), 0
    q, r, perm = scipy.linalg.qr(matrix, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return np.zeros(n), 0
    if rank_tol is None:
        col_norms = np.linalg.norm(matrix, axis=0)
        threshold = m * np.finfo(float).eps * float(col_norms.max())
    else:
        threshold = rank_tol * diag[0]
    rank = int(np.count_nonzero(diag >= threshold))
    coeffs = np.zeros(n)
    if rank > 0:
        reduced = scipy.linalg.solve_triangular(r[:rank, :rank],
                                                q[:, :rank].T @ rhs)
        coeffs[perm[:rank]] = reduced
    return coeffs, rank


def _as_states(window):
    states = [np.asarray(w, dtype=float) for w in window]
    if len(states) < 2:
        raise ValueError("window too short")
    return states


def _scale(states):
    return max(1.0, float(np.linalg.norm(states[0])))


def _stationary(states, breakdown_tol):
    guard = breakdown_tol * _scale(states)
    return all(
        float(np.linalg.norm(states[j + 1] - states[j])) <= guard
        for j in range(len(states) - 1)
    )


def _combine(states, gammas):
    out = np.zeros_like(states[0])
    for g, u in zip(gammas, states):
        out = out + g * u
    return out


def _normalized(c, breakdown_tol):
    total = float(np.sum(c))
    # cancellation guard: the absolute tolerance plus a floor that scales
    # with the coefficient magnitudes
    guard = max(breakdown_tol, np.finfo(float).eps * float(np.max(np.abs(c))))
    if abs(total) < guard:
        raise Breakdown("combination coefficients sum to %g" % total)
    return c / total


def mpe(window, kappa, breakdown_tol=1e-14):
    """Minimal polynomial extrapolation over u_0 .. u_{kappa+1}."""
    states = _as_states(window)
    if len(states) != kappa + 2:
        raise ValueError("mpe needs kappa + 2 states")
    diffs = [states[j + 1] - states[j] for j in range(kappa + 1)]
    matrix = np.stack(diffs[:kappa], axis=1)
    c, _ = _pivoted_lstsq(matrix, -diffs[kappa])
    c = np.append(c, 1.0)
    gammas = _normalized(c, breakdown_tol)
    return _combine(states[: kappa + 1], gammas)


def rre(window, kappa):
    """Reduced rank extrapolation: u_0 minus a fitted difference combination."""
    states = _as_states(window)
    if len(states) != kappa + 2:
        raise ValueError("rre needs kappa + 2 states")
    diffs = [states[j + 1] - states[j] for j in range(kappa + 1)]
    second = np.stack([diffs[j + 1] - diffs[j] for j in range(kappa)], axis=1)
    beta, _ = _pivoted_lstsq(second, diffs[0])
    out = states[0].copy()
    for j in range(kappa):
        out = out - beta[j] * diffs[j]
    return out


def mmpe(window, kappa, vectors, breakdown_tol=1e-14):
    """Modified MPE: the coefficient system is projected on fixed vectors."""
    states = _as_states(window)
    if len(states) != kappa + 2:
        raise ValueError("mmpe needs kappa + 2 states")
    if len(vectors) < kappa:
        raise ValueError("mmpe needs kappa projection vectors")
    if _stationary(states, breakdown_tol):
        return states[-1]
    diffs = [states[j + 1] - states[j] for j in range(kappa + 1)]
    system = np.empty((kappa, kappa))
    rhs = np.empty(kappa)
    for row in range(kappa):
        v = np.asarray(vectors[row], dtype=float)
        for col in range(kappa):
            system[row, col] = float(np.dot(v, diffs[col]))
        rhs[row] = -float(np.dot(v, diffs[kappa]))
    try:
        c = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError:
        raise Breakdown("singular projected system") from None
    if not np.all(np.isfinite(c)):
        raise Breakdown("projected system produced non-finite coefficients")
    c = np.append(c, 1.0)
    gammas = _normalized(c, breakdown_tol)
    return _combine(states[: kappa + 1], gammas)


def vea(window, kappa, breakdown_tol=1e-14):
    """Vector epsilon-algorithm; returns the top even-column entry.

    The recursion is the classical triangular one with the Moore-Penrose
    vector inverse w / <w, w>. A difference whose norm falls below the
    (state-scaled) breakdown tolerance would blow up the table, so it raises
    instead and the caller falls back.
    """
    states = _as_states(window)
    if len(states) != 2 * kappa + 1:
        raise ValueError("vea needs 2 kappa + 1 states")
    if _stationary(states, breakdown_tol):
        return states[-1]
    guard = breakdown_tol * _scale(states)
    older = [np.zeros_like(states[0]) for _ in range(len(states) + 1)]
    current = states
    for _ in range(2 * kappa):
        nxt = []
        for n in range(len(current) - 1):
            w = current[n + 1] - current[n]
            norm2 = float(np.dot(w, w))
            if np.sqrt(norm2) < guard:
                raise Breakdown("epsilon-table difference collapsed")
            nxt.append(older[n + 1] + w / norm2)
        older = current
        current = nxt
    return current[0]


def tea(window, kappa, anchor, breakdown_tol=1e-14):
    """Topological epsilon extrapolation against a fixed duality anchor.

    The accelerated point is the affine combination of the first kappa + 1
    states whose coefficients annihilate the anchor moments of the first
    kappa + 1 consecutive differences.  Solving that kappa x kappa moment
    system directly gives the same value as running the epsilon table but
    without the cascaded divisions, which lose accuracy as kappa grows.
    """
    states = _as_states(window)
    if len(states) != 2 * kappa + 1:
        raise ValueError("tea needs 2 kappa + 1 states")
    if _stationary(states, breakdown_tol):
        return states[-1]
    y = np.asarray(anchor, dtype=float)
    moments = np.array(
        [float(np.dot(y, states[j + 1] - states[j])) for j in range(2 * kappa)]
    )
    matrix = np.array([[moments[i + j] for j in range(kappa)] for i in range(kappa)])
    rhs = np.array([-moments[i + kappa] for i in range(kappa)])
    try:
        head = np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError:
        raise Breakdown("anchor moment system is singular") from None
    if not np.all(np.isfinite(head)):
        raise Breakdown("anchor moment system is singular")
    c = np.append(head, 1.0)
    gammas = _normalized(c, breakdown_tol)
    return sum(g * s for g, s in zip(gammas, states[: kappa + 1]))


def _tea_recursion(window, kappa, anchor, breakdown_tol=1e-14):
    """Literal two-branch epsilon table; kept as a cross-check for tea().

    Odd columns advance by the anchor divided by its pairing with the
    column difference; even columns reuse the previous-column difference.
    Only the even columns carry extrapolation values.
    """
    states = _as_states(window)
    if len(states) != 2 * kappa + 1:
        raise ValueError("tea needs 2 kappa + 1 states")
    y = np.asarray(anchor, dtype=float)
    guard = breakdown_tol * _scale(states)
    older = [np.zeros_like(states[0]) for _ in range(len(states) + 1)]
    current = states
    for col in range(2 * kappa):
        nxt = []
        for n in range(len(current) - 1):
            d = current[n + 1] - current[n]
            if col % 2 == 0:
                den = float(np.dot(y, d))
                if abs(den) < guard * max(1.0, float(np.linalg.norm(y))):
                    raise Breakdown("anchor pairing vanished")
                nxt.append(older[n + 1] + y / den)
            else:
                dprev = older[n + 1] - older[n]
                den = float(np.dot(d, dprev))
                if abs(den) < guard ** 2:
                    raise Breakdown("even-column pairing vanished")
                nxt.append(older[n + 1] + dprev / den)
        older = current
        current = nxt
    return current[0]


def mmpe_vectors(dimension, kappa, rng):
    # seeded orthonormal probes, regenerated per solve and held fixed
    # across that solve's cycles
    sample = rng.standard_normal((dimension, kappa))
    q, _ = np.linalg.qr(sample)
    return [np.ascontiguousarray(q[:, j]) for j in range(kappa)]


def extrapolate(window, config, rng=None, vectors=None):
    """Dispatch one extrapolation over a full window.

    The window must hold config.width + 1 states. A window whose differences
    are all below the state-scaled breakdown tolerance is already stationary
    and short-circuits to the newest state.
    """
    states = _as_states(window)
    if len(states) != config.width + 1:
        raise ValueError(
            "window holds %d states, method %s at kappa=%d needs %d"
            % (len(states), config.method, config.kappa, config.width + 1)
        )
    guard = config.breakdown_tol * _scale(states)
    largest = max(float(np.linalg.norm(states[j + 1] - states[j]))
                  for j in range(len(states) - 1))
    if largest <= guard:
        return states[-1]
    if config.method == "mpe":
        return mpe(states, config.kappa, config.breakdown_tol)
    if config.method == "rre":
        return rre(states, config.kappa)
    if config.method == "mmpe":
        if vectors is None:
            if rng is None:
                rng = np.random.default_rng(0)
            vectors = mmpe_vectors(states[0].size, config.kappa, rng)
        return mmpe(states, config.kappa, vectors, config.breakdown_tol)
    if config.method == "vea":
        return vea(states, config.kappa, config.breakdown_tol)
    anchor = states[1] - states[0]
    return tea(states, config.kappa, anchor, config.breakdown_tol)


def cycle(u, step, config, rng=None, vectors=None):
    """One restart cycle: width inner steps, one extrapolation.

    On Breakdown the cycle degrades to its last inner iterate, so a run
    never stops just because one window was degenerate.
    """
    state = np.asarray(u, dtype=float)
    window = [state]
    for _ in range(config.width):
        state = step(state)
        window.append(state)
    try:
        return extrapolate(window, config, rng=rng, vectors=vectors)
    except Breakdown:
        return window[-1]
