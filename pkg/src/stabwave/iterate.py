"""Fixed-point engines and the run loop with trace bookkeeping.

The iteration solves L u = N(u) through u_{n+1} = solve_L(sum_j s_j N_j(u_n)),
where each homogeneous part gets a stabilizing factor s_j built from one
shared Rayleigh-type ratio. The run loop owns stopping criteria, divergence
detection, and the coupling to extrapolation cycles or Anderson mixing; every
inner application of the base step counts as one iteration, and a cycle's
extrapolated point overwrites the bookkeeping row of the step it replaces.
"""

import math
import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .anderson import AndersonConfig, ResidualHistory, aa1_step, aa2_step
from .errors import (
    Breakdown,
    DegenerateDenominator,
    IllConditioned,
    NegativeBaseFractionalPower,
    SingularOperator,
)
from .extrap import VemConfig, extrapolate, mmpe_vectors

__all__ = [
    "CRITERIA",
    "IterationTrace",
    "StabilizerConfig",
    "StoppingConfig",
    "TraceRow",
    "classical_step",
    "e_petviashvili_step",
    "part_factors",
    "petviashvili_step",
    "run",
    "stabilized_rhs",
    "stabilizing_factor",
]

CRITERIA = ("consecutive_difference", "residual", "stabilizing_factor_discrepancy")
STEPPERS = ("classical", "petviashvili", "e_petviashvili")

# residual growth past this factor over the start declares divergence
DIVERGENCE_FACTOR = 1e6

_STEP_ERRORS = (
    DegenerateDenominator,
    NegativeBaseFractionalPower,
    SingularOperator,
    IllConditioned,
    FloatingPointError,
    np.linalg.LinAlgError,
)


@dataclass(frozen=True)
class StoppingConfig:
    tol: float
    max_iters: int
    criteria: frozenset = frozenset({"residual"})

    def __post_init__(self):
        if math.isnan(self.tol) or not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if not isinstance(self.max_iters, int) or self.max_iters < 0:
            raise ValueError("max_iters must be a nonnegative integer")
        chosen = self.criteria
        if isinstance(chosen, str):
            chosen = frozenset({chosen})
        else:
            chosen = frozenset(chosen)
        if not chosen or not chosen <= set(CRITERIA):
            raise ValueError("criteria must be a nonempty subset of %r" % (CRITERIA,))
        object.__setattr__(self, "criteria", chosen)


@dataclass(frozen=True)
class StabilizerConfig:
    """Per-part stabilizer exponents; None means the optimal p/(p-1) each.

    Explicit exponents are admitted only while the induced composite degree
    p + gamma(1-p) stays inside the unit interval in magnitude, which is the
    contraction condition the whole construction relies on. A single value
    broadcasts over all parts.
    """

    exponents: tuple = None

    def resolve(self, model):
        degrees = [part.degree for part in model.parts]
        if self.exponents is None:
            return tuple(p / (p - 1.0) for p in degrees)
        given = tuple(float(g) for g in self.exponents)
        if len(given) == 1 and len(degrees) > 1:
            given = given * len(degrees)
        if len(given) != len(degrees):
            raise ValueError(
                "%d exponents for %d parts" % (len(given), len(degrees)))
        for g, p in zip(given, degrees):
            composite = p + g * (1.0 - p)
            if not abs(composite) < 1.0:
                raise ValueError(
                    "exponent %g leaves composite degree %g outside (-1, 1)"
                    % (g, composite))
        return given


class TraceRow(NamedTuple):
    index: int
    diff: float
    res: float
    sfe: float
    seconds: float


@dataclass
class IterationTrace:
    rows: list
    reason: str
    final_state: np.ndarray
    note: str = ""

    @property
    def iterations(self):
        return self.rows[-1].index

    @property
    def final_res(self):
        return self.rows[-1].res


def _ratio(u, model):
    lhs = model.apply_L(u)
    denominator = float(np.dot(model.nonlinear(u), u))
    if abs(denominator) <= 1e-300:
        raise DegenerateDenominator(
            "inner product <N(u), u> = %g" % denominator)
    return float(np.dot(lhs, u)) / denominator


def _power(base, exponent):
    if base < 0.0 and not float(exponent).is_integer():
        raise NegativeBaseFractionalPower(
            "ratio %g under exponent %g" % (base, exponent))
    return base ** exponent


def stabilizing_factor(u, model, gamma):
    """The scalar multiplier (<Lu,u>/<N(u),u>)^gamma at a state."""
    return _power(_ratio(u, model), gamma)


def part_factors(u, model, exponents):
    """One factor per homogeneous part, all powers of the same shared ratio."""
    ratio = _ratio(u, model)
    return tuple(_power(ratio, g) for g in exponents)


def _resolve_exponents(stab, model, extended):
    parts = len(model.parts)
    if stab is None:
        if not extended and parts > 1:
            raise ValueError(
                "a multi-part model has no single default exponent; "
                "pass one explicitly or use the extended stepper")
        return tuple(p.degree / (p.degree - 1.0) for p in model.parts)
    if isinstance(stab, StabilizerConfig):
        return stab.resolve(model)
    # a bare number is taken literally, without the contraction check, so
    # degenerate choices like 0 stay expressible
    return (float(stab),) * parts


def _mix(u, model, factors):
    total = factors[0] * model.parts[0].evaluate(u)
    for s, part in zip(factors[1:], model.parts[1:]):
        total = total + s * part.evaluate(u)
    return total


def stabilized_rhs(u, model, stab=None, extended=True):
    """sum_j s_j(u) N_j(u), the right-hand side of one stabilized step."""
    exponents = _resolve_exponents(stab, model, extended)
    factors = part_factors(u, model, exponents)
    return _mix(u, model, factors)


def classical_step(u, model):
    """Plain fixed-point step solve_L(N(u)); divergent for |p| > 1."""
    return model.solve_L(model.nonlinear(u))


def petviashvili_step(u, model, stab=None):
    """One stabilized step with a single factor on the full nonlinearity."""
    return model.solve_L(stabilized_rhs(u, model, stab, extended=False))


def e_petviashvili_step(u, model, stab=None):
    """One stabilized step with per-part factors; equals the plain step
    when the model has a single homogeneous part."""
    return model.solve_L(stabilized_rhs(u, model, stab, extended=True))


def _discrepancy(factors):
    return max(abs(s - 1.0) for s in factors)


def _criteria_met(row, criteria, tol):
    values = {
        "consecutive_difference": row.diff,
        "residual": row.res,
        "stabilizing_factor_discrepancy": row.sfe,
    }
    for name in criteria:
        value = values[name]
        if not math.isnan(value) and value <= tol:
            return True
    return False


def _diverged(row, baseline, state):
    if not np.all(np.isfinite(state)) or not math.isfinite(row.res):
        return True
    return row.res > DIVERGENCE_FACTOR * baseline


class _Bookkeeper:
    """Shared trace plumbing for the three loop flavors."""

    def __init__(self, model, stopping, factors_at, clock, baseline):
        self.model = model
        self.stopping = stopping
        self.factors_at = factors_at
        self.clock = clock
        self.baseline = baseline
        self.rows = []
        self.note = ""

    def append(self, row):
        self.rows.append(row)

    def finish(self, reason, state):
        return IterationTrace(self.rows, reason, state, note=self.note)

    def settle(self, index, diff, state, overwrite=False):
        """Measure a state, write (or overwrite) its row, and classify it.

        Returns the factors at the state and one of None / "converged" /
        "diverged" / "numerical_breakdown".
        """
        try:
            factors = self.factors_at(state)
            sfe = _discrepancy(factors)
        except _STEP_ERRORS as exc:
            self.note += str(exc)
            res = self.model.residual_norm(state)
            row = TraceRow(index, diff, res, math.nan, self.clock())
            self._write(row, overwrite)
            # A fractional power going negative after a healthy start means
            # the iterate crossed out of the cone where the factor is defined;
            # with the residual above its starting level that is divergence,
            # not a numerical accident.
            if (isinstance(exc, NegativeBaseFractionalPower)
                    and index >= 1 and res > self.baseline):
                return None, "diverged"
            return None, "numerical_breakdown"
        row = TraceRow(index, diff, self.model.residual_norm(state), sfe,
                       self.clock())
        self._write(row, overwrite)
        if _criteria_met(row, self.stopping.criteria, self.stopping.tol):
            return factors, "converged"
        if _diverged(row, self.baseline, state):
            return factors, "diverged"
        return factors, None

    def _write(self, row, overwrite):
        if overwrite:
            self.rows[-1] = row
        else:
            self.rows.append(row)


def run(u0, model, stopping, stepper="petviashvili", stab=None, accel=None,
        seed=None, timing="wall"):
    """Drive the iteration to a stopping condition and record the trace.

    `accel` may be None, a VemConfig (restarted extrapolation cycles), or an
    AndersonConfig (windowed mixing). Breakdowns terminate the run through
    the trace's reason field instead of propagating; a degenerate
    extrapolation window only costs its cycle, not the run.
    """
    if stepper not in STEPPERS:
        raise ValueError("stepper must be one of %r" % (STEPPERS,))
    if timing not in ("wall", "none"):
        raise ValueError("timing must be 'wall' or 'none'")
    state = np.asarray(u0, dtype=float).copy()
    if not np.any(state):
        raise ValueError("starting state must be nonzero")
    if stepper == "classical":
        exponents = None
    else:
        exponents = _resolve_exponents(stab, model, stepper == "e_petviashvili")

    started = time.perf_counter()

    def clock():
        return time.perf_counter() - started if timing == "wall" else 0.0

    def factors_at(u):
        if exponents is None:
            return (1.0,) * len(model.parts)
        return part_factors(u, model, exponents)

    res = model.residual_norm(state)
    book = _Bookkeeper(model, stopping, factors_at, clock, baseline=res)
    factors, verdict = book.settle(0, math.nan, state)
    if verdict is not None:
        return book.finish(verdict, state)

    if accel is None:
        return _run_plain(state, model, stopping, factors, book)
    if isinstance(accel, VemConfig):
        rng = np.random.default_rng(seed)
        return _run_cycling(state, model, stopping, accel, rng, factors, book)
    if isinstance(accel, AndersonConfig):
        return _run_anderson(state, model, stopping, accel, factors, book)
    raise TypeError("unsupported accelerator %r" % (accel,))


def _step_from(state, model, factors):
    return model.solve_L(_mix(state, model, factors))


def _run_plain(state, model, stopping, factors, book):
    n = 0
    while n < stopping.max_iters:
        try:
            new = _step_from(state, model, factors)
        except _STEP_ERRORS as exc:
            book.note += str(exc)
            return book.finish("numerical_breakdown", state)
        n += 1
        diff = float(np.linalg.norm(new - state))
        state = new
        factors, verdict = book.settle(n, diff, state)
        if verdict is not None:
            return book.finish(verdict, state)
    return book.finish("max_iters", state)


def _run_cycling(state, model, stopping, accel, rng, factors, book):
    vectors = None
    if accel.method == "mmpe":
        # fixed projection directions for the whole solve
        vectors = mmpe_vectors(state.size, accel.kappa, rng)
    window = [state.copy()]
    n = 0
    while n < stopping.max_iters:
        try:
            new = _step_from(state, model, factors)
        except _STEP_ERRORS as exc:
            book.note += str(exc)
            return book.finish("numerical_breakdown", state)
        n += 1
        diff = float(np.linalg.norm(new - state))
        state = new
        factors, verdict = book.settle(n, diff, state)
        if verdict is not None:
            return book.finish(verdict, state)
        window.append(state.copy())
        if len(window) < accel.width + 1:
            continue
        try:
            candidate = extrapolate(window, accel, rng=rng, vectors=vectors)
        except Breakdown as exc:
            book.note += "cycle at iteration %d fell back (%s); " % (n, exc)
            window = [state.copy()]
            continue
        diff = float(np.linalg.norm(candidate - window[-2]))
        state = candidate
        # the extrapolated point replaces the last inner step's row
        factors, verdict = book.settle(n, diff, state, overwrite=True)
        if verdict is not None:
            return book.finish(verdict, state)
        window = [state.copy()]
    return book.finish("max_iters", state)


def _run_anderson(state, model, stopping, accel, factors, book):
    step = aa1_step if accel.variant == "type1" else aa2_step
    history = ResidualHistory()
    image = _mix(state, model, factors)
    history.push(state, image, model.apply_L(state) - image)
    n = 0
    while n < stopping.max_iters:
        try:
            if n == 0:
                new = model.solve_L(image)
            else:
                new = step(history, model, accel)
        except _STEP_ERRORS as exc:
            book.note += str(exc)
            return book.finish("numerical_breakdown", state)
        n += 1
        diff = float(np.linalg.norm(new - state))
        state = new
        factors, verdict = book.settle(n, diff, state)
        if verdict is not None:
            return book.finish(verdict, state)
        image = _mix(state, model, factors)
        history.push(state, image, model.apply_L(state) - image)
        history.trim(accel.window)
    return book.finish("max_iters", state)
