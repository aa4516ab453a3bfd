"""Config-driven experiment runner behind the installed `stabwave` command.

Configs are flat text files, one `key = value` per line, `#` starting a
comment, keys namespaced with dots (`model.kind`, `stop.tol`, ...); the full
grammar is documented in the README. Four subcommands: `solve` runs a single
(optionally accelerated) iteration and writes a trace, a final profile, and
a summary; `sweep` solves once per (method, width) pair and tabulates the
cells; `diagnose` reads a profile back and reports the leading eigenvalues
of the plain and stabilized iteration maps side by side; `selftest` runs a
built-in battery of the package's structural invariants.

Exit codes: 0 converged (or success), 2 completed without converging,
1 configuration or I/O error.
"""

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .anderson import VARIANTS, AndersonConfig
from .errors import ConfigError, StabwaveError
from .extrap import EPSILON, POLYNOMIAL, VemConfig, extrapolate
from .iterate import (
    CRITERIA,
    STEPPERS,
    StabilizerConfig,
    StoppingConfig,
    petviashvili_step,
    run,
)
from .models import (
    BenjaminParams,
    BoussinesqParams,
    HomogeneousPart,
    Model,
    boussinesq_constants,
    boussinesq_periodic,
    boussinesq_solitary,
    benjamin_1d,
    benjamin_2d,
    gnls_ground_state,
    initial_guess,
    nls_ground_state,
)
from .spectral import Grid1D, Grid2D
from .spectrum import classical_map, leading_eigs, petviashvili_map

__all__ = [
    "ExperimentConfig",
    "RunSummary",
    "SweepCell",
    "read_config",
    "run_experiment",
    "sweep",
    "diagnose",
    "selftest",
    "main",
]

MODEL_KINDS = (
    "boussinesq",
    "boussinesq_periodic",
    "nls",
    "gnls",
    "benjamin1d",
    "benjamin2d",
    "toy",
)
BOUSSINESQ_PRESETS = ("classical", "kdv_kdv", "bbm_bbm")
METHOD_TOKENS = POLYNOMIAL + EPSILON + tuple(
    "anderson_" + v for v in VARIANTS
)

# all floats in emitted CSVs carry 16 significant digits
_FMT = "%.16g"


def _fmt(value):
    return _FMT % float(value)


# ---------------------------------------------------------------------------
# config parsing


def _parse_lines(path):
    mapping = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if not sep or not key or not value:
                raise ConfigError("line %d" % lineno, "expected `key = value`")
            if key in mapping:
                raise ConfigError(key, "duplicate key")
            mapping[key] = value
    return mapping


class _Fields:
    """Claims keys from the raw mapping, typing and validating each claim."""

    _MISSING = object()

    def __init__(self, mapping):
        self.mapping = mapping
        self.claimed = set()

    def raw(self, key, default=_MISSING):
        self.claimed.add(key)
        if key in self.mapping:
            return self.mapping[key]
        if default is self._MISSING:
            raise ConfigError(key, "required key is missing")
        return default

    def has(self, key):
        return key in self.mapping

    def choice(self, key, allowed, default=_MISSING):
        value = self.raw(key, default)
        if value not in allowed:
            raise ConfigError(key, "must be one of %s" % ", ".join(allowed))
        return value

    def real(self, key, default=_MISSING):
        value = self.raw(key, default)
        if isinstance(value, float):
            return value
        try:
            number = float(value)
        except ValueError:
            raise ConfigError(key, "not a number: %r" % value) from None
        if not math.isfinite(number):
            raise ConfigError(key, "must be finite")
        return number

    def positive(self, key, default=_MISSING):
        number = self.real(key, default)
        if not number > 0.0:
            raise ConfigError(key, "must be positive")
        return number

    def integer(self, key, default=_MISSING, minimum=None):
        value = self.raw(key, default)
        if isinstance(value, int):
            return value
        try:
            number = int(value)
        except ValueError:
            raise ConfigError(key, "not an integer: %r" % value) from None
        if minimum is not None and number < minimum:
            raise ConfigError(key, "must be >= %d" % minimum)
        return number

    def reals(self, key, default=_MISSING):
        value = self.raw(key, default)
        if not isinstance(value, str):
            return value
        out = []
        for piece in value.split(","):
            piece = piece.strip()
            try:
                number = float(piece)
            except ValueError:
                raise ConfigError(key, "not a number: %r" % piece) from None
            if not math.isfinite(number):
                raise ConfigError(key, "entries must be finite")
            out.append(number)
        return tuple(out)

    def tokens(self, key, default=_MISSING):
        value = self.raw(key, default)
        if not isinstance(value, str):
            return value
        return tuple(piece.strip() for piece in value.split(",") if piece.strip())

    def widths(self, key, default=_MISSING):
        # accepts `4`, `2,5,9`, and the inclusive range form `2..10`
        value = self.raw(key, default)
        if not isinstance(value, str):
            return value
        if ".." in value:
            lo, _, hi = value.partition("..")
            try:
                lo, hi = int(lo), int(hi)
            except ValueError:
                raise ConfigError(key, "malformed range %r" % value) from None
            if hi < lo:
                raise ConfigError(key, "empty range %r" % value)
            return tuple(range(lo, hi + 1))
        out = []
        for piece in value.split(","):
            try:
                out.append(int(piece.strip()))
            except ValueError:
                raise ConfigError(key, "not an integer: %r" % piece) from None
        return tuple(out)

    def reject_unclaimed(self):
        unknown = sorted(set(self.mapping) - self.claimed)
        if unknown:
            raise ConfigError(unknown[0], "unknown key")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; built by read_config."""

    model: dict
    grid: object
    guess: dict
    stepper: str
    accel: object
    stab: object
    stopping: StoppingConfig
    sweep_methods: tuple
    sweep_widths: tuple
    seed: object
    timing: str
    outputs: dict
    diagnose_count: int


def _grid_from(fields, kind):
    try:
        if kind == "benjamin2d":
            return Grid2D(
                fields.positive("grid.half_length_x"),
                fields.integer("grid.points_x", minimum=8),
                fields.positive("grid.half_length_z"),
                fields.integer("grid.points_z", minimum=8),
            )
        return Grid1D(
            fields.positive("grid.half_length"),
            fields.integer("grid.points", minimum=8),
        )
    except ValueError as exc:
        raise ConfigError("grid", str(exc)) from None


def _model_params(fields, kind):
    params = {}
    if kind in ("boussinesq", "boussinesq_periodic"):
        default_preset = "bbm_bbm" if kind == "boussinesq_periodic" else "classical"
        params["preset"] = fields.choice(
            "model.preset", BOUSSINESQ_PRESETS, default_preset)
        params["speed"] = fields.real("model.speed")
    if kind == "boussinesq_periodic":
        params["K1"] = fields.real("model.K1")
        params["K2"] = fields.real("model.K2")
        params["branch"] = fields.integer("model.branch", 0, minimum=0)
    if kind in ("nls", "gnls"):
        params["mu"] = fields.real("model.mu")
    if kind == "gnls":
        params["nu"] = fields.real("model.nu")
    if kind == "benjamin1d":
        params["speed"] = fields.real("model.speed")
        params["alpha"] = fields.real("model.alpha", 1.0)
        params["beta"] = fields.real("model.beta", 1.0)
        params["gamma"] = fields.real("model.gamma", 0.0)
        params["delta"] = fields.real("model.delta", 1.0)
    if kind == "benjamin2d":
        params["speed"] = fields.real("model.speed")
        params["Gamma"] = fields.real("model.Gamma", 0.0)
    return params


def _resolve_outputs(fields):
    configured = fields.raw("out.dir", ".")
    directory = os.environ.get("STABWAVE_OUTDIR") or configured
    names = {
        "trace": fields.raw("out.trace", "trace.csv"),
        "profile": fields.raw("out.profile", "profile.csv"),
        "summary": fields.raw("out.summary", "summary.json"),
        "sweep": fields.raw("out.sweep", "sweep.csv"),
        "report": fields.raw("out.report", "spectrum.json"),
    }
    paths = {label: os.path.join(directory, name) for label, name in names.items()}
    paths["dir"] = directory
    return paths


def read_config(path):
    """Parse and validate a config file into an ExperimentConfig."""
    fields = _Fields(_parse_lines(path))
    kind = fields.choice("model.kind", MODEL_KINDS)
    model = {"kind": kind}
    model.update(_model_params(fields, kind))
    grid = _grid_from(fields, kind)

    guess = {
        "kind": fields.choice(
            "guess.kind", ("sech2", "gaussian", "kdv_soliton", "kp_lump"), "sech2"),
        "amplitude": fields.real("guess.amplitude", 1.0),
        "width": fields.positive("guess.width", 1.0),
        "centers": fields.reals("guess.centers", (0.0,)),
    }

    stepper = fields.choice("stepper", STEPPERS, "petviashvili")
    stab = None
    if fields.has("stab.exponents"):
        stab = StabilizerConfig(exponents=fields.reals("stab.exponents"))

    accel_kind = fields.choice("accel.kind", ("none", "vem", "anderson"), "none")
    if accel_kind == "vem":
        accel = VemConfig(
            method=fields.choice("accel.method", POLYNOMIAL + EPSILON),
            kappa=fields.integer("accel.kappa", minimum=1),
        )
    elif accel_kind == "anderson":
        accel = AndersonConfig(
            variant=fields.choice("accel.variant", VARIANTS, "type2"),
            window=fields.integer("accel.window", minimum=1),
        )
    else:
        accel = None

    criteria = fields.tokens("stop.criteria", ("residual",))
    try:
        stopping = StoppingConfig(
            tol=fields.positive("stop.tol"),
            max_iters=fields.integer("stop.max_iters", minimum=0),
            criteria=frozenset(criteria),
        )
    except ValueError as exc:
        raise ConfigError("stop", str(exc)) from None

    methods = fields.tokens("sweep.methods", ())
    for token in methods:
        if token not in METHOD_TOKENS:
            raise ConfigError(
                "sweep.methods", "unknown method %r (choose from %s)"
                % (token, ", ".join(METHOD_TOKENS)))
    widths = fields.widths("sweep.widths", ())
    for width in widths:
        if width < 1:
            raise ConfigError("sweep.widths", "widths must be positive")

    seed = fields.integer("seed", None) if fields.has("seed") else None
    timing = fields.choice("timing", ("wall", "none"), "wall")
    outputs = _resolve_outputs(fields)
    count = fields.integer("diagnose.count", 6, minimum=1)
    fields.reject_unclaimed()
    return ExperimentConfig(
        model=model,
        grid=grid,
        guess=guess,
        stepper=stepper,
        accel=accel,
        stab=stab,
        stopping=stopping,
        sweep_methods=methods,
        sweep_widths=widths,
        seed=seed,
        timing=timing,
        outputs=outputs,
        diagnose_count=count,
    )


# ---------------------------------------------------------------------------
# model assembly


def _toy_model(grid):
    # identity operator with a pointwise square: the smallest model that
    # exercises every interface; states solving u = u^2 are 0/1 indicators
    def evaluate(u):
        return u * u

    def derivative(u, v):
        return 2.0 * u * v

    def identity(u):
        return np.asarray(u, dtype=float)

    return Model(
        name="toy",
        grid=grid,
        components=1,
        size=grid.points,
        parts=(HomogeneousPart(2, evaluate, derivative),),
        apply_L=identity,
        solve_L=identity,
        params={},
    )


def _preset_params(preset, speed):
    maker = getattr(BoussinesqParams, preset)
    return maker(speed)


def build_model(config):
    """Construct the Model described by a validated config."""
    spec = config.model
    kind = spec["kind"]
    try:
        if kind == "boussinesq":
            return boussinesq_solitary(
                _preset_params(spec["preset"], spec["speed"]), config.grid)
        if kind == "boussinesq_periodic":
            branches = boussinesq_constants(spec["K1"], spec["K2"], spec["speed"])
            if spec["branch"] >= len(branches):
                raise ConfigError(
                    "model.branch",
                    "only %d constant branches exist here" % len(branches))
            c1, c2 = branches[spec["branch"]]
            base = _preset_params(spec["preset"], spec["speed"])
            params = BoussinesqParams(
                base.a, base.b, base.c, base.d, spec["speed"],
                K1=spec["K1"], K2=spec["K2"], C1=c1, C2=c2)
            return boussinesq_periodic(params, config.grid)
        if kind == "nls":
            return nls_ground_state(spec["mu"], config.grid)
        if kind == "gnls":
            return gnls_ground_state(spec["mu"], spec["nu"], config.grid)
        if kind == "benjamin1d":
            return benjamin_1d(
                BenjaminParams(
                    speed=spec["speed"], alpha=spec["alpha"], beta=spec["beta"],
                    gamma=spec["gamma"], delta=spec["delta"]),
                config.grid)
        if kind == "benjamin2d":
            return benjamin_2d(
                BenjaminParams(speed=spec["speed"], Gamma=spec["Gamma"]),
                config.grid)
        return _toy_model(config.grid)
    except ValueError as exc:
        raise ConfigError("model", str(exc)) from None


def _build_guess(config, model):
    g = config.guess
    return initial_guess(
        g["kind"], model,
        amplitude=g["amplitude"], width=g["width"], centers=g["centers"])


# ---------------------------------------------------------------------------
# emitted files


def _ensure_outdir(outputs):
    if outputs["dir"]:
        os.makedirs(outputs["dir"], exist_ok=True)


def _write_trace(path, trace):
    with open(path, "w", newline="") as handle:
        handle.write("iter,res,diff,sfe,seconds\n")
        for row in trace.rows:
            handle.write("%d,%s,%s,%s,%s\n" % (
                row.index, _fmt(row.res), _fmt(row.diff),
                _fmt(row.sfe), _fmt(row.seconds)))


def _write_profile(path, model, state):
    physical = model.reconstruct(np.asarray(state, dtype=float))
    with open(path, "w", newline="") as handle:
        if isinstance(model.grid, Grid2D):
            xs = model.grid.axis_x.nodes
            zs = model.grid.axis_z.nodes
            sheet = physical.reshape(model.grid.points_x, model.grid.points_z)
            handle.write("x,z,u\n")
            for i in range(xs.size):
                row = sheet[i]
                for j in range(zs.size):
                    handle.write("%s,%s,%s\n"
                                 % (_fmt(xs[i]), _fmt(zs[j]), _fmt(row[j])))
            return
        nodes = model.grid.nodes
        columns = np.split(physical, model.components)
        if model.components == 1:
            handle.write("x,u\n")
        else:
            handle.write("x," + ",".join(
                "u%d" % (j + 1) for j in range(model.components)) + "\n")
        for i in range(nodes.size):
            handle.write(",".join(
                [_fmt(nodes[i])] + [_fmt(col[i]) for col in columns]) + "\n")


def _read_profile(path, model):
    try:
        table = np.genfromtxt(path, delimiter=",", skip_header=1)
    except OSError as exc:
        raise ConfigError("profile", str(exc)) from None
    table = np.atleast_2d(np.asarray(table, dtype=float))
    if isinstance(model.grid, Grid2D):
        expected_rows = model.grid.points_x * model.grid.points_z
        expected_cols = 3
    else:
        expected_rows = model.grid.points
        expected_cols = 1 + model.components
    if table.shape != (expected_rows, expected_cols):
        raise ConfigError(
            "profile", "expected %d rows x %d columns, found %s"
            % (expected_rows, expected_cols, table.shape))
    if not np.all(np.isfinite(table)):
        raise ConfigError("profile", "contains non-finite entries")
    values = table[:, -1] if isinstance(model.grid, Grid2D) \
        else np.concatenate([table[:, 1 + j] for j in range(model.components)])
    # profiles are stored in physical variables; shifted formulations
    # iterate in the shifted ones
    if model.offset is not None:
        values = values - model.offset
    return values


@dataclass(frozen=True)
class SweepCell:
    method: str
    width: int
    iterations: int
    final_res: float
    reason: str
    best: bool


def _write_sweep(path, cells):
    with open(path, "w", newline="") as handle:
        handle.write("method,width,iterations,final_res,reason,best\n")
        for cell in cells:
            handle.write("%s,%d,%d,%s,%s,%d\n" % (
                cell.method, cell.width, cell.iterations,
                _fmt(cell.final_res), cell.reason, int(cell.best)))


@dataclass(frozen=True)
class RunSummary:
    """Outcome of one experiment; sweeps carry their cells in `table`."""

    model: str
    method: str
    width: int
    iterations: int
    final_res: float
    final_diff: float
    final_sfe: float
    reason: str
    seconds: float
    table: tuple = ()


def _write_summary(path, summary):
    payload = {
        "model": summary.model,
        "method": summary.method,
        "width": summary.width,
        "iterations": summary.iterations,
        "final_res": summary.final_res,
        "reason": summary.reason,
        "seconds": summary.seconds,
    }
    with open(path, "w", newline="") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def _method_label(accel):
    if accel is None:
        return "none", 0
    if isinstance(accel, VemConfig):
        return accel.method, accel.kappa
    return "anderson_" + accel.variant, accel.window


def _accel_from_token(token, width):
    if token.startswith("anderson_"):
        return AndersonConfig(variant=token[len("anderson_"):], window=width)
    return VemConfig(method=token, kappa=width)


# ---------------------------------------------------------------------------
# operations


def run_experiment(config):
    """Run one configured solve; emit trace, profile, and summary files."""
    model = build_model(config)
    guess = _build_guess(config, model)
    trace = run(
        guess, model, config.stopping,
        stepper=config.stepper, stab=config.stab, accel=config.accel,
        seed=config.seed, timing=config.timing)
    method, width = _method_label(config.accel)
    last = trace.rows[-1]
    summary = RunSummary(
        model=model.name,
        method=method,
        width=width,
        iterations=trace.iterations,
        final_res=last.res,
        final_diff=last.diff,
        final_sfe=last.sfe,
        reason=trace.reason,
        seconds=last.seconds,
    )
    _ensure_outdir(config.outputs)
    _write_trace(config.outputs["trace"], trace)
    _write_profile(config.outputs["profile"], model, trace.final_state)
    _write_summary(config.outputs["summary"], summary)
    return summary


def sweep(config):
    """Solve once per (method, width) pair; tabulate and flag best cells."""
    if not config.sweep_methods or not config.sweep_widths:
        raise ConfigError("sweep.methods", "sweep needs methods and widths")
    model = build_model(config)
    guess = _build_guess(config, model)
    cells = []
    for token in config.sweep_methods:
        rows = []
        for width in sorted(config.sweep_widths):
            try:
                trace = run(
                    guess, model, config.stopping,
                    stepper=config.stepper, stab=config.stab,
                    accel=_accel_from_token(token, width),
                    seed=config.seed, timing=config.timing)
                rows.append((token, width, trace.iterations,
                             trace.final_res, trace.reason))
            except (StabwaveError, ValueError, FloatingPointError,
                    np.linalg.LinAlgError) as exc:
                # a failed cell is a result, not a reason to stop sweeping
                rows.append((token, width, -1, math.inf,
                             "error:" + type(exc).__name__))
        converged = [r for r in rows if r[4] == "converged"]
        best_key = min(
            ((r[2], r[1]) for r in converged), default=None)
        for token_, width, iters, res, reason in rows:
            is_best = (best_key is not None and reason == "converged"
                       and (iters, width) == best_key)
            cells.append(SweepCell(token_, width, iters, res, reason, is_best))
    _ensure_outdir(config.outputs)
    _write_sweep(config.outputs["sweep"], cells)
    return tuple(cells)


def diagnose(config, profile_path):
    """Leading spectra of the plain and stabilized maps at a stored profile."""
    model = build_model(config)
    state = _read_profile(profile_path, model)
    extended = config.stepper == "e_petviashvili"
    count = config.diagnose_count
    seed = 0 if config.seed is None else config.seed
    plain = leading_eigs(classical_map(state, model), count, seed=seed)
    stabilized = leading_eigs(
        petviashvili_map(state, model, stab=config.stab, extended=extended),
        count, seed=seed)

    def column(report):
        return [
            {"re": float(lam.real), "im": float(lam.imag), "residual": float(res)}
            for lam, res in zip(report.eigenvalues, report.residual_norms)
        ]

    payload = {
        "model": model.name,
        "count": count,
        "plain": column(plain),
        "stabilized": column(stabilized),
    }
    _ensure_outdir(config.outputs)
    with open(config.outputs["report"], "w", newline="") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")
    return plain, stabilized


def _format_eig(lam):
    if abs(lam.imag) > 1e-12 * max(1.0, abs(lam.real)):
        return "%.7e %+.7ei" % (lam.real, lam.imag)
    return "%.7e" % lam.real


def print_report(plain, stabilized, stream=None):
    stream = sys.stdout if stream is None else stream
    rows = max(plain.eigenvalues.size, stabilized.eigenvalues.size)
    stream.write("%-28s%s\n" % ("plain", "stabilized"))
    for i in range(rows):
        left = _format_eig(plain.eigenvalues[i]) \
            if i < plain.eigenvalues.size else ""
        right = _format_eig(stabilized.eigenvalues[i]) \
            if i < stabilized.eigenvalues.size else ""
        stream.write("%-28s%s\n" % (left, right))


# ---------------------------------------------------------------------------
# selftest battery


def _check_step_scale_invariance():
    grid = Grid1D(8.0, 16)
    model = _toy_model(grid)
    state = 1.0 + 0.3 * np.cos(np.pi * grid.nodes / 8.0)
    one = petviashvili_step(state, model)
    other = petviashvili_step(100.0 * state, model)
    assert np.linalg.norm(one - other) <= 1e-11 * np.linalg.norm(one)


def _check_euler_identity():
    grid = Grid1D(8.0, 16)
    model = _toy_model(grid)
    rng = np.random.default_rng(0)
    state = rng.standard_normal(grid.points)
    lhs = model.nonlinear_derivative(state, state)
    rhs = 2.0 * model.nonlinear(state)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * np.linalg.norm(rhs)


def _check_extrapolation_exactness():
    rng = np.random.default_rng(1)
    matrix = 0.5 * rng.standard_normal((3, 3)) / np.sqrt(3.0)
    offset = rng.standard_normal(3)
    fixed = np.linalg.solve(np.eye(3) - matrix, offset)
    window = [rng.standard_normal(3)]
    for _ in range(4):
        window.append(matrix @ window[-1] + offset)
    value = extrapolate(window, VemConfig(method="mpe", kappa=3))
    assert np.linalg.norm(value - fixed) <= 1e-8 * max(1.0, np.linalg.norm(fixed))


def _check_leading_eigs_identity():
    from .spectrum import LinearMap

    report = leading_eigs(LinearMap(5, lambda v: np.asarray(v)), 3)
    assert np.allclose(report.eigenvalues, 1.0, atol=1e-12)


def _check_toy_solve():
    grid = Grid1D(8.0, 16)
    model = _toy_model(grid)
    guess = initial_guess("gaussian", model, amplitude=0.8, width=0.5)
    trace = run(guess, model, StoppingConfig(tol=1e-12, max_iters=200))
    assert trace.reason == "converged"


_SELFTESTS = (
    ("step scale invariance", _check_step_scale_invariance),
    ("euler identity", _check_euler_identity),
    ("extrapolation exactness", _check_extrapolation_exactness),
    ("leading eigenvalues of identity", _check_leading_eigs_identity),
    ("toy solve converges", _check_toy_solve),
)


def selftest(stream=None):
    """Run the built-in invariant battery; return the number of failures."""
    stream = sys.stdout if stream is None else stream
    failures = 0
    for name, check in _SELFTESTS:
        try:
            check()
        except Exception as exc:  # noqa: BLE001 - each check reports its own failure
            failures += 1
            stream.write("FAIL %s (%s)\n" % (name, exc))
        else:
            stream.write("ok   %s\n" % name)
    return failures


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    # usage problems must exit 1, not argparse's default 2, which this
    # command reserves for completed-but-not-converged runs
    def error(self, message):
        raise ConfigError("usage", message)


def main(argv=None):
    parser = _Parser(prog="stabwave",
                     description="traveling-wave solver experiments")
    commands = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "sweep"):
        sub = commands.add_parser(name)
        sub.add_argument("config")
    sub = commands.add_parser("diagnose")
    sub.add_argument("config")
    sub.add_argument("profile")
    commands.add_parser("selftest")
    try:
        args = parser.parse_args(argv)
        if args.command == "solve":
            summary = run_experiment(read_config(args.config))
            print("%s after %d iterations, residual %.3e"
                  % (summary.reason, summary.iterations, summary.final_res))
            return 0 if summary.reason == "converged" else 2
        if args.command == "sweep":
            cells = sweep(read_config(args.config))
            for cell in cells:
                marker = " *" if cell.best else ""
                print("%s width=%d: %d iterations, residual %.3e, %s%s"
                      % (cell.method, cell.width, cell.iterations,
                         cell.final_res, cell.reason, marker))
            return 0 if any(c.reason == "converged" for c in cells) else 2
        if args.command == "diagnose":
            plain, stabilized = diagnose(read_config(args.config), args.profile)
            print_report(plain, stabilized)
            return 0
        return 1 if selftest() else 0
    except (StabwaveError, OSError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
