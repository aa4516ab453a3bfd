"""Brute-force reference computations for the test suite.

Everything here is deliberately naive: cofactor determinants, a textbook
Arnoldi loop, direct residual evaluation, and a freezer for reference runs.
The value of these routines is independence from the production code paths,
not speed, so nothing is vectorized beyond plain array arithmetic.
"""

import hashlib
import os
from dataclasses import dataclass

import numpy as np

from .errors import Breakdown

__all__ = [
    "GoldenTrace",
    "closed_form_residual",
    "determinant_extrapolation",
    "reference_gmres",
    "regen_requested",
]


def _det(rows):
    # cofactor expansion along the first row; fine for the tiny matrices here
    n = len(rows)
    if n == 0:
        return 1.0
    if n == 1:
        return rows[0][0]
    total = 0.0
    for j in range(n):
        minor = [[row[jj] for jj in range(n) if jj != j] for row in rows[1:]]
        total += (-1.0) ** j * rows[0][j] * _det(minor)
    return total


def determinant_extrapolation(window, kappa, method, vectors=None):
    """Evaluate the determinant-ratio form of a polynomial extrapolation.

    The numerator determinant has the window states across its first row and
    scalar pairings below; the denominator replaces the states by ones. Both
    are expanded by cofactors along that first row, so the result is a plain
    ratio of signed minors. Restricted to kappa <= 2 and dimension <= 4
    because the cost and the conditioning of the naive expansion degrade
    quickly beyond that.
    """
    states = [np.asarray(w, dtype=float) for w in window]
    if kappa < 1 or kappa > 2:
        raise ValueError("determinant oracle supports kappa in {1, 2}")
    if states[0].size > 4:
        raise ValueError("determinant oracle supports dimension <= 4")
    if len(states) != kappa + 2:
        raise ValueError("window must hold kappa + 2 states")
    if method not in ("mpe", "rre", "mmpe"):
        raise ValueError("unknown method %r" % (method,))
    d1 = [states[j + 1] - states[j] for j in range(kappa + 1)]
    span = max(float(np.linalg.norm(d)) for d in d1)
    if span <= 1e-14 * max(1.0, float(np.linalg.norm(states[0]))):
        return states[0]
    if method == "mpe":
        pair = lambda i, j: float(np.dot(d1[i], d1[j]))
    elif method == "rre":
        d2 = [d1[i + 1] - d1[i] for i in range(kappa)]
        pair = lambda i, j: float(np.dot(d2[i], d1[j]))
    else:
        if vectors is None or len(vectors) < kappa:
            raise ValueError("mmpe needs kappa fixed vectors")
        pair = lambda i, j: float(np.dot(np.asarray(vectors[i], dtype=float),
                                         d1[j]))

    scalar_rows = [[pair(i, j) for j in range(kappa + 1)] for i in range(kappa)]
    cof = []
    for j in range(kappa + 1):
        minor = [[row[jj] for jj in range(kappa + 1) if jj != j]
                 for row in scalar_rows]
        cof.append((-1.0) ** j * _det(minor))
    denominator = sum(cof)
    if abs(denominator) <= 1e-14 * max(abs(c) for c in cof):
        raise Breakdown("denominator determinant vanished")
    combo = np.zeros_like(states[0])
    for j in range(kappa + 1):
        combo = combo + cof[j] * states[j]
    return combo / denominator


def reference_gmres(matvec, b, iters):
    """Residual-norm sequence of unrestarted GMRES on A x = b from x = 0.

    Plain Arnoldi with modified Gram-Schmidt; the norm at step k comes from
    the small Hessenberg least-squares problem. A vanishing Arnoldi vector
    means the Krylov space is exhausted (the solution is exact in it) and
    the sequence simply stops there.
    """
    b = np.asarray(b, dtype=float)
    if b.size > 8:
        raise ValueError("reference oracle limited to dimension <= 8")
    beta = float(np.linalg.norm(b))
    norms = [beta]
    if beta == 0.0:
        return norms
    basis = [b / beta]
    hess = np.zeros((iters + 1, iters))
    for j in range(iters):
        w = np.asarray(matvec(basis[j]), dtype=float)
        for i in range(j + 1):
            hess[i, j] = float(np.dot(basis[i], w))
            w = w - hess[i, j] * basis[i]
        hess[j + 1, j] = float(np.linalg.norm(w))
        block = hess[: j + 2, : j + 1]
        rhs = np.zeros(j + 2)
        rhs[0] = beta
        y = np.linalg.lstsq(block, rhs, rcond=None)[0]
        norms.append(float(np.linalg.norm(block @ y - rhs)))
        if hess[j + 1, j] <= 1e-14 * beta:
            break
        basis.append(w / hess[j + 1, j])
    return norms


def closed_form_residual(model, profile):
    """Euclidean norm of L.profile - N(profile) for an analytic profile.

    Intended for the model variants whose traveling profile is known in
    closed form (the pure-KdV limit in 1D, the zero-interaction lump in 2D);
    the measured value then reflects only discretization and domain effects.
    """
    name = getattr(model, "name", "")
    params = getattr(model, "params", {})
    if name == "benjamin1d":
        if params.get("gamma", None) != 0.0:
            raise ValueError("closed form requires the gamma = 0 limit")
    elif name == "benjamin2d":
        if params.get("Gamma", None) != 0.0:
            raise ValueError("closed form requires the Gamma = 0 limit")
    else:
        raise ValueError("no closed-form profile for model %r" % (name,))
    state = np.asarray(profile, dtype=float)
    return float(np.linalg.norm(model.apply_L(state) - model.nonlinear(state)))


def regen_requested():
    """True when the environment asks to regenerate frozen references."""
    return os.environ.get("STABWAVE_REGEN_GOLDEN", "") == "1"


@dataclass(frozen=True)
class GoldenTrace:
    """Frozen first rows of a reference run, keyed by a config fingerprint.

    The fingerprint pins the exact configuration the rows were produced
    under; comparison against rows from a different configuration is refused
    rather than reported as a numeric mismatch. Rows hold (iter, res, diff,
    sfe); timing is never part of the frozen data.
    """

    fingerprint: str
    rows: tuple
    created: str = ""

    @staticmethod
    def config_fingerprint(mapping):
        text = "\n".join("%s=%s" % (k, mapping[k]) for k in sorted(mapping))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    @classmethod
    def from_rows(cls, fingerprint, rows, limit=None, created=""):
        taken = []
        for row in rows:
            if limit is not None and len(taken) >= limit:
                break
            index, diff, res, sfe = row[0], row[1], row[2], row[3]
            taken.append((int(index), float(res), float(diff), float(sfe)))
        return cls(fingerprint=fingerprint, rows=tuple(taken), created=created)

    def save(self, path):
        lines = ["# fingerprint %s" % self.fingerprint]
        if self.created:
            lines.append("# created %s" % self.created)
        lines.append("iter,res,diff,sfe,seconds")
        for index, res, diff, sfe in self.rows:
            lines.append("%d,%.16g,%.16g,%.16g,%.16g" % (index, res, diff, sfe, 0.0))
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path):
        fingerprint = ""
        created = ""
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("# fingerprint"):
                    fingerprint = line.split()[-1]
                elif line.startswith("# created"):
                    created = line[len("# created"):].strip()
                elif line.startswith("iter,"):
                    continue
                else:
                    parts = line.split(",")
                    rows.append((int(parts[0]), float(parts[1]),
                                 float(parts[2]), float(parts[3])))
        if not fingerprint:
            raise ValueError("golden file %s carries no fingerprint" % path)
        return cls(fingerprint=fingerprint, rows=tuple(rows), created=created)

    def verify(self, fingerprint, rows, rtol=1e-9):
        if fingerprint != self.fingerprint:
            raise ValueError(
                "config fingerprint %s does not match the frozen %s; "
                "refusing to compare" % (fingerprint[:12], self.fingerprint[:12])
            )
        fresh = GoldenTrace.from_rows(fingerprint, rows, limit=len(self.rows))
        if len(fresh.rows) != len(self.rows):
            raise ValueError("trace shorter than the frozen reference")
        for stored, current in zip(self.rows, fresh.rows):
            if stored[0] != current[0]:
                raise ValueError("iteration indices drifted: %r vs %r"
                                 % (stored[0], current[0]))
            for a, b in zip(stored[1:], current[1:]):
                if np.isnan(a) and np.isnan(b):
                    continue
                if not np.isclose(a, b, rtol=rtol, atol=1e-300):
                    raise ValueError(
                        "frozen row %d drifted: %.17g vs %.17g"
                        % (stored[0], a, b)
                    )
