"""Problem instances: symmetric metric distance matrices, optionally on a line."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import MetricViolation, OddTeamCount, ParseError

TOL = 1e-9
FORMATS = ("matrix", "coords", "line")


@dataclass(frozen=True, eq=False)
class Instance:
    n: int
    dist: np.ndarray
    line_gaps: Optional[np.ndarray] = None
    name: str = ""
    coords: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def integral(self):
        return np.issubdtype(self.dist.dtype, np.integer)

    @property
    def is_line(self):
        return self.line_gaps is not None

    def degree(self):
        """Weighted degree of every team."""
        return self.dist.sum(axis=1)

    def total_weight(self):
        """w(E): sum over unordered pairs."""
        return self.dist.sum() / 2

    def scaled(self, factor):
        d = self.dist * factor
        gaps = None if self.line_gaps is None else self.line_gaps * factor
        return Instance(self.n, d, gaps, self.name)

    def same_as(self, other):
        if self.n != other.n or not np.array_equal(self.dist, other.dist):
            return False
        if (self.line_gaps is None) != (other.line_gaps is None):
            return False
        return self.line_gaps is None or np.array_equal(self.line_gaps, other.line_gaps)


def _numbers(tokens):
    vals = []
    for tok in tokens:
        try:
            vals.append(int(tok))
        except ValueError:
            try:
                vals.append(float(tok))
            except ValueError:
                raise ParseError(f"not a number: {tok!r}") from None
    if all(isinstance(v, int) for v in vals):
        return np.array(vals, dtype=np.int64)
    return np.array(vals, dtype=np.float64)


def _check_n(n):
    if n % 2:
        raise OddTeamCount(f"team count must be even, got {n}")
    if n < 4:
        raise ParseError(f"need at least 4 teams, got {n}")


def find_metric_violation(dist, eps=0.0):
    """Lexicographically smallest (i, j, l) with d(i,l) > d(i,j) + d(j,l) + eps, or None."""
    tol = eps + (0.0 if np.issubdtype(dist.dtype, np.integer) and eps == 0 else TOL)
    d = dist.astype(np.float64)
    best = None
    for j in range(d.shape[0]):
        excess = d - (d[:, j][:, None] + d[j, :][None, :])
        hits = np.argwhere(excess > tol)
        if len(hits):
            i, l = hits[0]
            cand = (int(i), j, int(l))
            if best is None or cand < best[0]:
                best = (cand, float(excess[i, l]))
    return best


def validate_dist(dist, eps=0.0):
    n = dist.shape[0]
    if dist.shape != (n, n):
        raise ParseError("distance matrix must be square")
    if np.any(np.diag(dist) != 0):
        raise ParseError("distance matrix must have a zero diagonal")
    if np.any(dist < 0):
        raise ParseError("distances must be nonnegative")
    if not np.array_equal(dist, dist.T):
        raise ParseError("distance matrix must be symmetric")
    hit = find_metric_violation(dist, eps)
    if hit is not None:
        raise MetricViolation(*hit)


def from_matrix(dist, name="", eps=0.0, coords=None):
    dist = np.asarray(dist)
    if not np.issubdtype(dist.dtype, np.integer):
        dist = dist.astype(np.float64)
        if np.all(np.mod(dist, 1) == 0) and np.all(np.abs(dist) < 2**62):
            dist = dist.astype(np.int64)
    _check_n(dist.shape[0])
    validate_dist(dist, eps)
    return Instance(dist.shape[0], dist, None, name, coords)


def from_gaps(gaps, name=""):
    gaps = np.asarray(gaps)
    if not np.issubdtype(gaps.dtype, np.integer):
        gaps = gaps.astype(np.float64)
    if np.any(gaps < 0):
        raise ParseError("line gaps must be nonnegative")
    n = len(gaps) + 1
    _check_n(n)
    pos = np.concatenate([[0], np.cumsum(gaps)])
    dist = np.abs(pos[:, None] - pos[None, :])
    return Instance(n, dist, gaps.copy(), name)


def from_coords(xy, rounding="none", name="", eps=0.0):
    xy = np.asarray(xy, dtype=np.float64)
    diff = xy[:, None, :] - xy[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    if rounding == "nint":
        dist = np.floor(dist + 0.5).astype(np.int64)
    elif rounding != "none":
        raise ParseError(f"unknown rounding {rounding!r}")
    _check_n(len(xy))
    validate_dist(dist, eps)
    return Instance(len(xy), dist, None, name, xy)


def parse_instance(text, format="auto", rounding="none", eps=0.0, name=""):
    """Parse an instance from text in matrix, coords or line format."""
    tokens = text.replace("\r", " ").split()
    if not tokens:
        raise ParseError("empty instance")
    try:
        n = int(tokens[0])
    except ValueError:
        raise ParseError(f"first token must be the team count, got {tokens[0]!r}") from None
    if n <= 0:
        raise ParseError(f"team count must be positive, got {n}")
    body = tokens[1:]
    if format == "auto":
        sizes = {"matrix": n * n, "coords": 2 * n, "line": n - 1}
        matches = [f for f in FORMATS if sizes[f] == len(body)]
        if len(matches) != 1:
            raise ParseError(f"cannot infer format from {len(body)} values for n={n}")
        format = matches[0]
    if format not in FORMATS:
        raise ParseError(f"unknown format {format!r}")
    _check_n(n)
    vals = _numbers(body)
    if format == "matrix":
        if len(vals) != n * n:
            raise ParseError(f"matrix format needs {n * n} values, got {len(vals)}")
        return from_matrix(vals.reshape(n, n), name, eps)
    if format == "coords":
        if len(vals) != 2 * n:
            raise ParseError(f"coords format needs {2 * n} values, got {len(vals)}")
        return from_coords(vals.reshape(n, 2), rounding, name, eps)
    if len(vals) != n - 1:
        raise ParseError(f"line format needs {n - 1} gaps, got {len(vals)}")
    return from_gaps(vals, name)


def read_instance(path, format="auto", rounding="none", eps=0.0):
    from pathlib import Path

    p = Path(path)
    return parse_instance(p.read_text(encoding="utf-8"), format, rounding, eps, name=p.stem)


def format_instance(inst, format=None):
    """Serialize to text; line instances default to the gap format."""
    if format is None:
        format = "line" if inst.is_line else "matrix"

    def fmt(v):
        return str(int(v)) if float(v).is_integer() else repr(float(v))

    if format == "line":
        if inst.line_gaps is None:
            raise ParseError("not a line instance")
        return f"{inst.n}\n" + " ".join(fmt(g) for g in inst.line_gaps) + "\n"
    if format == "coords":
        if inst.coords is None:
            raise ParseError("instance carries no coordinates")
        rows = [f"{fmt(x)} {fmt(y)}" for x, y in inst.coords]
        return f"{inst.n}\n" + "\n".join(rows) + "\n"
    rows = [" ".join(fmt(v) for v in row) for row in inst.dist]
    return f"{inst.n}\n" + "\n".join(rows) + "\n"


def generate_random_metric(n, seed, side=1000.0):
    """Uniform points in a square with Euclidean distances."""
    _check_n(n)
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0.0, side, size=(n, 2))
    diff = xy[:, None, :] - xy[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    return Instance(n, dist, None, f"rand{n}_s{seed}", xy)


def unit_line(n):
    return from_gaps(np.ones(n - 1, dtype=np.int64), name=f"line{n}")


def random_line(n, seed, high=10):
    rng = np.random.default_rng(seed)
    return from_gaps(rng.integers(0, high + 1, size=n - 1), name=f"line{n}_s{seed}")
