"""Declarative descriptions of probability laws on R^d.

A DistributionSpec is a small tree of constructors (Gaussian, PointMass,
UniformBox, Laplace1D, Empirical, Convolution, AffineMap,
StandardizedIIDSum, Product).  Every node validates its own invariants on
construction and knows its dimension.  Specs are plain data: evaluation of
the characteristic function lives in ``charfn``, sampling in ``montecarlo``.

Each spec has a canonical JSON-compatible form, e.g.::

    {"type": "gaussian", "mean": [0.0], "cov": [[1.0]]}
    {"type": "convolution", "parts": [ ... ]}

``spec_to_dict`` / ``spec_from_dict`` convert both ways; ``load_spec`` reads
and validates a file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError

WEIGHT_SUM_TOL = 1e-12
COV_EIG_TOL = 1e-12


def _vector(x, name: str) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1 or v.size == 0 or not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} must be a finite 1-d vector, got {x!r}")
    return v


class DistributionSpec:
    """Base class; concrete specs define ``dim`` and a JSON form."""

    @property
    def dim(self) -> int:
        raise NotImplementedError


@dataclass(frozen=True)
class Gaussian(DistributionSpec):
    """Normal law with mean vector and symmetric PSD covariance."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = _vector(self.mean, "mean")
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise ValidationError(
                f"covariance shape {cov.shape} does not match mean of length {mean.size}"
            )
        scale = max(1.0, float(np.max(np.abs(cov))))
        if not np.all(np.abs(cov - cov.T) <= 1e-12 * scale):
            raise ValidationError("covariance must be symmetric")
        cov = 0.5 * (cov + cov.T)
        eigs = np.linalg.eigvalsh(cov)
        tol = COV_EIG_TOL * max(float(np.trace(cov)), 0.0)
        if eigs.min() < -tol:
            raise ValidationError(
                f"covariance must be PSD; smallest eigenvalue {eigs.min():g}"
            )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    def is_positive_definite(self) -> bool:
        eigs = np.linalg.eigvalsh(self.cov)
        return bool(eigs.min() > COV_EIG_TOL * max(float(np.trace(self.cov)), 1e-300))


@dataclass(frozen=True)
class PointMass(DistributionSpec):
    """Unit mass at a single point."""

    location: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "location", _vector(self.location, "location"))

    @property
    def dim(self) -> int:
        return self.location.size


@dataclass(frozen=True)
class UniformBox(DistributionSpec):
    """Uniform law on the axis-aligned box [lo_1,hi_1] x ... x [lo_d,hi_d]."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = _vector(self.lo, "lo")
        hi = _vector(self.hi, "hi")
        if lo.size != hi.size:
            raise ValidationError("lo and hi must have equal length")
        if not np.all(hi > lo):
            raise ValidationError("hi must exceed lo componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size


@dataclass(frozen=True)
class Laplace1D(DistributionSpec):
    """Symmetric Laplace law on R with density exp(-|x|/scale)/(2*scale)."""

    scale: float

    def __post_init__(self):
        s = float(self.scale)
        if not (s > 0 and np.isfinite(s)):
            raise ValidationError(f"scale must be positive, got {self.scale!r}")
        object.__setattr__(self, "scale", s)

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class Empirical(DistributionSpec):
    """Finite discrete law: atoms at ``points`` with the given weights.

    Weights must be nonnegative and sum to 1 within 1e-12; they are stored
    renormalized so downstream evaluations treat them as exact.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0 or not np.all(np.isfinite(pts)):
            raise ValidationError("points must be a nonempty list of finite vectors")
        w = _vector(self.weights, "weights")
        if w.size != pts.shape[0]:
            raise ValidationError("weights length must match number of points")
        if np.any(w < 0):
            raise ValidationError("weights must be nonnegative")
        total = float(np.sum(w))
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError(f"weights must sum to 1 within 1e-12, got {total!r}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w / total)

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class Convolution(DistributionSpec):
    """Law of the sum of independent draws from each part."""

    parts: tuple[DistributionSpec, ...]

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValidationError("convolution needs at least one part")
        d = parts[0].dim
        for p in parts:
            if p.dim != d:
                raise ValidationError(
                    f"convolution parts must share dimension ({p.dim} != {d})"
                )
        object.__setattr__(self, "parts", parts)

    @property
    def dim(self) -> int:
        return self.parts[0].dim


@dataclass(frozen=True)
class AffineMap(DistributionSpec):
    """Law of A X + b where X follows ``inner``."""

    matrix: np.ndarray
    shift: np.ndarray
    inner: DistributionSpec

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=float)
        if a.ndim != 2 or not np.all(np.isfinite(a)):
            raise ValidationError("matrix must be a finite 2-d array")
        b = _vector(self.shift, "shift")
        if a.shape[0] != b.size:
            raise ValidationError("shift length must match matrix output dimension")
        if a.shape[1] != self.inner.dim:
            raise ValidationError(
                f"matrix input dimension {a.shape[1]} does not match inner dim {self.inner.dim}"
            )
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "shift", b)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class StandardizedIIDSum(DistributionSpec):
    """Law of (X_1 + ... + X_n)/sqrt(n) for i.i.d. draws from ``base``.

    The base must be one-dimensional with mean 0 and variance 1.  That
    standardization is declared by the caller and is not inferred or
    checked; a wrong declaration silently shifts/scales the limit.
    """

    base: DistributionSpec
    n: int

    def __post_init__(self):
        if self.base.dim != 1:
            raise ValidationError("standardized iid sum requires a 1-d base")
        n = int(self.n)
        if n < 1:
            raise ValidationError(f"n must be >= 1, got {self.n!r}")
        object.__setattr__(self, "n", n)

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class Product(DistributionSpec):
    """Independent product of 1-d factors, one per coordinate."""

    factors: tuple[DistributionSpec, ...] = field(default=())

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ValidationError("product needs at least one factor")
        for f in factors:
            if f.dim != 1:
                raise ValidationError("product factors must all be 1-d")
        object.__setattr__(self, "factors", factors)

    @property
    def dim(self) -> int:
        return len(self.factors)


# ---------------------------------------------------------------------------
# JSON form
# ---------------------------------------------------------------------------

def spec_to_dict(spec: DistributionSpec) -> dict:
    """Canonical JSON-compatible dict for a spec tree."""
    if isinstance(spec, Gaussian):
        return {"type": "gaussian", "mean": spec.mean.tolist(), "cov": spec.cov.tolist()}
    if isinstance(spec, PointMass):
        return {"type": "point_mass", "location": spec.location.tolist()}
    if isinstance(spec, UniformBox):
        return {"type": "uniform_box", "lo": spec.lo.tolist(), "hi": spec.hi.tolist()}
    if isinstance(spec, Laplace1D):
        return {"type": "laplace", "scale": spec.scale}
    if isinstance(spec, Empirical):
        return {
            "type": "empirical",
            "points": spec.points.tolist(),
            "weights": spec.weights.tolist(),
        }
    if isinstance(spec, Convolution):
        return {"type": "convolution", "parts": [spec_to_dict(p) for p in spec.parts]}
    if isinstance(spec, AffineMap):
        return {
            "type": "affine_map",
            "matrix": spec.matrix.tolist(),
            "shift": spec.shift.tolist(),
            "inner": spec_to_dict(spec.inner),
        }
    if isinstance(spec, StandardizedIIDSum):
        return {
            "type": "standardized_iid_sum",
            "base": spec_to_dict(spec.base),
            "n": spec.n,
        }
    if isinstance(spec, Product):
        return {"type": "product", "factors": [spec_to_dict(f) for f in spec.factors]}
    raise ValidationError(f"unknown spec class {type(spec).__name__}")


def _require(d: dict, *keys: str) -> list:
    missing = [k for k in keys if k not in d]
    if missing:
        raise ValidationError(f"spec of type {d.get('type')!r} missing fields {missing}")
    return [d[k] for k in keys]


def spec_from_dict(d: dict) -> DistributionSpec:
    """Parse and validate the canonical dict form."""
    if not isinstance(d, dict) or "type" not in d:
        raise ValidationError(f"spec must be an object with a 'type' field, got {d!r}")
    t = d["type"]
    try:
        if t == "gaussian":
            mean, cov = _require(d, "mean", "cov")
            return Gaussian(mean=np.asarray(mean, float), cov=np.asarray(cov, float))
        if t == "point_mass":
            (loc,) = _require(d, "location")
            return PointMass(location=np.asarray(loc, float))
        if t == "uniform_box":
            lo, hi = _require(d, "lo", "hi")
            return UniformBox(lo=np.asarray(lo, float), hi=np.asarray(hi, float))
        if t == "laplace":
            (scale,) = _require(d, "scale")
            return Laplace1D(scale=float(scale))
        if t == "empirical":
            pts, w = _require(d, "points", "weights")
            return Empirical(points=np.asarray(pts, float), weights=np.asarray(w, float))
        if t == "convolution":
            (parts,) = _require(d, "parts")
            return Convolution(parts=tuple(spec_from_dict(p) for p in parts))
        if t == "affine_map":
            a, b, inner = _require(d, "matrix", "shift", "inner")
            return AffineMap(
                matrix=np.asarray(a, float),
                shift=np.asarray(b, float),
                inner=spec_from_dict(inner),
            )
        if t == "standardized_iid_sum":
            base, n = _require(d, "base", "n")
            return StandardizedIIDSum(base=spec_from_dict(base), n=int(n))
        if t == "product":
            (factors,) = _require(d, "factors")
            return Product(factors=tuple(spec_from_dict(f) for f in factors))
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed {t!r} spec: {exc}") from exc
    raise ValidationError(f"unknown spec type {t!r}")


def load_spec(path: str | Path) -> DistributionSpec:
    """Read a spec JSON file, validating it on load."""
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"spec file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"spec file {p} is not valid JSON: {exc}") from exc
    return spec_from_dict(data)


def save_spec(spec: DistributionSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=2, sort_keys=True) + "\n")
