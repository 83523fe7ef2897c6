"""Finite function tables and their Lipschitz extensions to the real line."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError, ValidationError

DEFAULT_LIP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class FunctionTable:
    """A real function given on finitely many points.

    ``points`` is a tuple of ``(x, f(x))`` pairs with strictly increasing
    first coordinates.  When ``lipschitz_bound`` is supplied, construction
    verifies ``|f(x) - f(y)| <= bound * |x - y| + lip_tol`` on all pairs.
    """

    points: tuple[tuple[float, float], ...]
    lipschitz_bound: float | None = None
    lip_tol: float = DEFAULT_LIP_TOL

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        if not pts:
            raise ValidationError("function table needs at least one point")
        xs = np.array([p[0] for p in pts])
        if np.any(np.diff(xs) <= 0):
            raise ValidationError("table points must have strictly increasing locations")
        object.__setattr__(self, "points", pts)
        if self.lipschitz_bound is not None:
            bad = _lipschitz_violation(pts, float(self.lipschitz_bound), self.lip_tol)
            if bad is not None:
                (x0, y0), (x1, y1) = bad
                raise ValidationError(
                    f"table is not {self.lipschitz_bound}-Lipschitz: "
                    f"|f({x0}) - f({x1})| = {abs(y0 - y1)!r} > bound * {abs(x0 - x1)!r}"
                )

    @classmethod
    def from_mapping(cls, mapping, lipschitz_bound: float | None = None) -> "FunctionTable":
        pts = tuple(sorted((float(k), float(v)) for k, v in mapping.items()))
        return cls(pts, lipschitz_bound)

    @classmethod
    def from_values(cls, xs, ys, lipschitz_bound: float | None = None) -> "FunctionTable":
        return cls(tuple(zip(map(float, xs), map(float, ys))), lipschitz_bound)

    @property
    def locations(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])

    def lipschitz_constant(self) -> float:
        """Smallest constant c with |f(x)-f(y)| <= c|x-y| on the table points."""
        xs, ys = self.locations, self.values
        if len(xs) < 2:
            return 0.0
        dx = np.abs(xs[:, None] - xs[None, :])
        dy = np.abs(ys[:, None] - ys[None, :])
        mask = dx > 0
        return float((dy[mask] / dx[mask]).max())

    def value_at(self, x: float, tol: float = 1e-8) -> float:
        """Value at the table point nearest to ``x`` (within ``tol``)."""
        xs = self.locations
        i = int(np.argmin(np.abs(xs - x)))
        if abs(xs[i] - x) > tol:
            raise DomainError(
                f"no table point within {tol:.3e} of {x!r} (nearest is {xs[i]!r})"
            )
        return self.points[i][1]

    def __call__(self, x: float, tol: float = 1e-8) -> float:
        return self.value_at(x, tol=tol)


def _lipschitz_violation(pts, c: float, tol: float):
    worst = None
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            excess = abs(pts[i][1] - pts[j][1]) - c * abs(pts[i][0] - pts[j][0])
            if excess > tol and (worst is None or excess > worst[0]):
                worst = (excess, (pts[i], pts[j]))
    return worst[1] if worst else None


@dataclass(frozen=True, eq=False)
class LipschitzExtension:
    """The greatest c-Lipschitz extension of a table to the whole line.

    Evaluation takes the pointwise minimum of the cones ``f(x_i) + c|x - x_i|``.
    This is the upper extension; negate the table values (and the result) to
    obtain the lower one.  ``flavor`` records the convention.
    """

    table: FunctionTable
    constant: float
    flavor: str = "upper"

    def __post_init__(self):
        if self.constant < 0:
            raise ValidationError("Lipschitz constant must be nonnegative")

    def __call__(self, x):
        xs = self.table.locations
        ys = self.table.values
        arr = np.asarray(x, dtype=np.float64)
        cones = ys + self.constant * np.abs(arr[..., None] - xs)
        out = cones.min(axis=-1)
        return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def mcshane_extend(f: FunctionTable, c: float, lip_tol: float = DEFAULT_LIP_TOL) -> LipschitzExtension:
    """Extend a c-Lipschitz table to the line, keeping the constant.

    Raises :class:`PreconditionError` naming a violating pair when the table
    is not c-Lipschitz to within ``lip_tol``.
    """
    bad = _lipschitz_violation(f.points, float(c), lip_tol)
    if bad is not None:
        (x0, y0), (x1, y1) = bad
        raise PreconditionError(
            f"table is not {c}-Lipschitz: |f({x0}) - f({x1})| = {abs(y0 - y1)!r} "
            f"exceeds {c} * |{x0} - {x1}| = {c * abs(x0 - x1)!r}",
            witness=bad,
        )
    return LipschitzExtension(f, float(c))
