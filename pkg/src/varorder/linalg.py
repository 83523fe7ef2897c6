"""Hermitian matrices, spectral decompositions, and the functional calculus.

All heavy objects are immutable: construction validates the defining
invariants, copies the input, and freezes the underlying arrays.  The
eigensolver is a hand-rolled cyclic Jacobi iteration for complex Hermitian
matrices so the decision procedures do not depend on an external solver;
``numpy.linalg.eigh`` is used only as an independent oracle in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import (
    DimensionMismatchError,
    DomainError,
    EigensolverError,
    InternalConsistencyError,
    NotHermitianError,
    ValidationError,
)
from .functions import FunctionTable

HERMITIAN_RTOL = 1e-10
GROUP_TOL_SCALE = 1e-8
JACOBI_OFF_SCALE = 1e-12
JACOBI_MAX_SWEEPS = 100
UNITARY_TOL = 1e-10


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_complex_matrix(obj, dim: int | None = None) -> np.ndarray:
    """Coerce to a square complex128 array with finite entries."""
    m = np.asarray(obj, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {m.shape[0]}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValidationError("matrix entries must be finite")
    return m


@dataclass(frozen=True, eq=False)
class HermitianObservable:
    """A Hermitian matrix; the input is symmetrized once it passes validation."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_complex_matrix(self.matrix)
        scale = max(1.0, float(np.abs(m).max()) if m.size else 1.0)
        dev = float(np.abs(m - m.conj().T).max()) if m.size else 0.0
        if dev > HERMITIAN_RTOL * scale:
            raise NotHermitianError(
                f"matrix is not Hermitian: max |M - M*| = {dev:.3e} "
                f"exceeds {HERMITIAN_RTOL:.0e} * max(1, |M|_max) = {HERMITIAN_RTOL * scale:.3e}"
            )
        object.__setattr__(self, "matrix", _freeze((m + m.conj().T) / 2.0))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    @classmethod
    def from_diag(cls, values) -> "HermitianObservable":
        return cls(np.diag(np.asarray(values, dtype=np.float64)))

    @classmethod
    def identity(cls, dim: int) -> "HermitianObservable":
        return cls(np.eye(dim))

    def spectral(self) -> "SpectralDecomposition":
        """Eigendecomposition at the default grouping tolerance, cached."""
        return eigendecompose(self)


def _as_observable(a) -> HermitianObservable:
    return a if isinstance(a, HermitianObservable) else HermitianObservable(a)


@dataclass(frozen=True, eq=False)
class SpectralGroup:
    """One eigenvalue cluster: value, orthogonal projector, rank, and a basis."""

    eigenvalue: float
    projector: np.ndarray
    rank: int
    basis: np.ndarray  # dim x rank, orthonormal columns spanning ran(projector)

    def __post_init__(self):
        object.__setattr__(self, "projector", _freeze(np.asarray(self.projector, np.complex128)))
        object.__setattr__(self, "basis", _freeze(np.asarray(self.basis, np.complex128)))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Grouped eigendecomposition with strictly increasing eigenvalues."""

    groups: tuple[SpectralGroup, ...]
    source_dim: int

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        lams = self.eigenvalues
        if len(lams) and np.any(np.diff(lams) <= 0):
            raise ValidationError("group eigenvalues must be strictly increasing")
        if sum(g.rank for g in self.groups) != self.source_dim:
            raise ValidationError("group ranks must sum to the source dimension")
        for g in self.groups:
            if g.projector.shape != (self.source_dim, self.source_dim):
                raise ValidationError("projector shape does not match source dimension")
            if g.basis.shape != (self.source_dim, g.rank):
                raise ValidationError("basis shape does not match rank")

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([g.eigenvalue for g in self.groups], dtype=np.float64)

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(g.rank for g in self.groups)

    @property
    def diameter(self) -> float:
        lams = self.eigenvalues
        return float(lams[-1] - lams[0]) if len(lams) else 0.0

    def matrix(self) -> np.ndarray:
        """Reassemble the source matrix from the grouped decomposition."""
        out = np.zeros((self.source_dim, self.source_dim), dtype=np.complex128)
        for g in self.groups:
            out += g.eigenvalue * g.projector
        return out


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int, skip: float) -> None:
    # One Jacobi rotation zeroing a[p, q]; the complex phase is folded into
    # the Givens block so the 2x2 pivot reduces to the real symmetric case.
    apq = a[p, q]
    r = abs(apq)
    if r <= skip:
        return
    phase = apq / r
    theta = 0.5 * math.atan2(2.0 * r, float((a[p, p] - a[q, q]).real))
    c, s = math.cos(theta), math.sin(theta)
    cp, cq = a[:, p].copy(), a[:, q].copy()
    a[:, p] = c * cp + s * np.conj(phase) * cq
    a[:, q] = -s * phase * cp + c * cq
    rp, rq = a[p, :].copy(), a[q, :].copy()
    a[p, :] = c * rp + s * phase * rq
    a[q, :] = -s * np.conj(phase) * rp + c * rq
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real
    vp, vq = v[:, p].copy(), v[:, q].copy()
    v[:, p] = c * vp + s * np.conj(phase) * vq
    v[:, q] = -s * phase * vp + c * vq


def jacobi_eigh(matrix, max_sweeps: int = JACOBI_MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.

    Cyclic Jacobi sweeps run until the off-diagonal Frobenius norm drops
    below ``1e-12 * |A|_F`` or the sweep cap is hit, in which case an
    :class:`EigensolverError` carrying the residual is raised.
    """
    a = np.array(matrix, dtype=np.complex128)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    if n == 1:
        return np.array([a[0, 0].real]), v
    target = JACOBI_OFF_SCALE * float(np.linalg.norm(a))
    skip = target / (2.0 * n)
    for _ in range(max_sweeps):
        if _offdiag_norm(a) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(a, v, p, q, skip)
    else:
        residual = _offdiag_norm(a)
        if residual > target:
            raise EigensolverError(
                f"Jacobi iteration did not converge in {max_sweeps} sweeps: "
                f"off-diagonal residual {residual:.3e} > target {target:.3e}",
                residual=residual,
            )
    w = a.diagonal().real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def _decompose(obs: HermitianObservable, group_tol: float) -> SpectralDecomposition:
    w, v = jacobi_eigh(obs.matrix)
    n = obs.dim
    groups: list[SpectralGroup] = []
    spread_sq = 0.0
    start = 0
    for i in range(1, n + 1):
        if i == n or w[i] - w[i - 1] > group_tol:
            basis = v[:, start:i]
            lam = float(w[start:i].mean())
            spread_sq += float(np.sum((w[start:i] - lam) ** 2))
            proj = basis @ basis.conj().T
            proj = (proj + proj.conj().T) / 2.0
            groups.append(SpectralGroup(lam, proj, i - start, basis))
            start = i
    dec = SpectralDecomposition(tuple(groups), n)
    recon_err = float(np.linalg.norm(dec.matrix() - obs.matrix))
    allowed = math.sqrt(spread_sq) + GROUP_TOL_SCALE * max(1.0, obs.frobenius_norm)
    if recon_err > allowed:
        raise InternalConsistencyError(
            f"spectral reconstruction off by {recon_err:.3e} (allowed {allowed:.3e})"
        )
    return dec


def eigendecompose(A, group_tol: float | None = None) -> SpectralDecomposition:
    """Grouped spectral decomposition of a Hermitian observable.

    Eigenvalues within ``group_tol`` of each other are merged into a single
    group carrying their mean and the orthogonal projector onto the joint
    eigenspace.  The default tolerance is ``1e-8 * max(1, |A|_F)``.
    Decompositions are cached on the (immutable) observable per tolerance.
    """
    obs = _as_observable(A)
    if group_tol is None:
        group_tol = GROUP_TOL_SCALE * max(1.0, obs.frobenius_norm)
    key = float(group_tol)
    cache = obs.__dict__.get("_spectral_cache")
    if cache is None:
        cache = {}
        object.__setattr__(obs, "_spectral_cache", cache)
    if key not in cache:
        cache[key] = _decompose(obs, key)
    return cache[key]


def _table_value(f, lam: float, match_tol: float) -> float:
    if isinstance(f, FunctionTable):
        return f.value_at(lam, tol=match_tol)
    if isinstance(f, Mapping):
        best = None
        for key, val in f.items():
            d = abs(float(key) - lam)
            if best is None or d < best[0]:
                best = (d, val)
        if best is None or best[0] > match_tol:
            raise DomainError(f"function table has no point within {match_tol:.3e} of eigenvalue {lam!r}")
        return float(best[1])
    try:
        return float(f(lam))
    except DomainError:
        raise
    except Exception as exc:  # noqa: BLE001 - surface as a domain failure
        raise DomainError(f"function undefined at eigenvalue {lam!r}: {exc}") from exc


def apply_function(
    decomposition: SpectralDecomposition,
    f: FunctionTable | Mapping | Callable[[float], float],
    match_tol: float | None = None,
) -> HermitianObservable:
    """Functional calculus: sum of ``f(eigenvalue) * projector`` over groups.

    ``f`` may be a :class:`FunctionTable`, a mapping from eigenvalue to value
    (matched within ``match_tol``), or a plain callable.
    """
    lams = decomposition.eigenvalues
    if match_tol is None:
        scale = float(np.abs(lams).max()) if len(lams) else 1.0
        match_tol = GROUP_TOL_SCALE * max(1.0, scale)
    out = np.zeros((decomposition.source_dim, decomposition.source_dim), dtype=np.complex128)
    for g in decomposition.groups:
        out += _table_value(f, g.eigenvalue, match_tol) * g.projector
    return HermitianObservable((out + out.conj().T) / 2.0)


def commutator_norm(A, B) -> float:
    """Frobenius norm of ``AB - BA``."""
    a, b = _as_observable(A), _as_observable(B)
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return float(np.linalg.norm(a.matrix @ b.matrix - b.matrix @ a.matrix))


def default_pair_tol(A: HermitianObservable, B: HermitianObservable) -> float:
    """Single decision tolerance knob: ``1e-8 * max(1, |A|_F, |B|_F)``."""
    return GROUP_TOL_SCALE * max(1.0, A.frobenius_norm, B.frobenius_norm)


def loewner_leq(A, B, tol: float | None = None) -> bool:
    """Spectral-order comparison: smallest eigenvalue of ``B - A`` is ``>= -tol``."""
    a, b = _as_observable(A), _as_observable(B)
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if tol is None:
        tol = default_pair_tol(a, b)
    w, _ = jacobi_eigh(b.matrix - a.matrix)
    return bool(w[0] >= -tol)


@dataclass(frozen=True, eq=False)
class UnitaryMap:
    """A unitary matrix, optionally flagged as acting antiunitarily.

    An antiunitary map sends an observable to ``U conj(A) U*``, where the
    conjugate is taken entrywise before the unitary rotation.
    """

    matrix: np.ndarray
    antiunitary: bool = field(default=False)

    def __post_init__(self):
        u = as_complex_matrix(self.matrix)
        dev = float(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max())
        if dev > UNITARY_TOL:
            raise ValidationError(f"matrix is not unitary: max |U*U - I| = {dev:.3e}")
        object.__setattr__(self, "matrix", _freeze(u))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, A) -> HermitianObservable:
        obs = _as_observable(A)
        if obs.dim != self.dim:
            raise DimensionMismatchError(f"dimension mismatch: {obs.dim} vs {self.dim}")
        x = obs.matrix.conj() if self.antiunitary else obs.matrix
        return HermitianObservable(self.matrix @ x @ self.matrix.conj().T)
