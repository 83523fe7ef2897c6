"""Structure of the variance order: upper bounds, lower sets, and symmetries.

The routines here package the finite-dimensional order theory: commuting
pairs admit a joint upper bound built from shifted blocks, the two-or-fewer
point spectrum elements below a fixed observable form threshold families,
pairwise expectation gaps of those elements determine the spectrum up to
reflection, and order automorphisms are exactly scaled (anti)unitary
conjugations.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable

import numpy as np

from .errors import (
    DegenerateInputError,
    DimensionMismatchError,
    InternalConsistencyError,
    PreconditionError,
    ReconstructionError,
    ValidationError,
)
from .functions import FunctionTable
from .linalg import (
    GROUP_TOL_SCALE,
    HermitianObservable,
    UnitaryMap,
    _as_observable,
    _freeze,
    apply_function,
    commutator_norm,
    default_pair_tol,
    eigendecompose,
    jacobi_eigh,
)
from .order import decide_order
from .sampling import as_rng, random_hermitian, random_lipschitz_values

QMATRIX_TIE_RTOL = 1e-9


def block_shift_upper_bound(A, B) -> HermitianObservable:
    """Sum of B's diagonal blocks on A's eigenspaces, each shifted apart.

    With blocks ``B_j = P_j B P_j`` and ``beta = 4 tau + diam(spec A) + 1``
    (``tau`` the largest block spectral norm), returns
    ``C = sum_j (B_j + j beta P_j)`` with ``j`` counting eigenspaces from 1
    upward.  ``A`` is always a 1-Lipschitz function of ``C``; ``B`` is one
    exactly when the pair commutes, which :func:`joint_upper_bound` checks.
    """
    a, b = _as_observable(A), _as_observable(B)
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimension mismatch: {a.dim} vs {b.dim}")
    dec = eigendecompose(a)
    blocks = []
    tau = 0.0
    for g in dec.groups:
        m = g.basis.conj().T @ b.matrix @ g.basis
        m = (m + m.conj().T) / 2.0
        w, _ = jacobi_eigh(m)
        tau = max(tau, float(np.abs(w).max()))
        blocks.append(m)
    beta = 4.0 * tau + dec.diameter + 1.0
    out = np.zeros((a.dim, a.dim), dtype=np.complex128)
    for j, (g, m) in enumerate(zip(dec.groups, blocks), start=1):
        out += g.basis @ (m + j * beta * np.eye(g.rank)) @ g.basis.conj().T
    return HermitianObservable((out + out.conj().T) / 2.0)


def joint_upper_bound(A, B, tol: float | None = None) -> HermitianObservable:
    """An observable above both members of a commuting pair.

    Raises :class:`PreconditionError` carrying the commutator norm when the
    pair does not commute to within ``tol``; no joint upper bound exists in
    that case.
    """
    a, b = _as_observable(A), _as_observable(B)
    if tol is None:
        tol = default_pair_tol(a, b)
    comm = commutator_norm(a, b)
    if comm > tol:
        raise PreconditionError(
            f"observables do not commute: |AB - BA|_F = {comm!r} exceeds tol {tol:.3e}",
            witness=comm,
        )
    return block_shift_upper_bound(a, b)


@dataclass(frozen=True, eq=False)
class TwoPointFamily:
    """Threshold family ``{t E : 0 <= t <= threshold}`` below a fixed observable."""

    eigenvalues: tuple[float, ...]
    projector: np.ndarray
    threshold: float

    def __post_init__(self):
        if not self.eigenvalues:
            raise ValidationError("family needs a nonempty eigenvalue subset")
        if not self.threshold > 0:
            raise ValidationError(f"threshold must be positive, got {self.threshold!r}")
        object.__setattr__(self, "eigenvalues", tuple(float(x) for x in self.eigenvalues))
        object.__setattr__(self, "projector", _freeze(np.asarray(self.projector, np.complex128)))

    def observable(self, t: float) -> HermitianObservable:
        return HermitianObservable(float(t) * self.projector)


def two_point_lower_set(A) -> tuple[TwoPointFamily, ...]:
    """All maximal families ``t E`` below ``A`` with at most two spectrum points.

    One family per subset of the spectrum (complement pairs deduplicated:
    the smaller subset is kept, ties go to the one containing the lowest
    eigenvalue).  The threshold is the smallest gap from the subset to its
    complement; members with ``t`` beyond it are no longer below ``A``.
    """
    a = _as_observable(A)
    dec = eigendecompose(a)
    m = len(dec.groups)
    if m == 1:
        raise DegenerateInputError(
            "spectrum has a single point; everything below it is scalar"
        )
    lams = dec.eigenvalues
    families = []
    for r in range(1, m):
        if r > m - r:
            break
        for omega in combinations(range(m), r):
            if 2 * r == m and 0 not in omega:
                continue
            rest = [i for i in range(m) if i not in omega]
            t = min(abs(lams[i] - lams[j]) for i in omega for j in rest)
            proj = np.zeros((a.dim, a.dim), dtype=np.complex128)
            for i in omega:
                proj += dec.groups[i].projector
            families.append(
                TwoPointFamily(tuple(lams[i] for i in omega), proj, float(t))
            )
    return tuple(families)


@dataclass(frozen=True, eq=False)
class QMatrix:
    """Symmetric nonnegative gap matrix with zero diagonal, n >= 4."""

    values: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.values, dtype=np.float64)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValidationError(f"expected a square matrix, got shape {q.shape}")
        if q.shape[0] < 4:
            raise DegenerateInputError(f"gap matrix needs n >= 4, got n = {q.shape[0]}")
        if not np.all(np.isfinite(q)):
            raise ValidationError("gap matrix entries must be finite")
        if np.abs(q - q.T).max() > 1e-12 * max(1.0, np.abs(q).max()):
            raise ValidationError("gap matrix must be symmetric")
        if np.abs(np.diag(q)).max() > 0:
            raise ValidationError("gap matrix diagonal must be zero")
        if q.min() < 0:
            raise ValidationError("gap matrix entries must be nonnegative")
        object.__setattr__(self, "values", _freeze((q + q.T) / 2.0))

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _enumerated_q(pts: np.ndarray) -> np.ndarray:
    # Brute-force cross-check over the extremal short maps on a finite chain:
    # each adjacent step is taken at full width or collapsed to zero, and at
    # least one step must collapse so the image has fewer points.
    n = len(pts)
    order = np.argsort(pts)
    steps = np.diff(pts[order])
    q = np.zeros((n, n))
    values = np.empty(n)
    for mask in range(2 ** (n - 1) - 1):  # all-ones (the identity) excluded
        kept = np.array([(mask >> i) & 1 for i in range(n - 1)], dtype=np.float64)
        values[order] = np.concatenate(([0.0], np.cumsum(kept * steps)))
        np.maximum(q, np.abs(values[:, None] - values[None, :]), out=q)
    return q


def q_matrix(spectrum, method: str = "closed") -> QMatrix:
    """Largest expectation gaps achievable below a spectrum with fewer points.

    For distinct points, entry ``(j, k)`` is ``|p_j - p_k|`` unless that is
    the full diameter, in which case it is ``diameter - min_gap``.  The
    ``"enumerate"`` method recomputes the matrix by brute force over clamp
    functions and verifies agreement with the closed form.
    """
    pts = np.asarray(spectrum, dtype=np.float64).ravel()
    n = len(pts)
    if n < 4:
        raise DegenerateInputError(f"spectrum needs at least 4 points, got {n}")
    s = np.sort(pts)
    min_gap = float(np.diff(s).min())
    if min_gap <= 0:
        raise ValidationError("spectrum points must be distinct")
    diam = float(s[-1] - s[0])
    dist = np.abs(pts[:, None] - pts[None, :])
    q = np.where(dist < diam, dist, diam - min_gap)
    np.fill_diagonal(q, 0.0)
    if method == "enumerate":
        q2 = _enumerated_q(pts)
        if np.abs(q - q2).max() > 1e-9 * max(1.0, diam):
            raise InternalConsistencyError(
                "closed-form gap matrix disagrees with the clamp enumeration"
            )
        q = q2
        np.fill_diagonal(q, 0.0)
    elif method != "closed":
        raise ValueError(f"unknown method {method!r}")
    return QMatrix(q)


def reconstruct_metric(Q) -> tuple[np.ndarray, np.ndarray]:
    """Recover pairwise distances and the spectrum from a gap matrix.

    The diameter-clipped entries are exactly those attaining the matrix
    maximum (at most three pairs); they are repaired via two-hop sums
    through third points, the diameter endpoint is identified from the
    attainment pattern, and point positions are read off as distances from
    that endpoint.  Returns ``(distances, spectrum)`` with the distance
    matrix indexed like ``Q`` and the spectrum sorted ascending, anchored
    at 0 (the configuration is unique up to reflection and translation).

    Raises :class:`ReconstructionError` when the attainment pattern or the
    round trip back through :func:`q_matrix` is inconsistent.
    """
    qm = Q if isinstance(Q, QMatrix) else QMatrix(Q)
    q = qm.values
    n = qm.n
    qmax = float(q.max())
    if qmax <= 0:
        raise ReconstructionError("gap matrix has no positive entries")
    tie = QMATRIX_TIE_RTOL * qmax
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if q[i, j] >= qmax - tie]
    if not 1 <= len(pairs) <= 3:
        raise ReconstructionError(
            f"matrix maximum attained {len(pairs)} times; expected 1, 2, or 3"
        )

    d = q.copy()
    for i, j in pairs:
        others = [k for k in range(n) if k not in (i, j)]
        d[i, j] = d[j, i] = min(q[i, k] + q[k, j] for k in others)

    counts = np.zeros(n, dtype=int)
    for i, j in pairs:
        counts[i] += 1
        counts[j] += 1
    if len(pairs) == 1:
        endpoints = pairs[0]
    elif len(pairs) == 2:
        repeated = np.flatnonzero(counts == 2)
        if len(repeated) != 1:
            raise ReconstructionError("two maximal pairs must share exactly one index")
        j1 = int(repeated[0])
        endpoints = (j1, int(np.argmax(d[j1])))
    else:
        repeated = np.flatnonzero(counts == 2)
        if len(repeated) != 2:
            raise ReconstructionError("three maximal pairs must share exactly two indices")
        endpoints = (int(repeated[0]), int(repeated[1]))

    anchor = min(endpoints)
    positions = d[anchor].copy()
    positions[anchor] = 0.0

    try:
        q_check = q_matrix(positions).values
    except (ValidationError, DegenerateInputError) as exc:
        raise ReconstructionError(f"recovered positions are degenerate: {exc}") from exc
    atol = 1e-9 * max(1.0, qmax)
    if np.abs(q_check - q).max() > atol:
        raise ReconstructionError("gap matrix is not consistent with any point configuration")
    dist_check = np.abs(positions[:, None] - positions[None, :])
    if np.abs(dist_check - d).max() > atol:
        raise ReconstructionError("corrected distances do not embed on a line")
    return d, np.sort(positions)


@dataclass(frozen=True, eq=False)
class AutomorphismSpec:
    """A candidate order automorphism: positive scale times (anti)unitary conjugation."""

    scale: float
    unitary: UnitaryMap

    def __post_init__(self):
        if not self.scale > 0:
            raise ValidationError(f"scale must be positive, got {self.scale!r}")

    def transform(self, A) -> HermitianObservable:
        return HermitianObservable(self.scale * self.unitary.apply(A).matrix)

    def __call__(self, A) -> HermitianObservable:
        return self.transform(A)


@dataclass(frozen=True, eq=False)
class AutomorphismReport:
    """Outcome of sampling-based automorphism verification."""

    passed: bool
    trials: int
    counterexample: tuple[HermitianObservable, HermitianObservable] | None = None
    counterexample_trial: int | None = None


def verify_automorphism(
    phi: AutomorphismSpec | Callable,
    trials: int,
    dim: int,
    seed=0,
    tol: float | None = None,
) -> AutomorphismReport:
    """Check that a map preserves the variance order in both directions.

    Samples ordered pairs (half of the form ``A = f(B)`` for a random
    1-Lipschitz ``f``, so the order holds; half independent, so it almost
    surely fails) and requires ``decide_order`` to agree before and after
    the map for both orderings of each pair.  Accepts an
    :class:`AutomorphismSpec` or any callable sending Hermitian observables
    to Hermitian observables, so ill-formed maps can be refuted; stops at
    the first counterexample.
    """
    if dim < 2:
        raise ValidationError(f"dimension must be at least 2, got {dim}")
    transform = phi.transform if isinstance(phi, AutomorphismSpec) else phi
    rng = as_rng(seed)
    for t in range(trials):
        b = random_hermitian(dim, rng)
        if t % 2 == 0:
            dec = eigendecompose(b)
            vals = random_lipschitz_values(dec.eigenvalues, rng)
            a = apply_function(dec, FunctionTable.from_values(dec.eigenvalues, vals))
        else:
            a = random_hermitian(dim, rng)
        fa = _as_observable(transform(a))
        fb = _as_observable(transform(b))
        for x, y, fx, fy in ((a, b, fa, fb), (b, a, fb, fa)):
            if decide_order(x, y, tol).holds != decide_order(fx, fy, tol).holds:
                return AutomorphismReport(False, t + 1, (a, b), t)
    return AutomorphismReport(True, trials)


def hinge_tables(lams: np.ndarray, pivot: float) -> tuple[FunctionTable, FunctionTable]:
    """The 1-Lipschitz pair that is flat on opposite sides of ``pivot``."""
    up = [max(x - pivot, 0.0) for x in lams]
    down = [min(x - pivot, 0.0) for x in lams]
    return (
        FunctionTable.from_values(lams, up, lipschitz_bound=1.0),
        FunctionTable.from_values(lams, down, lipschitz_bound=1.0),
    )


def two_spectrum_detector(A, method: str = "spectral", samples: int = 20, seed=0) -> bool:
    """Whether the spectrum has exactly two points.

    The ``"spectral"`` method counts eigenvalue groups.  The ``"order"``
    method answers purely order-theoretically: it samples elements above
    ``A`` (1-Lipschitz images plus the flat/identity hinge pair at each
    interior eigenvalue) and checks they form a chain; with three or more
    spectrum points the hinge pair is incomparable.
    """
    a = _as_observable(A)
    dec = eigendecompose(a)
    m = len(dec.groups)
    if method == "spectral":
        return m == 2
    if method != "order":
        raise ValueError(f"unknown method {method!r}")
    if m == 1:
        # everything below a scalar is scalar: the lower set is one class
        return False
    rng = as_rng(seed)
    lams = dec.eigenvalues
    members = []
    for _ in range(samples):
        vals = random_lipschitz_values(lams, rng)
        members.append(apply_function(dec, FunctionTable.from_values(lams, vals)))
    for i in range(1, m - 1):
        for table in hinge_tables(lams, float(lams[i])):
            members.append(apply_function(dec, table))
    for x, y in combinations(members, 2):
        if not (decide_order(x, y).holds or decide_order(y, x).holds):
            return False
    return True


def three_point_class_candidates(A, tol: float | None = None) -> list[HermitianObservable]:
    """All classes sharing the two-point lower set of a three-point observable.

    For gaps ``t1 <= t2`` between consecutive eigenvalues there are two such
    classes in general and a third exactly when the gaps tie (within
    ``tol``); all candidates are returned rather than picking one.
    """
    a = _as_observable(A)
    dec = eigendecompose(a)
    if len(dec.groups) != 3:
        raise DegenerateInputError(
            f"expected exactly 3 distinct eigenvalues, got {len(dec.groups)}"
        )
    if tol is None:
        tol = GROUP_TOL_SCALE * max(1.0, a.frobenius_norm)
    lams = dec.eigenvalues
    p0, p1, p2 = (g.projector for g in dec.groups)
    t1, t2 = float(lams[1] - lams[0]), float(lams[2] - lams[1])
    if t1 > t2:
        p0, p1, p2 = p2, p1, p0
        t1, t2 = t2, t1
    candidates = [
        HermitianObservable(t1 * p1 + (t1 + t2) * p2),
        HermitianObservable(t2 * p0 + (t1 + t2) * p1),
    ]
    if abs(t1 - t2) <= tol:
        candidates.append(HermitianObservable(2.0 * t1 * p0 + t1 * p2))
    return candidates
