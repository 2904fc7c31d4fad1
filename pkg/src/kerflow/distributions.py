"""Distribution kernels smeared against compactly supported grid functions,
reflection-positivity checks, quotient spaces, and contraction semigroups.

Everything here is real-valued and exact-translation based: test functions
live on uniform grids with a mandatory zero margin, flows act on them only as
integer-cell shifts along axes, and reflections are index flips on symmetric
grids.  That removes every resampling error from the semigroup and contraction
claims, which are the point of the module.  Kernels may have kink
singularities (exponential decay type) but nothing worse; quadrature is plain
trapezoid, which is all compact support requires.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateQuotientError, GridError, PositivityError
from .kernels import GramModel, Kernel, gram_from_matrix
from .operators import (SYMMETRIC, OperatorCompression, compress_operator,
                        semigroup_matrix)

DEFAULT_MARGIN = 2
TWISTED_RANK_CUTOFF = 1e-10


@dataclass(frozen=True, eq=False)
class TestFunctionGrid:
    """Uniform 1D or 2D grid with trapezoid weights and a support margin.

    ``shape`` gives points per axis; functions carried on the grid must vanish
    on the outer ``margin`` cells of every axis, so integer-cell translations
    within the margin stay exact.
    """

    origin: np.ndarray
    spacing: float
    shape: tuple
    margin: int = DEFAULT_MARGIN

    def __post_init__(self):
        origin = np.atleast_1d(np.asarray(self.origin, dtype=float))
        shape = tuple(int(s) for s in np.atleast_1d(self.shape))
        if len(shape) not in (1, 2):
            raise GridError("only 1D and 2D grids are supported")
        if origin.shape != (len(shape),):
            raise GridError("origin dimension must match the grid shape")
        if self.spacing <= 0.0:
            raise GridError("spacing must be positive")
        if self.margin < DEFAULT_MARGIN:
            raise GridError(f"support margin must be >= {DEFAULT_MARGIN} cells")
        if any(s <= 2 * self.margin + 1 for s in shape):
            raise GridError("grid too small for its margin")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "shape", shape)

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def axis_coordinates(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing * np.arange(self.shape[axis])

    def points(self) -> np.ndarray:
        axes = [self.axis_coordinates(a) for a in range(self.ndim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def weights(self) -> np.ndarray:
        """Trapezoid product weights; the margin makes the halved boundary
        weights irrelevant for margin-respecting functions."""
        out = np.ones(self.shape)
        for a in range(self.ndim):
            w = np.full(self.shape[a], self.spacing)
            w[0] *= 0.5
            w[-1] *= 0.5
            shape = [1] * self.ndim
            shape[a] = self.shape[a]
            out = out * w.reshape(shape)
        return out.ravel()

    def is_symmetric(self, axis: int) -> bool:
        """Whether coordinate negation along ``axis`` maps the grid to itself."""
        lo = self.origin[axis]
        hi = lo + self.spacing * (self.shape[axis] - 1)
        return abs(lo + hi) < 1e-12 * max(1.0, abs(hi))


@dataclass(frozen=True, eq=False)
class TestFunction:
    """Samples of a compactly supported function on a grid."""

    grid: TestFunctionGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise GridError("value array must match the grid shape")
        object.__setattr__(self, "values", v)
        if self.margin_violation(self.grid.margin):
            raise GridError("support touches the margin")

    def margin_violation(self, margin: int) -> bool:
        v = self.values
        for a in range(self.grid.ndim):
            idx_lo = [slice(None)] * self.grid.ndim
            idx_hi = [slice(None)] * self.grid.ndim
            idx_lo[a] = slice(0, margin)
            idx_hi[a] = slice(v.shape[a] - margin, v.shape[a])
            if np.any(v[tuple(idx_lo)] != 0.0) or np.any(v[tuple(idx_hi)] != 0.0):
                return True
        return False

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def integral(self) -> float:
        return float(self.grid.weights() @ self.flat)


def bump(grid: TestFunctionGrid, center, width) -> TestFunction:
    """Standard mollifier bump exp(-1 / (1 - u^2)) with support |u| < 1."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    width = np.atleast_1d(np.asarray(width, dtype=float))
    if width.size == 1:
        width = np.full(grid.ndim, float(width[0]))
    pts = grid.points()
    u2 = np.sum(((pts - center) / width) ** 2, axis=1)
    vals = np.where(u2 < 1.0, np.exp(-1.0 / np.maximum(1.0 - u2, 1e-300)), 0.0)
    return TestFunction(grid, vals.reshape(grid.shape))


def _shift_array(v: np.ndarray, cells) -> np.ndarray:
    """Integer-cell shift with zero fill (never wraps)."""
    for a, c in enumerate(cells):
        if c == 0:
            continue
        rolled = np.zeros_like(v)
        src = [slice(None)] * v.ndim
        dst = [slice(None)] * v.ndim
        if c > 0:
            src[a] = slice(0, v.shape[a] - c)
            dst[a] = slice(c, v.shape[a])
        else:
            src[a] = slice(-c, v.shape[a])
            dst[a] = slice(0, v.shape[a] + c)
        rolled[tuple(dst)] = v[tuple(src)]
        v = rolled
    return v


def translate(fn: TestFunction, cells) -> TestFunction:
    """Exact translation by integer cells per axis; errors if the shifted
    support would touch the margin."""
    cells = tuple(int(c) for c in np.atleast_1d(cells))
    if len(cells) != fn.grid.ndim:
        raise GridError("need one cell shift per axis")
    shifted = _shift_array(fn.values, cells)
    if np.count_nonzero(shifted) != np.count_nonzero(fn.values):
        raise GridError("translation pushed support off the grid")
    return TestFunction(fn.grid, shifted)


def reflect(fn: TestFunction, axis: int) -> TestFunction:
    """Coordinate sign flip along ``axis``; the grid must be symmetric there."""
    if not fn.grid.is_symmetric(axis):
        raise GridError("grid is not symmetric along the reflected axis")
    return TestFunction(fn.grid, np.flip(fn.values, axis=axis))


@dataclass(frozen=True)
class SmearedKernel:
    """Kernel paired against grid functions: a cached matrix over grid points.

    ``pairing(f, g)`` is the double quadrature sum of f K g; hermitian by
    construction for symmetric real kernels, and checked on demand.
    """

    grid: TestFunctionGrid
    matrix: np.ndarray

    @classmethod
    def from_kernel(cls, kernel, grid: TestFunctionGrid) -> "SmearedKernel":
        pts = grid.points()
        n = pts.shape[0]
        if isinstance(kernel, Kernel):
            fn = lambda x, y: np.real(kernel.eval_fn(x, y))
        else:
            fn = kernel
        M = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                M[i, j] = fn(pts[i], pts[j])
        return cls(grid, M)

    @classmethod
    def from_distance_profile(cls, profile: Callable[[np.ndarray], np.ndarray],
                              grid: TestFunctionGrid) -> "SmearedKernel":
        """Vectorized path for translation-invariant kernels K(x, y) = p(|x-y|)."""
        pts = grid.points()
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=2))
        return cls(grid, profile(dist))

    def pairing(self, f: TestFunction, g: TestFunction) -> float:
        w = self.grid.weights()
        return float((w * f.flat) @ self.matrix @ (w * g.flat))

    def hermiticity_defect(self, fns: Sequence[TestFunction]) -> float:
        worst = 0.0
        for f in fns:
            for g in fns:
                worst = max(worst, abs(self.pairing(f, g) - self.pairing(g, f)))
        return worst


def ou_mixture_profile(masses, weights) -> Callable[[np.ndarray], np.ndarray]:
    masses = np.asarray(masses, dtype=float)
    weights = np.asarray(weights, dtype=float)

    def profile(dist):
        out = np.zeros_like(dist)
        for m, w in zip(masses, weights):
            out += w * np.exp(-m * dist)
        return out

    return profile


def same_grid(a: TestFunctionGrid, b: TestFunctionGrid) -> bool:
    return (a is b) or (a.shape == b.shape and a.spacing == b.spacing
                        and bool(np.all(a.origin == b.origin)))


def smeared_gram(sk: SmearedKernel, fns: Sequence[TestFunction],
                 rank_cutoff: float = 1e-12) -> GramModel:
    """Gram of the pairing; reuses the whitening machinery on the matrix."""
    for f in fns:
        if not same_grid(f.grid, sk.grid):
            raise GridError("all functions must live on the smearing grid")
    n = len(fns)
    G = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            G[i, j] = sk.pairing(fns[i], fns[j])
    return gram_from_matrix(G, rank_cutoff)


def directional_derivative(field_values: np.ndarray, fn: TestFunction) -> TestFunction:
    """Fourth-order central-difference derivative of fn along a field.

    ``field_values`` has shape grid.shape + (ndim,).  The stencil widens the
    support by two cells per axis, so the input must keep at least
    margin + 2 zero cells; the output then still satisfies the margin.
    """
    grid = fn.grid
    if fn.margin_violation(grid.margin + 2):
        raise GridError("support too close to the margin for the derivative stencil")
    v = fn.values
    out = np.zeros_like(v)
    h = grid.spacing
    for a in range(grid.ndim):
        d = (-np.roll(v, -2, axis=a) + 8.0 * np.roll(v, -1, axis=a)
             - 8.0 * np.roll(v, 1, axis=a) + np.roll(v, 2, axis=a)) / (12.0 * h)
        out += field_values[..., a] * d
    return TestFunction(grid, out)


def distribution_lie_derivative(sk_or_grid, field, fn: TestFunction) -> TestFunction:
    """Derivative of a test function along a vector field on the grid.

    The returned function represents the action on the test side; pairing the
    kernel against it with a minus sign realizes the adjoint action on
    distributions.
    """
    grid = sk_or_grid.grid if isinstance(sk_or_grid, SmearedKernel) else sk_or_grid
    pts = grid.points()
    vals = np.array([field(p) for p in pts], dtype=float)
    return directional_derivative(vals.reshape(grid.shape + (grid.ndim,)), fn)


@dataclass(frozen=True)
class DistributionTransportResult:
    relative_error: float
    operator: OperatorCompression
    model: GramModel


def distribution_froelich_check(sk: SmearedKernel, field, base: TestFunction,
                                t_cells: int, axis: int = 0,
                                n_basis: int = 8, basis_spacing_cells: int = 1,
                                rank_cutoff: float = 1e-12,
                                tol_sym: float = 1e-8) -> DistributionTransportResult:
    """Semigroup transport on a basis of exact translates of one function.

    The derivative form is B[i, j] = -pairing(phi_i, dphi_j); compressing and
    exponentiating it must reproduce the coordinates of the exact grid
    translate of the base function.  Only grid-multiple times are accepted --
    interpolation would contaminate precisely the claim under test.
    """
    if t_cells != int(t_cells):
        raise GridError("transport time must be an integer number of cells")
    grid = sk.grid
    fns = [translate(base, tuple(basis_spacing_cells * k if a == axis else 0
                                 for a in range(grid.ndim)))
           for k in range(n_basis)]
    model = smeared_gram(sk, fns, rank_cutoff)

    pts = grid.points()
    vals = np.array([field(p) for p in pts], dtype=float)
    field_grid = vals.reshape(grid.shape + (grid.ndim,))
    n = len(fns)
    B = np.empty((n, n))
    for j in range(n):
        d = directional_derivative(field_grid, fns[j])
        for i in range(n):
            B[i, j] = -sk.pairing(fns[i], d)
    op = compress_operator(B, model, SYMMETRIC, tol_sym, label="transport")

    t = t_cells * grid.spacing
    # forward flow of a constant field moves the support with it
    shifted = translate(base, tuple(t_cells if a == axis else 0
                                    for a in range(grid.ndim)))
    g0 = np.array([sk.pairing(f, base) for f in fns])
    g1 = np.array([sk.pairing(f, shifted) for f in fns])
    u0 = model.whitening @ g0
    target = model.whitening @ g1
    lhs = semigroup_matrix(op, t) @ u0
    denom = float(np.linalg.norm(target))
    err = float(np.linalg.norm(lhs - target)) / denom if denom > 0 else np.inf
    return DistributionTransportResult(err, op, model)


# ---------------------------------------------------------------------------
# reflection positivity and the quotient space


@dataclass(frozen=True)
class ReflectionSetup:
    """Reflection across a coordinate hyperplane plus the positive slice."""

    grid: TestFunctionGrid
    axis: int = 0

    def __post_init__(self):
        if not self.grid.is_symmetric(self.axis):
            raise GridError("reflection needs a grid symmetric along its axis")

    def reflect(self, fn: TestFunction) -> TestFunction:
        return reflect(fn, self.axis)

    def positive_mask(self) -> np.ndarray:
        return self.grid.points()[:, self.axis] > 0.0

    def in_positive_slice(self, fn: TestFunction) -> bool:
        return bool(np.all(fn.flat[~self.positive_mask()] == 0.0))


@dataclass(frozen=True)
class ReflectionPositivityReport:
    twisted_gram: np.ndarray
    spectrum: np.ndarray
    min_ratio: float
    hermiticity_defect: float
    tolerance: float
    passed: bool


def twisted_gram(sk: SmearedKernel, setup: ReflectionSetup,
                 fns_plus: Sequence[TestFunction]) -> np.ndarray:
    for f in fns_plus:
        if not setup.in_positive_slice(f):
            raise GridError("test functions must be supported in the positive slice")
    n = len(fns_plus)
    T = np.empty((n, n))
    for i in range(n):
        refl = setup.reflect(fns_plus[i])
        for j in range(n):
            T[i, j] = sk.pairing(refl, fns_plus[j])
    return T


def reflection_positivity_check(sk: SmearedKernel, setup: ReflectionSetup,
                                fns_plus: Sequence[TestFunction],
                                tol: float = 1e-10) -> ReflectionPositivityReport:
    """Positivity of the reflected pairing on the positive slice."""
    T = twisted_gram(sk, setup, fns_plus)
    herm = float(np.max(np.abs(T - T.T)))
    Ts = 0.5 * (T + T.T)
    vals = np.linalg.eigvalsh(Ts)[::-1]
    lam_max = float(vals[0]) if vals.size else 0.0
    ratio = float(vals[-1] / lam_max) if lam_max > 0 else -np.inf
    passed = lam_max > 0 and ratio >= -tol and herm <= tol * max(lam_max, 1.0)
    return ReflectionPositivityReport(Ts, vals, ratio, herm, tol, passed)


@dataclass(frozen=True)
class OSSpace:
    """Quotient of the positive slice by the null space of the reflected form.

    ``quotient_map`` (rank x n) whitens the twisted Gram; discarded
    eigendirections span the null space at the cutoff resolution.
    """

    smeared: SmearedKernel
    setup: ReflectionSetup
    fns_plus: tuple
    twisted: np.ndarray
    spectrum: np.ndarray
    rank: int
    rank_cutoff: float
    quotient_map: np.ndarray
    null_basis: np.ndarray

    @property
    def gap_ratio(self) -> float:
        """First discarded eigenvalue over the largest (0 if full rank)."""
        if self.rank >= len(self.spectrum):
            return 0.0
        return float(abs(self.spectrum[self.rank]) / self.spectrum[0])


def os_quotient(sk: SmearedKernel, setup: ReflectionSetup,
                fns_plus: Sequence[TestFunction],
                rank_cutoff: float = TWISTED_RANK_CUTOFF,
                psd_tol: float = 1e-10) -> OSSpace:
    """Whiten the twisted Gram after checking reflection positivity.

    The cutoff is looser than the plain Gram default because reflected
    exponential-factor kernels produce steep rank decay by construction.
    """
    report = reflection_positivity_check(sk, setup, fns_plus, psd_tol)
    if not report.passed:
        raise PositivityError(
            f"reflected pairing is not positive: min/max {report.min_ratio:.3e}")
    vals, vecs = np.linalg.eigh(report.twisted_gram)
    vals = vals[::-1]
    vecs = vecs[:, ::-1]
    lam_max = float(vals[0])
    rank = int(np.sum(vals > rank_cutoff * lam_max))
    if rank == 0:
        raise DegenerateQuotientError("twisted Gram has numerical rank zero")
    Q = (vecs[:, :rank].T) / np.sqrt(vals[:rank])[:, None]
    return OSSpace(sk, setup, tuple(fns_plus), report.twisted_gram, vals, rank,
                   rank_cutoff, Q, vecs[:, rank:])


@dataclass(frozen=True)
class OSSemigroupResult:
    matrix: np.ndarray
    contraction_defect: float
    self_adjointness_defect: float


def os_semigroup(space: OSSpace, t_cells: int) -> OSSemigroupResult:
    """Matrix of the positive-slice shift (away from the hyperplane) on the
    quotient, from reflected pairings of exact translates."""
    if t_cells < 0:
        raise GridError("the transfer direction needs t >= 0")
    grid = space.setup.grid
    shift = tuple(t_cells if a == space.setup.axis else 0
                  for a in range(grid.ndim))
    fns = space.fns_plus
    n = len(fns)
    A = np.empty((n, n))
    for i in range(n):
        refl = space.setup.reflect(fns[i])
        for j in range(n):
            A[i, j] = space.smeared.pairing(refl, translate(fns[j], shift))
    S = space.quotient_map @ A @ space.quotient_map.T
    norm = float(np.linalg.norm(S, 2))
    contraction = max(norm - 1.0, 0.0)
    sa = float(np.linalg.norm(S - S.T))
    return OSSemigroupResult(S, contraction, sa)


def os_semigroup_law_defect(space: OSSpace, s_cells: int, t_cells: int) -> float:
    Ss = os_semigroup(space, s_cells).matrix
    St = os_semigroup(space, t_cells).matrix
    Sst = os_semigroup(space, s_cells + t_cells).matrix
    return float(np.linalg.norm(Ss @ St - Sst))


# ---------------------------------------------------------------------------
# grid operators and the reflection-representation axioms


def grid_shift_matrix(grid: TestFunctionGrid, cells) -> np.ndarray:
    """Matrix of the exact translation on flattened grid vectors (zero fill)."""
    cells = tuple(int(c) for c in np.atleast_1d(cells))
    n = grid.size
    eye = np.eye(n)
    out = np.empty((n, n))
    for j in range(n):
        out[:, j] = _shift_array(eye[:, j].reshape(grid.shape), cells).ravel()
    return out


def grid_reflection_matrix(grid: TestFunctionGrid, axis: int) -> np.ndarray:
    if not grid.is_symmetric(axis):
        raise GridError("reflection matrix needs a symmetric grid")
    n = grid.size
    idx = np.arange(n).reshape(grid.shape)
    flipped = np.flip(idx, axis=axis).ravel()
    out = np.zeros((n, n))
    out[flipped, np.arange(n)] = 1.0
    return out


def slice_projector(grid: TestFunctionGrid, axis: int) -> np.ndarray:
    mask = grid.points()[:, axis] > 0.0
    return np.diag(mask.astype(float))


@dataclass(frozen=True)
class RPAxiomsReport:
    rp1_max_defect: float
    rp2_max_defect: float
    tolerance: float
    passed: bool


def rp_axioms_check(pairs: Sequence, theta: np.ndarray, projector: np.ndarray,
                    h_matrices: Sequence = (),
                    tol: float = 1e-12) -> RPAxiomsReport:
    """Check the reflected-conjugation axiom and slice invariance.

    ``pairs`` lists (P_g, P_{tau g}) matrices on the grid space; the first
    axiom is || P_{tau g} - Theta P_g Theta ||, the second
    || (I - Pi) P_h Pi || for the supplied fixed-subgroup matrices.  The
    domain-density axiom has no finite-rank content and is documented only.
    """
    rp1 = 0.0
    for P_g, P_tau in pairs:
        rp1 = max(rp1, float(np.linalg.norm(P_tau - theta @ P_g @ theta)))
    eye = np.eye(projector.shape[0])
    rp2 = 0.0
    for P_h in h_matrices:
        rp2 = max(rp2, float(np.linalg.norm((eye - projector) @ P_h @ projector)))
    return RPAxiomsReport(rp1, rp2, tol, rp1 <= tol and rp2 <= tol)
