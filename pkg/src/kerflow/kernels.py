"""Positive definite kernels, Gram models, whitening, and the GNS construction.

A finite sample m_1..m_N turns a kernel into a Gram matrix; eigenvalue
truncation at a relative cutoff followed by whitening gives orthonormal
coordinates for the span of the kernel sections K_m.  Everything downstream
(operator compressions, semigroups, quotients) lives in those coordinates.
Kernel Grams are notoriously ill-conditioned; the rank cutoff is the stabilizer
for the whole package, so it is configurable everywhere.

Inner-product convention: G[i, j] = K(m_i, m_j) and the product is linear in
its first slot, so <K_mj, K_mi> = G[i, j].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (EmptyModelError, KernelDomainError, MissingProductError,
                     NotHermitianError)

DEFAULT_RANK_CUTOFF = 1e-12
DEFAULT_FD_STEP = 1e-5
HERMITICITY_TOL = 1e-10


@dataclass(frozen=True)
class Kernel:
    """Scalar kernel with a derivative in the first argument.

    ``grad1`` falls back to central differences with step ``h_fd`` when no
    analytic gradient is supplied.
    """

    name: str
    eval_fn: Callable[[np.ndarray, np.ndarray], complex]
    grad1_fn: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    hermitian: bool = True
    h_fd: float = DEFAULT_FD_STEP

    def __call__(self, x, y) -> complex:
        return complex(self.eval_fn(np.asarray(x, float), np.asarray(y, float)))

    def grad1(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.grad1_fn is not None:
            return np.asarray(self.grad1_fn(x, y), dtype=complex)
        h = self.h_fd
        out = np.empty(x.size, dtype=complex)
        for i in range(x.size):
            e = np.zeros(x.size)
            e[i] = h
            out[i] = (self.eval_fn(x + e, y) - self.eval_fn(x - e, y)) / (2.0 * h)
        return out


@dataclass(frozen=True)
class GramModel:
    """Gram matrix of a sample with its eigendecomposition and whitening map.

    ``whitening`` has shape (rank, N) and satisfies W G W^* = I_r.  Eigenvalues
    are sorted descending; ``rank`` counts eigenvalues above
    ``rank_cutoff * max(eigenvalues)``.
    """

    gram: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    rank: int
    rank_cutoff: float
    whitening: np.ndarray
    points: Optional[np.ndarray] = None
    kernel: Optional[Kernel] = None
    duplicate_points: bool = False

    @property
    def size(self) -> int:
        return self.gram.shape[0]


def _eig_and_whiten(G: np.ndarray, rank_cutoff: float):
    vals, vecs = np.linalg.eigh(G)
    vals = vals[::-1]
    vecs = vecs[:, ::-1]
    lam_max = float(vals[0]) if vals.size else 0.0
    if lam_max <= 0.0:
        raise EmptyModelError("Gram matrix has no positive eigenvalue")
    rank = int(np.sum(vals > rank_cutoff * lam_max))
    if rank == 0:
        raise EmptyModelError("all eigenvalues fall below the rank cutoff")
    W = (vecs[:, :rank].conj().T) / np.sqrt(vals[:rank])[:, None]
    return vals, vecs, rank, W


def gram_from_matrix(G, rank_cutoff: float = DEFAULT_RANK_CUTOFF,
                     points=None, kernel: Optional[Kernel] = None,
                     duplicate_points: bool = False) -> GramModel:
    """Build a model from an explicit Gram matrix (hermitized and checked)."""
    G = np.asarray(G, dtype=complex)
    asym = float(np.max(np.abs(G - G.conj().T))) if G.size else 0.0
    scale = max(1.0, float(np.max(np.abs(G)))) if G.size else 1.0
    if asym > HERMITICITY_TOL * scale:
        raise NotHermitianError(
            f"Gram asymmetry {asym:.3e} exceeds {HERMITICITY_TOL:.0e} * {scale:.3e}")
    G = 0.5 * (G + G.conj().T)
    vals, vecs, rank, W = _eig_and_whiten(G, rank_cutoff)
    return GramModel(G, vals, vecs, rank, rank_cutoff, W,
                     points=points, kernel=kernel, duplicate_points=duplicate_points)


def gram(kernel: Kernel, points, rank_cutoff: float = DEFAULT_RANK_CUTOFF) -> GramModel:
    """Gram model of a kernel on a point sample.

    Duplicated points are allowed but flagged; they force rank deficiency.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    G = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            G[i, j] = kernel(pts[i], pts[j])
    dupes = any(np.array_equal(pts[i], pts[j])
                for i in range(n) for j in range(i + 1, n))
    return gram_from_matrix(G, rank_cutoff, points=pts, kernel=kernel,
                            duplicate_points=dupes)


@dataclass(frozen=True)
class PsdReport:
    min_eigenvalue: float
    max_eigenvalue: float
    tolerance: float
    passed: bool
    spectrum: np.ndarray


def psd_check(model: GramModel, tol: float = 1e-10) -> PsdReport:
    """Pass iff the smallest eigenvalue is >= -tol * largest."""
    vals = model.eigenvalues.real
    lam_max = float(vals[0])
    lam_min = float(vals[-1])
    return PsdReport(lam_min, lam_max, tol, lam_min >= -tol * lam_max, vals.copy())


def whiten(model: GramModel, rank_cutoff: float) -> GramModel:
    """Rebuild the whitening at a different rank cutoff (model is immutable)."""
    vals, vecs = model.eigenvalues, model.eigenvectors
    lam_max = float(vals[0])
    if lam_max <= 0.0:
        raise EmptyModelError("Gram matrix has no positive eigenvalue")
    rank = int(np.sum(vals > rank_cutoff * lam_max))
    if rank == 0:
        raise EmptyModelError("all eigenvalues fall below the rank cutoff")
    W = (vecs[:, :rank].conj().T) / np.sqrt(vals[:rank])[:, None]
    return GramModel(model.gram, vals, vecs, rank, rank_cutoff, W,
                     points=model.points, kernel=model.kernel,
                     duplicate_points=model.duplicate_points)


@dataclass(frozen=True)
class RKHSVector:
    """Whitened coordinates of a vector in the sample span."""

    coords: np.ndarray
    model: GramModel
    provenance: str = ""

    def inner(self, other: "RKHSVector") -> complex:
        # <self, other>, linear in self, conjugate-linear in other
        return complex(np.vdot(other.coords, self.coords))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))


def embed_index(model: GramModel, i: int) -> RKHSVector:
    """Coordinates of the kernel section at sample point i (exact)."""
    r = model.rank
    coords = np.sqrt(model.eigenvalues[:r]) * model.eigenvectors[i, :r].conj()
    return RKHSVector(coords, model, provenance=f"K[point {i}]")


def embed_gvector(model: GramModel, g) -> RKHSVector:
    """Coordinates W g for a vector of inner products against the sample."""
    g = np.asarray(g, dtype=complex)
    return RKHSVector(model.whitening @ g, model, provenance="gvector")


def embed_point(model: GramModel, m) -> RKHSVector:
    """Embed a sample index or a new point.

    A new point is projected orthogonally onto the sample span -- an
    approximation whose residual shrinks only with sample refinement.
    """
    if isinstance(m, (int, np.integer)):
        return embed_index(model, int(m))
    if model.points is None or model.kernel is None:
        raise ValueError("model carries no kernel/points; only index embedding works")
    p = np.asarray(m, dtype=float)
    g = np.array([model.kernel(q, p) for q in model.points])
    v = embed_gvector(model, g)
    return RKHSVector(v.coords, model, provenance=f"K[{p}] projected")


def projection_residual(model: GramModel, m) -> float:
    """Relative norm of the part of K_m orthogonal to the sample span."""
    p = np.asarray(m, dtype=float)
    full = float(np.real(model.kernel(p, p)))
    proj = embed_point(model, p).norm ** 2
    if full <= 0.0:
        return 0.0
    return float(np.sqrt(max(full - proj, 0.0) / full))


# ---------------------------------------------------------------------------
# builtin kernel catalog


@dataclass(frozen=True)
class MeasureSample:
    """Finite atomic approximation of a measure on the dual space."""

    atoms: np.ndarray     # (M, d)
    weights: np.ndarray   # (M,) positive

    def __post_init__(self):
        atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        weights = np.asarray(self.weights, dtype=float)
        if weights.ndim != 1 or weights.size != atoms.shape[0]:
            raise ValueError("need one weight per atom")
        if np.any(weights <= 0.0) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be positive and finite")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)


def laplace_kernel_from_measure(measure: MeasureSample) -> Kernel:
    """K(x, y) = sum_j w_j exp(-a_j . (x+y)/2): a nonnegative mixture of
    rank-one exponential kernels, hence positive definite by construction."""
    atoms, weights = measure.atoms, measure.weights

    def ev(x, y):
        return float(np.sum(weights * np.exp(-(atoms @ (x + y)) / 2.0)))

    def g1(x, y):
        e = weights * np.exp(-(atoms @ (x + y)) / 2.0)
        return -(atoms * e[:, None]).sum(axis=0) / 2.0

    return Kernel("laplace", ev, g1)


def builtin_kernel(name: str, params: Optional[dict] = None) -> Kernel:
    """Catalog of named kernels used by experiment configs and tests."""
    params = dict(params or {})
    if name == "fock":
        return Kernel("fock",
                      lambda x, y: np.exp(x @ y),
                      lambda x, y: y * np.exp(x @ y))
    if name == "gaussian_rbf":
        sigma = float(params.get("sigma", 1.0))

        def ev(x, y):
            d = x - y
            return np.exp(-(d @ d) / (2.0 * sigma ** 2))

        return Kernel("gaussian_rbf", ev,
                      lambda x, y: -(x - y) / sigma ** 2 * ev(x, y))
    if name == "ou":
        m = float(params.get("mass", 1.0))
        if m <= 0.0:
            raise ValueError("ou kernel needs mass > 0")

        def ev(x, y):
            return np.exp(-m * np.linalg.norm(x - y))

        def g1(x, y):
            d = x - y
            r = np.linalg.norm(d)
            if r == 0.0:
                raise KernelDomainError("ou kernel has a kink on the diagonal; "
                                        "grad1 is one-sided for x != y only")
            return -m * d / r * ev(x, y)

        return Kernel("ou", ev, g1)
    if name == "ou_mixture":
        masses = np.asarray(params["masses"], dtype=float)
        weights = np.asarray(params.get("weights", np.ones_like(masses)), dtype=float)
        if np.any(masses <= 0) or np.any(weights <= 0):
            raise ValueError("ou_mixture needs positive masses and weights")

        def ev(x, y):
            r = np.linalg.norm(x - y)
            return float(np.sum(weights * np.exp(-masses * r)))

        return Kernel("ou_mixture", ev, None)
    if name == "laplace":
        measure = MeasureSample(np.asarray(params["atoms"], dtype=float),
                                np.asarray(params["weights"], dtype=float))
        return laplace_kernel_from_measure(measure)
    if name == "laplace_gaussian":
        # transform of a standard Gaussian weight: exp(s^2 |x+y|^2 / 8)
        s = float(params.get("scale", 1.0))

        def ev(x, y):
            u = x + y
            return np.exp(s ** 2 * (u @ u) / 8.0)

        return Kernel("laplace_gaussian", ev,
                      lambda x, y: s ** 2 * (x + y) / 4.0 * ev(x, y))
    if name == "halfplane_bessel":
        # smooth reflected-argument kernel on the half-plane x[0] > 0:
        # 2 K0(m sqrt((x1+y1)^2 + (x2-y2)^2)); a continuum mixture of
        # rank-one decay factors times plane waves, hence positive definite
        # there, and invariant under the full planar motion compatibility
        m = float(params.get("mass", 1.0))
        if m <= 0.0:
            raise ValueError("halfplane_bessel needs mass > 0")
        from scipy.special import k0, k1

        def ev(x, y):
            a = x[0] + y[0]
            b = x[1] - y[1]
            r = np.hypot(a, b)
            if r <= 0.0 or a < 0.0:
                raise KernelDomainError("halfplane_bessel needs x1 + y1 > 0")
            return 2.0 * k0(m * r)

        def g1(x, y):
            a = x[0] + y[0]
            b = x[1] - y[1]
            r = np.hypot(a, b)
            if r <= 0.0 or a < 0.0:
                raise KernelDomainError("halfplane_bessel needs x1 + y1 > 0")
            d = -2.0 * m * k1(m * r) / r
            return np.array([d * a, d * b], dtype=complex)

        return Kernel("halfplane_bessel", ev, g1)
    if name == "circle_laplace":
        # transform of a uniform measure on a radius-m circle: a smooth,
        # rotation-invariant positive definite kernel close to I0(m |x+y| / 2)
        m = float(params.get("mass", 1.0))
        n_atoms = int(params.get("n_atoms", 32))
        ang = 2.0 * np.pi * np.arange(n_atoms) / n_atoms
        atoms = m * np.stack([np.cos(ang), np.sin(ang)], axis=1)
        weights = np.full(n_atoms, 1.0 / n_atoms)
        kern = laplace_kernel_from_measure(MeasureSample(atoms, weights))
        return Kernel("circle_laplace", kern.eval_fn, kern.grad1_fn)
    if name == "det":
        n = int(params["n"])
        power = float(params["power"])
        if power <= 0.0:
            raise ValueError("det kernel needs power > 0")

        def ev(x, y):
            X = x.reshape(n, n)
            Y = y.reshape(n, n)
            for M in (X, Y):
                if np.linalg.norm(M, 2) >= 1.0:
                    raise KernelDomainError("det kernel needs contractive arguments")
            return np.linalg.det(np.eye(n) - X @ Y.T) ** (-power)

        # analytic matrix derivatives are error-prone; finite differences only
        return Kernel("det", ev, None)
    raise KeyError(f"unknown builtin kernel {name!r}")


KERNEL_CATALOG = {
    "fock": "exponential kernel exp(<x, y>)",
    "gaussian_rbf": "rotation-invariant exp(-|x-y|^2 / 2 sigma^2)",
    "ou": "exponential-decay kernel exp(-m |x-y|), kink on the diagonal",
    "ou_mixture": "positive mixture sum_j w_j exp(-m_j |x-y|)",
    "laplace": "transform of an atomic measure: sum_j w_j exp(-a_j.(x+y)/2)",
    "laplace_gaussian": "transform of a Gaussian weight: exp(s^2 |x+y|^2 / 8)",
    "circle_laplace": "transform of a uniform circle measure; rotation invariant",
    "halfplane_bessel": "2 K0(m |(x1+y1, x2-y2)|) on the half-plane x1 > 0",
    "det": "det(1 - x y^T)^(-s) on contractive matrices",
}


def kernel_from_config(spec: dict) -> Kernel:
    return builtin_kernel(spec["name"], spec.get("params"))


# ---------------------------------------------------------------------------
# GNS construction for positive definite functions on involutive semigroups


@dataclass(frozen=True)
class InvolutiveSemigroupSample:
    """Finite sample of an involutive semigroup with a function phi on it.

    ``product`` and ``star`` are the semigroup operations; ``phi`` must be
    evaluable on every product s_i (s_j)* and on right-translated products.
    The product table indexes products that stay inside the sample; outside
    products are marked external (None).
    """

    elements: tuple
    product: Callable
    star: Callable
    phi: Callable

    def __post_init__(self):
        elems = tuple(np.asarray(e, dtype=float) for e in self.elements)
        object.__setattr__(self, "elements", elems)

    def product_table(self, match_tol: float = 1e-12):
        table = []
        for a in self.elements:
            row = []
            for b in self.elements:
                ab = np.asarray(self.product(a, b), dtype=float)
                hit = None
                for k, e in enumerate(self.elements):
                    if ab.shape == e.shape and np.max(np.abs(ab - e)) <= match_tol:
                        hit = k
                        break
                row.append(hit)
            table.append(tuple(row))
        return tuple(table)

    def star_defect(self) -> float:
        """Max violation of (s*)* = s and (st)* = t* s*."""
        worst = 0.0
        for a in self.elements:
            worst = max(worst, float(np.max(np.abs(
                np.asarray(self.star(self.star(a))) - a))))
            for b in self.elements:
                lhs = np.asarray(self.star(self.product(a, b)))
                rhs = np.asarray(self.product(self.star(b), self.star(a)))
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        return worst

    def _phi(self, u) -> complex:
        try:
            v = complex(self.phi(u))
        except Exception as exc:
            raise MissingProductError(
                f"phi is not evaluable on the product {u!r}") from exc
        if not np.isfinite(v.real) or not np.isfinite(v.imag):
            raise MissingProductError(f"phi returned a non-finite value on {u!r}")
        return v


@dataclass(frozen=True)
class GNSResult:
    model: GramModel
    matrices: dict          # element index -> whitened right-translation matrix
    star_defects: dict      # element index -> || P(s*) - P(s)^dagger ||

    @property
    def max_star_defect(self) -> float:
        return max(self.star_defects.values()) if self.star_defects else 0.0


def gns_from_pd_function(sample: InvolutiveSemigroupSample,
                         rank_cutoff: float = DEFAULT_RANK_CUTOFF) -> GNSResult:
    """Gram of K(s, t) = phi(s t*) plus right-translation matrices.

    Right translation by s sends the section at s_j to the section at
    s_j s*, so its matrix element against the sample is phi(s_i s (s_j)*);
    compressing with the whitening map gives a finite *-representation whose
    adjoint relation P(s*) = P(s)^dagger is checked and reported.
    """
    elems = sample.elements
    n = len(elems)
    G = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            G[i, j] = sample._phi(sample.product(elems[i], sample.star(elems[j])))
    model = gram_from_matrix(G, rank_cutoff)
    W = model.whitening

    def translation_matrix(s) -> np.ndarray:
        A = np.empty((n, n), dtype=complex)
        for i in range(n):
            row = sample.product(elems[i], s)
            for j in range(n):
                A[i, j] = sample._phi(sample.product(row, sample.star(elems[j])))
        return W @ A @ W.conj().T

    matrices = {k: translation_matrix(elems[k]) for k in range(n)}
    star_defects = {}
    for k in range(n):
        P_star = translation_matrix(sample.star(elems[k]))
        star_defects[k] = float(np.linalg.norm(P_star - matrices[k].conj().T))
    return GNSResult(model, matrices, star_defects)
