"""Synthesis of the dual-form Lie algebra representation on a kernel span.

Given a compatible kernel/action pair, each basis element of the algebra is
compressed to a finite-rank operator: fixed-part (h) elements give skew
operators, flipped-part (q) elements give symmetric ones, and the table pairs
every q element with the imaginary unit so the whole h + iq basis acts
skew-hermitially.  The h/q classification is enforced from the algebra split;
a kernel whose empirical classification disagrees is rejected, never
reinterpreted.

No global group multiplication is synthesized: one-parameter exponentials and
their small-parameter conjugations carry all the testable content.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .algebra import SymmetricLieAlgebra, c_dual
from .errors import (CompatibilityError, EmptyModelError, PositivityError)
from .kernels import GramModel, Kernel, gram, psd_check
from .operators import (DEFAULT_SYMMETRY_TOL, SKEW, SYMMETRIC, CompatibleAction,
                        OperatorCompression, compatibility_check,
                        compress_operator, lie_derivative_form,
                        symmetry_defects)


@dataclass(frozen=True)
class RepresentationTable:
    """Operators for the full h + iq basis over a shared Gram model.

    ``entries[k]`` is the compression for the k-th algebra basis element with
    its own symmetry sign; ``dual_matrix`` multiplies q entries by 1j so every
    returned matrix is skew-hermitian.
    """

    algebra: SymmetricLieAlgebra
    model: GramModel
    entries: tuple
    defects: dict              # label -> pre-symmetrization defect

    def entry(self, k: int) -> OperatorCompression:
        return self.entries[k]

    def dual_matrix(self, k: int) -> np.ndarray:
        A = self.entries[k].compressed
        return A if self.entries[k].epsilon == SKEW else 1j * A

    def dual_combination(self, coeffs) -> np.ndarray:
        """Operator of a coefficient vector over the h + iq basis."""
        coeffs = np.asarray(coeffs, dtype=complex)
        out = np.zeros_like(self.entries[0].compressed)
        for k, c in enumerate(coeffs):
            if c != 0.0:
                out = out + c * self.dual_matrix(k)
        return out

    @property
    def max_skew_defect(self) -> float:
        """Relative skew-hermitian defect over the dual basis matrices."""
        worst = 0.0
        for k in range(self.algebra.dim):
            T = self.dual_matrix(k)
            worst = max(worst, float(np.linalg.norm(T + T.conj().T)
                                     / (np.linalg.norm(T) + 1.0)))
        return worst

    def max_unitarity_defect(self, times: Sequence[float]) -> float:
        worst = 0.0
        eye = np.eye(self.entries[0].rank)
        for k in range(self.algebra.dim):
            T = self.dual_matrix(k)
            for t in times:
                U = expm(t * T)
                worst = max(worst, float(np.linalg.norm(U.conj().T @ U - eye)))
        return worst


def synthesize_cdual_rep(kernel: Kernel, action: CompatibleAction,
                         model: GramModel,
                         tol_sym: float = DEFAULT_SYMMETRY_TOL) -> RepresentationTable:
    """Build the representation table, enforcing the h/q symmetry split.

    Every fixed-part element must classify skew and every flipped-part element
    symmetric; a contradiction raises a compatibility error naming the basis
    element rather than reinterpreting the split.
    """
    alg = action.algebra
    pts = model.points
    entries = []
    defects = {}
    for k in range(alg.dim):
        label = alg.labels[k]
        expected = SKEW if k in alg.h_indices else SYMMETRIC
        B = lie_derivative_form(kernel, action.basis_fields[k], pts)
        sym, skew, norm = symmetry_defects(B)
        raw = skew if expected == SKEW else sym
        if raw > tol_sym * max(norm, 1e-12):
            side = "fixed (skew)" if expected == SKEW else "flipped (symmetric)"
            raise CompatibilityError(
                f"basis element {label!r} violates its {side} class: "
                f"defect {raw:.3e} vs norm {norm:.3e}")
        entries.append(compress_operator(B, model, expected, tol_sym, label=label))
        defects[label] = entries[-1].symmetrization_defect
    return RepresentationTable(alg, model, tuple(entries), defects)


@dataclass(frozen=True)
class CommutationReport:
    pair_defects: dict           # (label_a, label_b) -> normalized defect
    max_defect: float


def commutation_defect(rep: RepresentationTable) -> CommutationReport:
    """||[T_a, T_b] - T_[a,b]|| over the dual basis, normalized by operator
    sizes.  Reported, never pass/fail: the compression defect is expected and
    should shrink under sample refinement."""
    alg = rep.algebra
    dual = c_dual(alg)
    out = {}
    worst = 0.0
    for a in range(alg.dim):
        Ta = rep.dual_matrix(a)
        for b in range(a + 1, alg.dim):
            Tb = rep.dual_matrix(b)
            target = rep.dual_combination(dual.structure[a, b])
            defect = float(np.linalg.norm(Ta @ Tb - Tb @ Ta - target))
            scale = float(np.linalg.norm(Ta) * np.linalg.norm(Tb)) + 1.0
            val = defect / scale
            out[(alg.labels[a], alg.labels[b])] = val
            worst = max(worst, val)
    return CommutationReport(out, worst)


def conjugation_check(rep: RepresentationTable, x: int, y: int, s: float) -> float:
    """Defect of exp(-s T_x) T_y exp(s T_x) = T_{exp(-s ad x) y} for x in the
    fixed part, where the right side is the table operator of the transported
    basis element in the h + iq algebra."""
    alg = rep.algebra
    if x not in alg.h_indices:
        raise ValueError(f"conjugation needs x in the fixed part; "
                         f"{alg.labels[x]!r} is not")
    dual = c_dual(alg)
    Tx = rep.dual_matrix(x)          # equals the skew entry for x in h
    Ty = rep.dual_matrix(y)
    U = expm(s * Tx)
    Uinv = expm(-s * Tx)
    w = expm(-s * dual.ad_matrix(np.eye(alg.dim)[x])) @ np.eye(alg.dim)[y]
    target = rep.dual_combination(w)
    return float(np.linalg.norm(Uinv @ Ty @ U - target))


@dataclass(frozen=True)
class HGroupResult:
    matrix: np.ndarray
    unitarity_defect: float
    generator_defect: float


def h_group_rep(kernel: Kernel, action: CompatibleAction, model: GramModel,
                x: int, t: float,
                tol_sym: float = DEFAULT_SYMMETRY_TOL) -> HGroupResult:
    """Matrix of the group element exp(t x), x in the fixed part, from kernel
    evaluations at moved sample points.

    The group sends the section at m to the section at the backward-moved
    point, so the matrix elements are K(m_i, sigma_{-t}(m_j)).  Reports the
    unitarity defect and the consistency ||(P - I)/t - T_x|| with the
    compressed generator, which decays like O(t).
    """
    if action.sigma is None or x not in action.sigma:
        raise ValueError("no closed-form point map available for this element")
    if x not in action.algebra.h_indices:
        raise ValueError("group matrices exist only for fixed-part elements")
    move = action.sigma[x]
    pts = model.points
    n = pts.shape[0]
    A = np.empty((n, n), dtype=complex)
    for j in range(n):
        moved = np.asarray(move(-t, pts[j]), dtype=float)
        for i in range(n):
            A[i, j] = kernel(pts[i], moved)
    W = model.whitening
    P = W @ A @ W.conj().T
    eye = np.eye(model.rank)
    unit = float(np.linalg.norm(P.conj().T @ P - eye))
    B = lie_derivative_form(kernel, action.basis_fields[x], pts)
    op = compress_operator(B, model, SKEW, tol_sym, label=action.algebra.labels[x])
    gen = float(np.linalg.norm((P - eye) / t - op.compressed)) if t != 0 else 0.0
    return HGroupResult(P, unit, gen)


# ---------------------------------------------------------------------------
# semigroup-to-dual-group pipeline


@dataclass(frozen=True)
class SemigroupPipelineReport:
    psd_min_ratio: float
    compatibility_max_defect: float
    star_defects: dict
    commutation_max_defect: float
    translation_matrices: dict     # element index -> whitened matrix of pi(s)

    @property
    def max_star_defect(self) -> float:
        return max(self.star_defects.values()) if self.star_defects else 0.0


def luscher_mack_pipeline(elements: Sequence[np.ndarray],
                          phi,
                          action: CompatibleAction,
                          sharp=None,
                          phi_grad=None,
                          rank_cutoff: float = 1e-12,
                          psd_tol: float = 1e-10,
                          tol_sym: float = DEFAULT_SYMMETRY_TOL):
    """From a function phi on an open semigroup of matrices to a dual
    representation table.

    Builds the kernel K(x, y) = phi(x y^#), checks positivity, verifies
    compatibility with the right-multiplication action, synthesizes the
    operator table, and checks the adjoint relation of the right-translation
    matrices P(s^#) = P(s)^dagger.  ``sharp`` defaults to the transpose;
    ``phi_grad``, when given, supplies an analytic kernel gradient.
    """
    mats = [np.atleast_2d(np.asarray(e, dtype=float)) for e in elements]
    n = mats[0].shape[0]
    if sharp is None:
        sharp = lambda g: g.T

    def ev(x, y):
        return phi(x.reshape(n, n) @ sharp(y.reshape(n, n)))

    g1 = None
    if phi_grad is not None:
        def g1(x, y):
            X = x.reshape(n, n)
            Ys = sharp(y.reshape(n, n))
            D = np.asarray(phi_grad(X @ Ys), dtype=float)   # d phi / d u_{ab}
            # d/dx_{ij} phi(x y^#) = sum_b D[i, b] Ys[j, b]
            return (D @ Ys.T).ravel()

    kernel = Kernel("semigroup", ev, g1)
    points = np.array([m.ravel() for m in mats])
    try:
        model = gram(kernel, points, rank_cutoff)
    except EmptyModelError as exc:
        raise PositivityError(
            f"phi is not positive definite on the sample: {exc}") from exc
    psd = psd_check(model, psd_tol)
    if not psd.passed:
        raise PositivityError(
            f"phi is not positive definite on the sample: min/max eigenvalue "
            f"ratio {psd.min_eigenvalue / psd.max_eigenvalue:.3e}")

    compat = compatibility_check(kernel, action, points, tol=tol_sym)
    if not compat.passed:
        raise CompatibilityError(
            f"kernel/action compatibility fails: {compat.defects}")

    table = synthesize_cdual_rep(kernel, action, model, tol_sym)

    W = model.whitening

    def translation_matrix(s):
        A = np.empty((len(mats), len(mats)), dtype=complex)
        for i in range(len(mats)):
            row = (mats[i] @ s).ravel()
            for j in range(len(mats)):
                A[i, j] = kernel(row, points[j])
        return W @ A @ W.conj().T

    star_defects = {}
    matrices = {}
    for k, s in enumerate(mats):
        P = translation_matrix(s)
        P_sharp = translation_matrix(sharp(s))
        matrices[k] = P
        star_defects[k] = float(np.linalg.norm(P_sharp - P.conj().T))

    comm = commutation_defect(table)
    ratio = psd.min_eigenvalue / psd.max_eigenvalue
    report = SemigroupPipelineReport(ratio, compat.max_defect, star_defects,
                                     comm.max_defect, matrices)
    return table, report
