"""Lie-derivative bilinear forms on kernel spans and their finite-rank
compressions, with symmetry classification, spectral calculus, and the
semigroup-transport consistency check.

The derivative operator is always handled through its bilinear form
B[i, j] = (d/ds) K(m_i + s X(m_i), m_j): column j samples the derivative of the
kernel section at m_j against the section basis.  The whitened compression
W B W^* absorbs the Gram's ill-conditioning through the rank cutoff; the
operator is never obtained by solving against the Gram directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .algebra import AlgebraElement, SymmetricLieAlgebra, algebra_bracket
from .errors import ClassificationError, FlowDomainError
from .flows import (DEFAULT_STEP, VectorField, integrate_curve, lie_bracket)
from .kernels import (GramModel, Kernel, RKHSVector, embed_gvector,
                      embed_point, projection_residual)

DEFAULT_SYMMETRY_TOL = 1e-8

SYMMETRIC = 1
SKEW = -1


@dataclass(frozen=True)
class CompatibleAction:
    """Lie algebra action by vector fields, linear over the basis fields.

    ``sigma`` optionally supplies closed-form flows (t, point) -> point for
    basis elements whose one-parameter groups are known exactly; only
    fixed-part (h) elements ever need one.
    """

    algebra: SymmetricLieAlgebra
    basis_fields: tuple
    sigma: Optional[dict] = None
    name: str = ""

    def __post_init__(self):
        if len(self.basis_fields) != self.algebra.dim:
            raise ValueError("need one vector field per basis element")
        object.__setattr__(self, "basis_fields", tuple(self.basis_fields))

    def field(self, element) -> VectorField:
        """Real-linear combination of the basis fields."""
        if isinstance(element, AlgebraElement):
            coeffs = element.coeffs
        else:
            coeffs = np.asarray(element, dtype=complex)
        if np.max(np.abs(coeffs.imag)) > 1e-12:
            raise ValueError("vector fields combine real-linearly; "
                             "handle complex coefficients at the operator level")
        w = coeffs.real
        chart = self.basis_fields[0].chart
        fields = self.basis_fields

        def value(p):
            return sum(w[k] * fields[k](p) for k in range(len(fields)))

        def jac(p):
            return sum(w[k] * fields[k].jac(p) for k in range(len(fields)))

        return VectorField(chart, value, jac, name="beta-combination")

    def homomorphism_defect(self, points) -> float:
        """Max defect of [beta(e_i), beta(e_j)] = beta([e_i, e_j]) at points."""
        alg = self.algebra
        worst = 0.0
        for i in range(alg.dim):
            for j in range(i + 1, alg.dim):
                br_field = lie_bracket(self.basis_fields[i], self.basis_fields[j])
                target = self.field(algebra_bracket(alg.basis_element(i),
                                                    alg.basis_element(j)))
                for p in points:
                    worst = max(worst, float(np.linalg.norm(
                        br_field(p) - target(p))))
        return worst


def lie_derivative_form(kernel: Kernel, field: VectorField, points) -> np.ndarray:
    """B[i, j] = grad1 K(m_i, m_j) . X(m_i), the form of the derivative along X."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    B = np.empty((n, n), dtype=complex)
    for i in range(n):
        xi = field(pts[i])
        for j in range(n):
            B[i, j] = kernel.grad1(pts[i], pts[j]) @ xi
    return B


def symmetry_defects(B: np.ndarray):
    """Frobenius defects (||B - B*||, ||B + B*||, ||B||)."""
    sym = float(np.linalg.norm(B - B.conj().T))
    skew = float(np.linalg.norm(B + B.conj().T))
    return sym, skew, float(np.linalg.norm(B))


def symmetry_classify(B: np.ndarray, model: Optional[GramModel] = None,
                      tol_sym: float = DEFAULT_SYMMETRY_TOL) -> Optional[int]:
    """+1 if B = B*, -1 if B = -B*, None if neither holds within tolerance."""
    sym, skew, norm = symmetry_defects(B)
    threshold = tol_sym * norm
    ok_sym = sym <= threshold
    ok_skew = skew <= threshold
    if ok_sym and ok_skew:
        return SYMMETRIC if sym <= skew else SKEW
    if ok_sym:
        return SYMMETRIC
    if ok_skew:
        return SKEW
    return None


@dataclass(frozen=True)
class CompatibilityReport:
    defects: dict          # basis label -> max pointwise defect
    tolerance: float
    passed: bool

    @property
    def max_defect(self) -> float:
        return max(self.defects.values()) if self.defects else 0.0


def compatibility_check(kernel: Kernel, action: CompatibleAction, points,
                        tol: float = DEFAULT_SYMMETRY_TOL) -> CompatibilityReport:
    """Check the invariance identity: the first-slot derivative along beta(x)
    equals minus the second-slot derivative along beta(tau x).

    With a hermitian kernel the second-slot derivative is the conjugate
    transpose of a first-slot form, so on the involution eigenbasis the
    identity reduces to: fixed-part fields have skew forms, flipped-part
    fields have symmetric forms.
    """
    alg = action.algebra
    signs = alg.involution_signs
    defects = {}
    for k in range(alg.dim):
        B = lie_derivative_form(kernel, action.basis_fields[k], points)
        # L2_{beta(tau x)} K sampled on pairs is sign * conj(B).T
        defect = float(np.max(np.abs(B + signs[k] * B.conj().T)))
        defects[alg.labels[k]] = defect
    passed = all(v <= tol for v in defects.values())
    return CompatibilityReport(defects, tol, passed)


@dataclass(frozen=True)
class FlowInvarianceReport:
    drifts: dict            # pair index -> max |K(t) - K(0)|
    reached: dict           # pair index -> largest t both curves reached
    tolerance: float
    passed: bool

    @property
    def max_drift(self) -> float:
        return max(self.drifts.values()) if self.drifts else 0.0


def flow_invariance_check(kernel: Kernel, field: VectorField, epsilon: int,
                          pairs: Sequence, t_max: float,
                          step: float = DEFAULT_STEP,
                          tol: float = 1e-8) -> FlowInvarianceReport:
    """Drift of K along the flow: K(Phi_t m, Phi_t n) for skew fields,
    K(Phi_t m, Phi_-t n) for symmetric ones.  Domain exits shorten the
    reported range instead of failing."""
    drifts, reached = {}, {}
    for idx, (m, n) in enumerate(pairs):
        m = np.asarray(m, dtype=float)
        n = np.asarray(n, dtype=float)
        cm = integrate_curve(field, m, t_max, step)
        cn = integrate_curve(field, n, -t_max if epsilon == SYMMETRIC else t_max, step)
        k_steps = min(len(cm.times), len(cn.times))
        base = kernel(m, n)
        drift = 0.0
        for k in range(k_steps):
            drift = max(drift, abs(kernel(cm.points[k], cn.points[k]) - base))
        drifts[idx] = float(drift)
        reached[idx] = float(cm.times[k_steps - 1])
    passed = all(v <= tol for v in drifts.values())
    return FlowInvarianceReport(drifts, reached, tol, passed)


@dataclass(frozen=True)
class OperatorCompression:
    """Whitened compression of a derivative form, tagged with its symmetry.

    ``compressed`` is exactly hermitian (epsilon = +1) or skew-hermitian
    (epsilon = -1) after symmetrization; the pre-symmetrization defect is
    recorded.  This is a compression of the operator to the sample span, not a
    restriction: its fidelity is controlled only by sample refinement.
    """

    form: np.ndarray
    compressed: np.ndarray
    epsilon: Optional[int]
    symmetrization_defect: float
    model: GramModel
    label: str = ""

    @property
    def rank(self) -> int:
        return self.compressed.shape[0]


def compress_operator(B: np.ndarray, model: GramModel, epsilon: Optional[int],
                      tol_sym: float = DEFAULT_SYMMETRY_TOL,
                      label: str = "") -> OperatorCompression:
    """A_tilde = W B W^*, then symmetrize according to the declared class.

    Classification must precede symmetrization (it has to see the raw defect);
    an inconsistent declaration raises rather than silently averaging it away.
    """
    W = model.whitening
    A = W @ np.asarray(B, dtype=complex) @ W.conj().T
    if epsilon is None:
        return OperatorCompression(np.asarray(B, dtype=complex), A, None, 0.0,
                                   model, label)
    norm = float(np.linalg.norm(A))
    defect = float(np.linalg.norm(A - epsilon * A.conj().T))
    if defect > tol_sym * max(norm, 1e-12):
        raise ClassificationError(
            f"operator {label or '?'}: symmetry defect {defect:.3e} exceeds "
            f"{tol_sym:.0e} * {norm:.3e} for epsilon={epsilon:+d}")
    A = 0.5 * (A + epsilon * A.conj().T)
    return OperatorCompression(np.asarray(B, dtype=complex), A, epsilon, defect,
                               model, label)


def _hermitian_function(A: np.ndarray, f) -> np.ndarray:
    vals, vecs = np.linalg.eigh(A)
    return (vecs * f(vals)) @ vecs.conj().T


def semigroup_matrix(op: OperatorCompression, t: float) -> np.ndarray:
    """exp(t A) by spectral calculus; requires a symmetric (hermitian) operator."""
    if op.epsilon != SYMMETRIC:
        raise ClassificationError("semigroup mode needs a symmetric operator")
    return _hermitian_function(op.compressed, lambda lam: np.exp(t * lam))


def unitary_matrix(op: OperatorCompression, t: float) -> np.ndarray:
    """exp(i t A) for hermitian A, or exp(t A) for skew-hermitian A."""
    if op.epsilon == SYMMETRIC:
        return _hermitian_function(op.compressed, lambda lam: np.exp(1j * t * lam))
    if op.epsilon == SKEW:
        # A = -iH with H = iA hermitian, so exp(tA) = exp(-itH)
        H = 1j * op.compressed
        return _hermitian_function(H, lambda lam: np.exp(-1j * t * lam))
    raise ClassificationError("unitary mode needs a classified operator")


def spectral_apply(op: OperatorCompression, mode: str, t: float,
                   v: RKHSVector) -> RKHSVector:
    """Apply exp(tA) (mode 'semigroup') or the unitary exponential (mode
    'unitary') to a whitened vector."""
    if mode == "semigroup":
        M = semigroup_matrix(op, t)
    elif mode == "unitary":
        M = unitary_matrix(op, t)
    else:
        raise ValueError("mode must be 'semigroup' or 'unitary'")
    return RKHSVector(M @ v.coords, v.model, provenance=f"{mode}({t})")


@dataclass(frozen=True)
class SemigroupTransportResult:
    relative_error: float
    projection_residual: float
    endpoint: np.ndarray
    operator: OperatorCompression


def froelich_check(kernel: Kernel, field: VectorField, model: GramModel,
                   m: int, t: float, step: float = DEFAULT_STEP,
                   tol_sym: float = DEFAULT_SYMMETRY_TOL) -> SemigroupTransportResult:
    """Semigroup-transport consistency: exp(tA) applied to the section at
    sample m should match the embedded section at the flow endpoint.

    Returns the relative error in the whitened norm together with the
    projection residual of the target section, so compression error can be
    separated from semigroup error.
    """
    B = lie_derivative_form(kernel, field, model.points)
    eps = symmetry_classify(B, model, tol_sym)
    if eps != SYMMETRIC:
        raise ClassificationError("semigroup transport needs a symmetric field")
    op = compress_operator(B, model, SYMMETRIC, tol_sym, label="transport")

    curve = integrate_curve(field, model.points[m], t, step)
    if curve.terminated_early:
        raise FlowDomainError(f"flow exited the chart: {curve.exit_reason}")
    endpoint = curve.endpoint

    # embed both sides through the same g-vector path so the time-zero case
    # is exact and whitening noise cancels consistently
    u0 = embed_gvector(model, model.gram[:, m])
    lhs = semigroup_matrix(op, t) @ u0.coords
    target = embed_point(model, endpoint)
    denom = target.norm
    err = float(np.linalg.norm(lhs - target.coords)) / denom if denom > 0 else np.inf
    resid = projection_residual(model, endpoint)
    return SemigroupTransportResult(err, resid, endpoint, op)


# ---------------------------------------------------------------------------
# builtin actions


def builtin_action(name: str, params: Optional[dict] = None) -> CompatibleAction:
    """Catalog of named kernel-compatible actions for configs and tests."""
    from . import algebra as la
    from . import flows as fl

    params = dict(params or {})
    if name == "translation":
        d = int(params.get("dimension", 1))
        alg = la.abelian(d)
        chart = fl.full_space(d)
        fields = tuple(fl.constant_field(np.eye(d)[i], chart) for i in range(d))
        # q-directions have no closed-form group action in the fixed subgroup
        return CompatibleAction(alg, fields, sigma=None, name=f"translation({d})")
    if name == "euclidean":
        p = int(params.get("p", 2))
        q = int(params.get("q", 0))
        domain = params.get("domain", "plane")
        alg = la.euclidean_motion(2, p, q)
        if domain == "halfplane":
            chart = fl.halfspace_chart(2, axis=0)
        else:
            chart = fl.full_space(2)
        # right action m.g = g^{-1} m, so the basis fields carry a minus sign;
        # this is what makes beta a homomorphism rather than an anti-one
        rot = np.array([[0.0, 1.0], [-1.0, 0.0]])
        fields = []
        sigma = {}
        for k, lab in enumerate(alg.labels):
            if lab == "t1":
                fields.append(fl.constant_field([-1.0, 0.0], chart))
                sigma[k] = lambda t, pt: pt - np.array([t, 0.0])
            elif lab == "t2":
                fields.append(fl.constant_field([0.0, -1.0], chart))
                sigma[k] = lambda t, pt: pt - np.array([0.0, t])
            else:
                fields.append(fl.affine_field(rot, chart=chart))

                def rot_flow(t, pt):
                    c, s = np.cos(t), np.sin(t)
                    return np.array([[c, s], [-s, c]]) @ pt

                sigma[k] = rot_flow
        return CompatibleAction(alg, tuple(fields), sigma=sigma,
                                name=f"euclidean(2,{p},{q})")
    if name == "matrix_right_multiplication":
        n = int(params["n"])
        radius = float(params.get("radius", 1.0))
        alg = la.matrix_involutive(n)
        chart = fl.ChartDomain(
            n * n,
            lambda g: bool(np.linalg.norm(g.reshape(n, n), 2) < radius))
        fields = []
        for m in alg.basis_matrices:
            def value(g, m=m):
                return (g.reshape(n, n) @ m).ravel()

            def jac(g, m=m):
                return np.kron(np.eye(n), m.T)

            fields.append(VectorField(chart, value, jac, name="right-mult"))
        from scipy.linalg import expm

        sigma = {}
        for k in alg.h_indices:
            m = alg.basis_matrices[k]
            sigma[k] = (lambda t, g, m=m:
                        (g.reshape(n, n) @ expm(t * m)).ravel())
        return CompatibleAction(alg, tuple(fields), sigma=sigma,
                                name=f"matrix_right_multiplication({n})")
    raise KeyError(f"unknown builtin action {name!r}")


ACTION_CATALOG = {
    "translation": "R^d translating itself; all directions flipped by the involution",
    "euclidean": "planar motions on R^2; involution by conjugation with diag(-I_p, I_q)",
    "matrix_right_multiplication": "gl(n) acting on a matrix ball by g -> g x",
}


def action_from_config(spec: dict) -> CompatibleAction:
    return builtin_action(spec["name"], spec.get("params"))
