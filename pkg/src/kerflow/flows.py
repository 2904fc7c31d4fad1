"""Vector fields on finite-dimensional charts, integral curves, and local flows.

All integration uses the classical fixed-step fourth-order scheme: deterministic,
no adaptivity, so convergence-order tests stay clean.  A point that leaves its
chart during a step is recorded as a domain exit, never extrapolated; this keeps
the sampled flow domain honest.  Only finite-dimensional charts are supported --
pathologies of ODEs on function spaces (non-existence, non-uniqueness) cannot
occur here, but stiff blow-up can and is caught by a norm guard.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import FlowDomainError

BLOWUP_NORM = 1e12
DEFAULT_STEP = 1e-3
DEFAULT_FD_STEP = 1e-5

EXIT_LEFT_CHART = "left chart"
EXIT_STEP_FAILURE = "step failure"


@dataclass(frozen=True)
class ChartDomain:
    """Open subset of R^d described by a membership predicate.

    ``membership`` must be decidable for every finite point; ``None`` means the
    whole space.  ``bounding_box`` is an optional (lo, hi) pair used only by
    samplers, never by the flow itself.
    """

    dimension: int
    membership: Optional[Callable[[np.ndarray], bool]] = None
    bounding_box: Optional[tuple] = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("chart dimension must be >= 1")

    def contains(self, point) -> bool:
        p = np.asarray(point, dtype=float)
        if p.shape != (self.dimension,):
            return False
        if not np.all(np.isfinite(p)):
            return False
        if self.membership is None:
            return True
        return bool(self.membership(p))


def full_space(dimension: int, box_halfwidth: float = 1.0) -> ChartDomain:
    lo = -box_halfwidth * np.ones(dimension)
    return ChartDomain(dimension, None, (lo, -lo))


def box_chart(lo, hi) -> ChartDomain:
    """Open axis-aligned box; infinite bounds allowed."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return ChartDomain(
        lo.size,
        lambda p: bool(np.all(p > lo) and np.all(p < hi)),
        (lo, hi),
    )


def halfspace_chart(dimension: int, axis: int = 0, box_halfwidth: float = 3.0) -> ChartDomain:
    """Open half-space {x[axis] > 0}."""
    lo = -box_halfwidth * np.ones(dimension)
    lo[axis] = 0.0
    hi = box_halfwidth * np.ones(dimension)
    return ChartDomain(dimension, lambda p: bool(p[axis] > 0.0), (lo, hi))


@dataclass(frozen=True)
class VectorField:
    """Smooth field on a chart: a value map plus an optional analytic Jacobian.

    When no Jacobian is given, central differences with step ``h_fd`` are used.
    """

    chart: ChartDomain
    func: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    h_fd: float = DEFAULT_FD_STEP
    name: str = ""

    def __call__(self, point) -> np.ndarray:
        p = np.asarray(point, dtype=float)
        return np.asarray(self.func(p), dtype=float)

    def jac(self, point) -> np.ndarray:
        p = np.asarray(point, dtype=float)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(p), dtype=float)
        d = self.chart.dimension
        J = np.empty((d, d))
        h = self.h_fd
        for i in range(d):
            e = np.zeros(d)
            e[i] = h
            J[:, i] = (self(p + e) - self(p - e)) / (2.0 * h)
        return J


def constant_field(vector, chart: Optional[ChartDomain] = None) -> VectorField:
    v = np.asarray(vector, dtype=float)
    chart = chart or full_space(v.size)
    return VectorField(chart, lambda p: v, lambda p: np.zeros((v.size, v.size)),
                       name="constant")


def affine_field(matrix, offset=None, chart: Optional[ChartDomain] = None) -> VectorField:
    """X(p) = A p + b with analytic Jacobian A."""
    A = np.asarray(matrix, dtype=float)
    b = np.zeros(A.shape[0]) if offset is None else np.asarray(offset, dtype=float)
    chart = chart or full_space(A.shape[0])
    return VectorField(chart, lambda p: A @ p + b, lambda p: A, name="affine")


def rotation_field(chart: Optional[ChartDomain] = None) -> VectorField:
    """Planar rotation generator X(x, y) = (-y, x)."""
    A = np.array([[0.0, -1.0], [1.0, 0.0]])
    f = affine_field(A, chart=chart)
    return VectorField(f.chart, f.func, f.jacobian, name="rotation2d")


@dataclass(frozen=True)
class IntegralCurve:
    """Discrete integral curve: times start at 0, points stay inside the chart."""

    times: np.ndarray
    points: np.ndarray
    terminated_early: bool
    exit_reason: Optional[str]

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[-1]

    @property
    def reached_time(self) -> float:
        return float(self.times[-1])


def _stage_value(field: VectorField, p: np.ndarray):
    """Field value at a stage point, or an exit reason."""
    if not field.chart.contains(p):
        return None, EXIT_LEFT_CHART
    v = field(p)
    if not np.all(np.isfinite(v)) or np.linalg.norm(v) > BLOWUP_NORM:
        return None, EXIT_STEP_FAILURE
    return v, None


def _rk4_step(field: VectorField, p: np.ndarray, h: float):
    k1, r = _stage_value(field, p)
    if r:
        return None, r
    k2, r = _stage_value(field, p + 0.5 * h * k1)
    if r:
        return None, r
    k3, r = _stage_value(field, p + 0.5 * h * k2)
    if r:
        return None, r
    k4, r = _stage_value(field, p + h * k3)
    if r:
        return None, r
    return p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), None


def integrate_curve(field: VectorField, start, t_end: float,
                    step: float = DEFAULT_STEP) -> IntegralCurve:
    """Integrate the field from ``start`` to time ``t_end`` (either sign).

    Runs up to ``t_end`` or until the curve exits the chart or the field blows
    up; ``terminated_early`` and ``exit_reason`` record which.
    """
    if step <= 0.0:
        raise ValueError("step must be positive")
    p = np.asarray(start, dtype=float)
    if not field.chart.contains(p):
        raise FlowDomainError(f"start point {p} is outside the chart")

    sign = 1.0 if t_end >= 0.0 else -1.0
    total = abs(t_end)
    times = [0.0]
    points = [p]
    t = 0.0
    reason = None
    # tiny guard keeps ``total/step`` from emitting a spurious final microstep
    while total - t > 1e-15 * max(1.0, total):
        h = sign * min(step, total - t)
        p_new, reason = _rk4_step(field, p, h)
        if reason is not None:
            break
        if not field.chart.contains(p_new):
            reason = EXIT_LEFT_CHART
            break
        t += abs(h)
        p = p_new
        times.append(sign * t)
        points.append(p)
    return IntegralCurve(np.array(times), np.array(points), reason is not None, reason)


def discrete_residual(curve: IntegralCurve, field: VectorField) -> float:
    """Max over steps of ||(p_{k+1}-p_k)/dt - X(midpoint)||; O(step^2) for RK4."""
    if len(curve.times) < 2:
        return 0.0
    dt = np.diff(curve.times)
    res = 0.0
    for k in range(len(dt)):
        mid = 0.5 * (curve.points[k] + curve.points[k + 1])
        slope = (curve.points[k + 1] - curve.points[k]) / dt[k]
        res = max(res, float(np.linalg.norm(slope - field(mid))))
    return res


@dataclass(frozen=True)
class LocalFlowResult:
    """Flow applied to a batch of points; failures are logged, not raised."""

    time: float
    starts: tuple
    endpoints: tuple            # ndarray per point, or None marker on failure
    exit_reasons: tuple         # None, or the exit reason per point
    domain_log: tuple           # (t, start) pairs where integration failed


def flow_map(field: VectorField, t: float, points: Sequence,
             step: float = DEFAULT_STEP) -> LocalFlowResult:
    """Apply the time-t flow to each point, recording per-point domain exits."""
    starts, ends, reasons, log = [], [], [], []
    for p in points:
        p = np.asarray(p, dtype=float)
        starts.append(p)
        if t == 0.0:
            ends.append(p.copy())
            reasons.append(None)
            continue
        curve = integrate_curve(field, p, t, step)
        if curve.terminated_early:
            ends.append(None)
            reasons.append(curve.exit_reason)
            log.append((t, p))
        else:
            ends.append(curve.endpoint)
            reasons.append(None)
    return LocalFlowResult(t, tuple(starts), tuple(ends), tuple(reasons), tuple(log))


def _rk4_with_jacobian(field: VectorField, start: np.ndarray, t_end: float,
                       step: float):
    """Flow plus the Jacobian of the flow map, via the variational equation.

    The matrix equation J' = DX(p) J is advanced with the same RK4 stages and
    the same step as the base flow, so both carry the same error order.
    """
    d = field.chart.dimension
    p = np.asarray(start, dtype=float)
    J = np.eye(d)
    sign = 1.0 if t_end >= 0.0 else -1.0
    total = abs(t_end)
    t = 0.0
    while total - t > 1e-15 * max(1.0, total):
        h = sign * min(step, total - t)

        def stage(q, M):
            v, r = _stage_value(field, q)
            if r:
                raise FlowDomainError(f"flow Jacobian: {r} at {q}")
            return v, field.jac(q) @ M

        k1, K1 = stage(p, J)
        k2, K2 = stage(p + 0.5 * h * k1, J + 0.5 * h * K1)
        k3, K3 = stage(p + 0.5 * h * k2, J + 0.5 * h * K2)
        k4, K4 = stage(p + h * k3, J + h * K3)
        p = p + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        J = J + (h / 6.0) * (K1 + 2 * K2 + 2 * K3 + K4)
        if not field.chart.contains(p):
            raise FlowDomainError(f"flow Jacobian: {EXIT_LEFT_CHART} at {p}")
        t += abs(h)
    return p, J


def pushforward(field_x: VectorField, t: float, field_y: VectorField,
                step: float = DEFAULT_STEP) -> VectorField:
    """Transport ``field_y`` by the time-t flow of ``field_x``.

    The value at p is J(q) Y(q) with q the backward flow of p and J the flow
    Jacobian at q, obtained from the variational equation.  Evaluation raises
    on domain exit during either leg.
    """
    if t == 0.0:
        return field_y

    def value(p):
        back = integrate_curve(field_x, p, -t, step)
        if back.terminated_early:
            raise FlowDomainError(
                f"backward flow exited chart ({back.exit_reason}) from {p}")
        q = back.endpoint
        _, J = _rk4_with_jacobian(field_x, q, t, step)
        return J @ field_y(q)

    return VectorField(field_y.chart, value,
                       name=f"push[{field_x.name},{t}]{field_y.name}")


def lie_bracket(x: VectorField, y: VectorField) -> VectorField:
    """Pointwise bracket dY X - dX Y, with analytic Jacobians when available."""

    def value(p):
        return y.jac(p) @ x(p) - x.jac(p) @ y(p)

    return VectorField(x.chart, value, name=f"[{x.name},{y.name}]")


def lie_derivative_via_flow(x: VectorField, y: VectorField, point, h: float,
                            step: Optional[float] = None) -> np.ndarray:
    """Symmetric difference quotient of the flow transport of y along x.

    Independent oracle for ``lie_bracket``; second-order accurate in h.  The
    internal ODE step defaults to h/8 so integration error stays far below the
    quotient's own h^2 term.
    """
    if step is None:
        step = h / 8.0
    p = np.asarray(point, dtype=float)
    plus = pushforward(x, -h, y, step)(p)
    minus = pushforward(x, h, y, step)(p)
    return (plus - minus) / (2.0 * h)


def builtin_field(name: str, params: Optional[dict] = None) -> VectorField:
    """Catalog of named fields used by experiment configs and tests."""
    params = dict(params or {})
    if name == "rotation2d":
        return rotation_field()
    if name == "constant":
        return constant_field(params["vector"])
    if name == "affine":
        return affine_field(params["matrix"], params.get("offset"))
    if name == "coordinate_shear":
        # x[frm] * d/dx[to]
        frm, to, dim = params.get("from", 0), params.get("to", 1), params.get("dimension", 2)
        A = np.zeros((dim, dim))
        A[to, frm] = 1.0
        f = affine_field(A)
        return VectorField(f.chart, f.func, f.jacobian, name=f"shear{frm}{to}")
    if name == "quad_swirl":
        # (y^2, x): quadratic planar field with analytic Jacobian
        chart = full_space(2)
        return VectorField(chart,
                           lambda p: np.array([p[1] ** 2, p[0]]),
                           lambda p: np.array([[0.0, 2.0 * p[1]], [1.0, 0.0]]),
                           name="quad_swirl")
    if name == "quadratic1d":
        # x^2 on the chart (-inf, 1): finite-time blow-up exits the chart
        chart = box_chart([-np.inf], [1.0])
        return VectorField(chart,
                           lambda p: np.array([p[0] ** 2]),
                           lambda p: np.array([[2.0 * p[0]]]),
                           name="quadratic1d")
    raise KeyError(f"unknown builtin field {name!r}")


FIELD_CATALOG = {
    "rotation2d": "planar rotation generator (-y, x)",
    "constant": "constant field v",
    "affine": "affine field A p + b",
    "coordinate_shear": "x_from d/dx_to",
    "quad_swirl": "quadratic planar field (y^2, x)",
    "quadratic1d": "x^2 on the chart (-inf, 1); blows up in finite time",
}
