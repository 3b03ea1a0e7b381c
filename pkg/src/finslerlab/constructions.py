"""Metric builders and Einstein-condition residual checkers.

Builders: the p-power family F = alpha (1 + beta/alpha)^p from expression
specs, and the rotationally-structured two-dimensional square-root family
generated by a scalar triple (u, v, B).  Checkers: positivity of the
fundamental tensor (closed form and inequality sampling), the structure
equations that characterize Einstein instances of the Randers, square and
2D square-root cases, the Killing rescaling of the 1-form, and the
Ricci-flat-parallel test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .alphabeta import (
    AbTensors,
    ab_tensors_from_jets,
    covector_jets,
    matrix_jets,
    riemann_data_from_jets,
)
from .core import FinslerMetric, circle_directions, ricci
from .errors import DegenerateValue, DomainError, NotEinstein
from .exprlang import Binary, Number, eval_jet, eval_scalar, parse
from .jets import get_context, jet_pow, jet_sqrt
from .linalg import invert

V_FLOOR = 1e-9


def _ast(expr):
    return parse(expr) if isinstance(expr, str) else expr


def parse_matrix(exprs):
    return [[_ast(e) for e in row] for row in exprs]


def parse_covector(exprs):
    return [_ast(e) for e in exprs]


@dataclass(frozen=True)
class PPowerSpec:
    """Symbolic definition of F = alpha (1 + beta/alpha)^p."""

    alpha: list
    beta: list
    p: float

    def __post_init__(self):
        if self.p == 0.0:
            raise ValueError("the exponent p must be nonzero")
        object.__setattr__(self, "alpha", parse_matrix(self.alpha))
        object.__setattr__(self, "beta", parse_covector(self.beta))

    @property
    def dim(self):
        return len(self.alpha)


def zero_covector(n):
    return [Number(0.0) for _ in range(n)]


def ppower_metric(spec):
    """FinslerMetric for a p-power spec, with its admissibility predicate.

    The domain requires alpha > 0, 1 + s > 0 and 1 + (1-p) s > 0 with
    s = beta/alpha; the last guard keeps the spray denominators healthy up
    to the positivity boundary.
    """
    n = spec.dim
    a_ast, b_ast, p = spec.alpha, spec.beta, spec.p
    beta_zero = all(isinstance(b, Number) and b.value == 0.0 for b in b_ast)

    def builder(x_jets, y_jets):
        ctx = x_jets[0].ctx
        xvals = [j.value for j in x_jets]
        alpha2 = None
        for i in range(n):
            for j in range(i, n):
                coef = eval_jet(a_ast[i][j], ctx, xvals)
                term = coef * y_jets[i] * y_jets[j]
                if i != j:
                    term = 2.0 * term
                alpha2 = term if alpha2 is None else alpha2 + term
        alpha = jet_sqrt(alpha2)
        if beta_zero:
            return alpha
        beta = None
        for i in range(n):
            term = eval_jet(b_ast[i], ctx, xvals) * y_jets[i]
            beta = term if beta is None else beta + term
        return alpha * jet_pow(1.0 + beta / alpha, p)

    def scalar(x, y):
        alpha2 = 0.0
        for i in range(n):
            for j in range(i, n):
                coef = eval_scalar(a_ast[i][j], x)
                alpha2 += coef * y[i] * y[j] * (2.0 if i != j else 1.0)
        if alpha2 <= 0.0:
            raise DomainError("alpha^2 is not positive")
        alpha = math.sqrt(alpha2)
        if beta_zero:
            return alpha
        beta = sum(eval_scalar(b_ast[i], x) * y[i] for i in range(n))
        s = beta / alpha
        if 1.0 + s <= 0.0:
            raise DomainError("1 + beta/alpha is not positive")
        return alpha * (1.0 + s) ** p

    def domain(x, y):
        # alpha > 0 and 1 + beta/alpha > 0; convexity failures beyond the
        # positivity bound are detected downstream as SingularMetric
        try:
            alpha2 = 0.0
            for i in range(n):
                for j in range(i, n):
                    coef = eval_scalar(a_ast[i][j], x)
                    alpha2 += coef * y[i] * y[j] * (2.0 if i != j else 1.0)
            if alpha2 <= 0.0:
                return False
            if beta_zero:
                return True
            alpha = math.sqrt(alpha2)
            beta = sum(eval_scalar(b_ast[i], x) * y[i] for i in range(n))
            return 1.0 + beta / alpha > 1e-12
        except DomainError:
            return False

    return FinslerMetric(n, builder, scalar, domain, name=f"ppower(p={p})")


def _is_int(p):
    return abs(p - round(p)) < 1e-12


def riemann_metric(alpha_exprs):
    """Purely Riemannian metric F = alpha as a FinslerMetric."""
    n = len(alpha_exprs)
    spec = PPowerSpec(alpha_exprs, zero_covector(n), 1.0)
    metric = ppower_metric(spec)
    metric.name = "riemannian"
    return metric


def positivity_check(p, b_sq):
    """Closed-form positivity criterion of the p-power family.

    Case split on the exponent: for p > 2 or p < 0 the bound is
    b^2 < 1/(p-1)^2; for 1/2 <= p <= 2 it is b^2 < 1; for 0 < p < 1/2 it
    is b^2 < (2-p)^2 / (4 (1-p^2)^2).
    """
    if p == 0.0:
        raise ValueError("the exponent p must be nonzero")
    if b_sq < 0.0:
        raise ValueError("b_sq must be nonnegative")
    if p > 2.0 or p < 0.0:
        return b_sq < 1.0 / (p - 1.0) ** 2
    if p >= 0.5:
        return b_sq < 1.0
    return b_sq < (2.0 - p) ** 2 / (4.0 * (1.0 - p * p) ** 2)


def positivity_margins(p, s, b_sq):
    """The three convexity quantities at one slope s = beta/alpha."""
    base = 1.0 + s
    if base <= 0.0:
        return (base, base, base)
    phi = base ** p
    m2 = base ** (p - 1.0) * (1.0 + (1.0 - p) * s)
    m3 = m2 + (b_sq - s * s) * p * (p - 1.0) * base ** (p - 2.0)
    return (phi, m2, m3)


def positivity_sample(p, b_sq, s_grid=101):
    """Grid evaluation of the three convexity inequalities.

    ``s_grid`` is either a count (interior grid on (-b, b)) or explicit
    slopes inside that interval.  Returns (all_positive, worst_margin).
    """
    if p == 0.0:
        raise ValueError("the exponent p must be nonzero")
    b = math.sqrt(b_sq)
    if isinstance(s_grid, int):
        count = s_grid
        grid = [-b + 2.0 * b * (i + 1) / (count + 1) for i in range(count)]
    else:
        grid = [float(s) for s in s_grid]
        if any(abs(s) >= b for s in grid):
            raise ValueError("s grid must lie strictly inside (-b, b)")
    worst = math.inf
    for s in grid:
        worst = min(worst, *positivity_margins(p, s, b_sq))
    if not grid:
        worst = 1.0
    return worst > 0.0, worst


@dataclass(frozen=True)
class Sqrt2dFamilySpec:
    """Scalar triple (u, v, B) generating a 2D square-root metric."""

    u: object
    v: object
    B: object

    def __post_init__(self):
        object.__setattr__(self, "u", _ast(self.u))
        object.__setattr__(self, "v", _ast(self.v))
        object.__setattr__(self, "B", _ast(self.B))


@dataclass
class Sqrt2dFamily:
    """The induced (alpha, beta) pair and its constraint residuals."""

    spec: Sqrt2dFamilySpec
    alpha: list
    beta: list

    def pde_residuals(self, x):
        """Residuals of u_1 - v_2, u_2 + v_1, u B_1 + v B_2 at x."""
        ctx = get_context(2, 2)
        uj = eval_jet(self.spec.u, ctx, x)
        vj = eval_jet(self.spec.v, ctx, x)
        bj = eval_jet(self.spec.B, ctx, x)
        u1, u2 = uj.partial((1, 0)), uj.partial((0, 1))
        v1, v2 = vj.partial((1, 0)), vj.partial((0, 1))
        b1, b2 = bj.partial((1, 0)), bj.partial((0, 1))
        return {
            "cauchy_riemann_1": u1 - v2,
            "cauchy_riemann_2": u2 + v1,
            "transport": uj.value * b1 + vj.value * b2,
        }

    def b_squared(self, x):
        value = eval_scalar(self.spec.B, x)
        if not 0.0 < value < 1.0:
            raise DomainError(f"B = {value!r} outside (0, 1) at x={list(x)!r}")
        return value

    def metric(self):
        return ppower_metric(PPowerSpec(self.alpha, self.beta, 0.5))


def sqrt2d_family(spec):
    """Induced alpha and beta of the 2D square-root family.

    alpha^2 = B / ((1-B)^{3/2} (u^2+v^2)) |y|^2 and
    beta    = B / ((1-B)^{3/4} (u^2+v^2)) (u y^1 + v y^2),
    so the norm of beta with respect to alpha equals sqrt(B).
    """
    if not isinstance(spec, Sqrt2dFamilySpec):
        spec = Sqrt2dFamilySpec(*spec)
    u, v, B = spec.u, spec.v, spec.B

    def mul(a, b):
        return Binary("mul", a, b)

    def power(a, r):
        return Binary("pow", a, Number(r))

    uu_vv = Binary("add", power(u, 2.0), power(v, 2.0))
    one_minus_b = Binary("sub", Number(1.0), B)
    conformal = Binary("div", B, mul(power(one_minus_b, 1.5), uu_vv))
    alpha = [[conformal, Number(0.0)], [Number(0.0), conformal]]
    form_coef = Binary("div", B, mul(power(one_minus_b, 0.75), uu_vv))
    beta = [mul(form_coef, u), mul(form_coef, v)]
    return Sqrt2dFamily(spec, alpha, beta)


def sqrt2d_flag_curvature(spec, x):
    """Curvature of the family from second derivatives of B.

    K = -((u^2+v^2) sqrt(1-B) / (2 B^2)) (B_11 + B_22)
        - ((u^2+v^2)^2 (3B-2) / (4 B^3 sqrt(1-B))) (B_1 / v)^2

    The formula divides by v; |v| below the floor raises DegenerateValue
    (fall back to the generic engine there).
    """
    if not isinstance(spec, Sqrt2dFamilySpec):
        spec = Sqrt2dFamilySpec(*spec)
    ctx = get_context(2, 2)
    u = eval_scalar(spec.u, x)
    v = eval_scalar(spec.v, x)
    bj = eval_jet(spec.B, ctx, x)
    b_val = bj.value
    if not 0.0 < b_val < 1.0:
        raise DomainError(f"B = {b_val!r} outside (0, 1) at x={list(x)!r}")
    if abs(v) < V_FLOOR:
        raise DegenerateValue("the curvature formula divides by v")
    b1 = bj.partial((1, 0))
    lap = bj.partial((2, 0)) + bj.partial((0, 2))
    uv = u * u + v * v
    root = math.sqrt(1.0 - b_val)
    return (-(uv * root / (2.0 * b_val ** 2)) * lap
            - (uv ** 2 * (3.0 * b_val - 2.0) / (4.0 * b_val ** 3 * root))
            * (b1 / v) ** 2)


def sqrt2d_base_curvature(spec, x):
    """Sectional curvature of the family's base metric from the triple:

    lambda = -(u^2+v^2)/(4 B^2) { (B+2) sqrt(1-B) (B_11 + B_22)
             + (u^2+v^2)(B^2 + 4B - 2) B_1^2 / (B v^2 sqrt(1-B)) }

    Valid where the triple satisfies its constraints; divides by v.
    """
    if not isinstance(spec, Sqrt2dFamilySpec):
        spec = Sqrt2dFamilySpec(*spec)
    ctx = get_context(2, 2)
    u = eval_scalar(spec.u, x)
    v = eval_scalar(spec.v, x)
    bj = eval_jet(spec.B, ctx, x)
    b_val = bj.value
    if not 0.0 < b_val < 1.0:
        raise DomainError(f"B = {b_val!r} outside (0, 1) at x={list(x)!r}")
    if abs(v) < V_FLOOR:
        raise DegenerateValue("the base-curvature formula divides by v")
    b1 = bj.partial((1, 0))
    lap = bj.partial((2, 0)) + bj.partial((0, 2))
    uv = u * u + v * v
    root = math.sqrt(1.0 - b_val)
    return (-uv / (4.0 * b_val ** 2)
            * ((b_val + 2.0) * root * lap
               + uv * (b_val ** 2 + 4.0 * b_val - 2.0) * b1 ** 2
               / (b_val * v * v * root)))


def _tensors_at(alpha_spec, beta_spec, x, order=3):
    rd = riemann_data_from_jets(matrix_jets(parse_matrix(alpha_spec), x, order), x)
    ab = ab_tensors_from_jets(rd, covector_jets(parse_covector(beta_spec), x, order))
    return rd, ab


def sqrt2d_einstein_residual(alpha_spec, beta_spec, x, directions=16):
    """Residual of the square-root structure equation r_00 = 6 beta s_0 / (b^2-4).

    Maximum over evenly spaced unit directions, normalized by the scale of
    the two sides.
    """
    rd, ab = _tensors_at(alpha_spec, beta_spec, x)
    if rd.dim != 2:
        raise ValueError("this structure equation is two-dimensional")
    if abs(ab.b2 - 4.0) < 1e-9:
        raise DegenerateValue("b^2 = 4 degenerates the structure equation")
    worst = 0.0
    scale = 1.0
    for y in circle_directions(directions):
        lhs = ab.r00(y)
        rhs = 6.0 * ab.beta(y) * ab.s0(y) / (ab.b2 - 4.0)
        worst = max(worst, abs(lhs - rhs))
        scale = max(scale, abs(lhs), abs(rhs))
    return worst / scale


def sqrt2d_structure_report(alpha_spec, beta_spec, x, directions=16,
                            tolerance=1e-6):
    """Residuals of the full 2D square-root Einstein structure system.

    Beyond the closedness-type equation r_00 = 6 beta s_0 / (b^2 - 4), an
    Einstein instance satisfies four more identities tying t_00, s_0^2,
    s^k_{0|k} and s_{0|0} to the scalars theta(x) (recovered from
    s_m s^m = 4 theta b^2 (b^2-4)) and lambda(x), the sectional curvature
    of the base metric.  All five are reported as normalized residuals.
    """
    rd, ab = _tensors_at(alpha_spec, beta_spec, x)
    if rd.dim != 2:
        raise ValueError("these structure equations are two-dimensional")
    b2 = ab.b2
    if b2 < 1e-9 or abs(b2 - 4.0) < 1e-9:
        raise DegenerateValue("structure equations need b^2 away from 0 and 4")
    lam = rd.sectional_curvature()
    smsm = ab.s_m_s_up_m()
    theta = smsm / (4.0 * b2 * (b2 - 4.0))
    report = EinsteinConditionReport("sqrt2d_structure", tolerance=tolerance)
    report.scalars = {"theta": theta, "lambda": lam}
    res = {k: 0.0 for k in ("r00_equation", "t00_equation",
                            "s0_squared_equation", "divergence_equation",
                            "covariant_s_equation")}
    scales = dict(res)
    sk_form = ab.sk_form()
    for y in circle_directions(directions):
        alpha2 = rd.alpha(y) ** 2
        beta = ab.beta(y)
        s0 = ab.s0(y)

        lhs, rhs = ab.r00(y), 6.0 * beta * s0 / (b2 - 4.0)
        res["r00_equation"] = max(res["r00_equation"], abs(lhs - rhs))
        scales["r00_equation"] = max(scales["r00_equation"], abs(lhs), abs(rhs))

        lhs = ab.t00(y)
        rhs = 4.0 * theta * (4.0 * alpha2 - beta * beta) - s0 * s0 / (b2 - 4.0)
        res["t00_equation"] = max(res["t00_equation"], abs(lhs - rhs))
        scales["t00_equation"] = max(scales["t00_equation"], abs(lhs), abs(rhs))

        lhs = s0 * s0
        rhs = 4.0 * (b2 - 4.0) * theta * (b2 * alpha2 - beta * beta)
        res["s0_squared_equation"] = max(res["s0_squared_equation"],
                                         abs(lhs - rhs))
        scales["s0_squared_equation"] = max(scales["s0_squared_equation"],
                                            abs(lhs), abs(rhs))

        lhs = float(sk_form @ y)
        rhs = (-(32.0 * (b2 * b2 + 7.0 * b2 - 26.0) * theta
                 + (b2 - 4.0) ** 2 * lam)
               / (2.0 * (2.0 + b2) * (b2 - 4.0)) * beta
               + ab.bk_s0k(y) / (b2 - 4.0))
        res["divergence_equation"] = max(res["divergence_equation"],
                                         abs(lhs - rhs))
        scales["divergence_equation"] = max(scales["divergence_equation"],
                                            abs(lhs), abs(rhs))

        lhs = ab.s00_cov(y)
        rhs = (2.0 * ((5.0 * b2 ** 3 + 12.0 * b2 * b2 - 60.0 * b2 + 16.0)
                      * alpha2
                      - 6.0 * (b2 * b2 + 2.0 * b2 - 12.0) * beta * beta)
               * smsm / (b2 * (2.0 + b2) * (b2 - 4.0) ** 2)
               + lam * (b2 - 4.0) * (b2 * alpha2 - beta * beta)
               / (2.0 * (2.0 + b2)))
        res["covariant_s_equation"] = max(res["covariant_s_equation"],
                                          abs(lhs - rhs))
        scales["covariant_s_equation"] = max(scales["covariant_s_equation"],
                                             abs(lhs), abs(rhs))
    report.residuals = {k: v / max(1.0, scales[k]) for k, v in res.items()}
    return report.finalize()


def sqrt2d_K_from_lambda(alpha_spec, beta_spec, x, precheck_tol=1e-6):
    """Curvature of an Einstein 2D square-root instance from alpha data.

    K = (2 / (2 + b^2)) (lambda - 8 s_m s^m / (b^2 (b^2 - 4)))

    with lambda the sectional curvature of alpha.  Raises NotEinstein when
    the structure-equation residual exceeds ``precheck_tol``.
    """
    residual = sqrt2d_einstein_residual(alpha_spec, beta_spec, x)
    if residual > precheck_tol:
        raise NotEinstein(
            f"structure-equation residual {residual:.3e} exceeds {precheck_tol}")
    rd, ab = _tensors_at(alpha_spec, beta_spec, x)
    b2 = ab.b2
    if b2 < 1e-9 or abs(b2 - 4.0) < 1e-9:
        raise DegenerateValue("formula needs b^2 away from 0 and 4")
    lam = rd.sectional_curvature()
    return 2.0 / (2.0 + b2) * (lam - 8.0 * ab.s_m_s_up_m() / (b2 * (b2 - 4.0)))


@dataclass
class KillingDeformationResult:
    x: tuple
    r_residual: float          # max |r~_ij| of the rescaled form
    btilde_norm_sq: float      # squared alpha-norm of the rescaled form
    expected_norm_sq: float    # b^2 / (1 - b^2)^{3/2}
    ab_tilde: AbTensors


def beta_tilde_jets(alpha_spec, beta_spec, x, order=3):
    """Jets of the rescaled 1-form (1 - b^2)^{-3/4} b_i at x."""
    a_jets = matrix_jets(parse_matrix(alpha_spec), x, order)
    b_jets = covector_jets(parse_covector(beta_spec), x, order)
    a_inv_jets = invert(a_jets)
    n = len(b_jets)
    b2_jet = None
    for i in range(n):
        for j in range(n):
            term = a_inv_jets[i][j] * b_jets[i] * b_jets[j]
            b2_jet = term if b2_jet is None else b2_jet + term
    if b2_jet.value >= 1.0:
        raise DomainError(f"b^2 = {b2_jet.value!r} >= 1 at x={list(x)!r}")
    scale = jet_pow(1.0 - b2_jet, -0.75)
    return a_jets, [scale * bj for bj in b_jets], b2_jet.value


def killing_deformation(alpha_spec, beta_spec, x, order=3):
    """Rescale beta by (1-b^2)^{-3/4} and measure how Killing the result is.

    For instances satisfying the square-root structure equation the
    rescaled form has r~_ij = 0 and squared norm b^2 / (1-b^2)^{3/2}.
    """
    a_jets, bt_jets, b2 = beta_tilde_jets(alpha_spec, beta_spec, x, order)
    rd = riemann_data_from_jets(a_jets, x)
    ab_t = ab_tensors_from_jets(rd, bt_jets)
    expected = b2 / (1.0 - b2) ** 1.5
    return KillingDeformationResult(
        tuple(float(v) for v in x),
        float(np.abs(ab_t.r).max()),
        ab_t.b2,
        expected,
        ab_t,
    )


@dataclass
class EinsteinConditionReport:
    """Residuals of one family of Einstein structure equations."""

    condition_id: str
    scalars: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    tolerance: float = 1e-6
    verdict: bool = False
    notes: list = field(default_factory=list)

    def finalize(self):
        self.verdict = all(v < self.tolerance for v in self.residuals.values())
        return self


def _tensor_residual(delta, *scales):
    return float(np.abs(delta).max() / max(1.0, *(abs(s) for s in scales)))


def _randers_scalars(rd, ab):
    n = rd.dim
    denom = 2.0 * (n - ab.b2)
    c = ab.tr_r / denom
    # d_j [tr_r / (2(n - b2))] = (d_j tr_r)/(2(n-b2)) + tr_r (d_j b2)/(2(n-b2)^2)
    dc = ab.rkk_grad() / denom + ab.tr_r * ab.db2() / (2.0 * (n - ab.b2) ** 2)
    sigma = ((2.0 * float(ab.b_up @ ab.sk_form()) / (n - 1)
              - 2.0 * float(ab.b_up @ ab.tvec)
              - float(ab.b_up @ dc)) / (2.0 * ab.b2))
    return c, dc, sigma


def randers_einstein_residuals(alpha_spec, beta_spec, points, directions=8,
                               tolerance=1e-6):
    """Residuals of the Randers structure equations at the given points.

    The scalar c(x) is recovered from the trace of the closedness equation
    (using b^j s_j = 0) and sigma(x) from the b-contraction of the
    divergence equation; the report carries the residual of each equation
    and of the final Einstein relation Ric = (n-1)(sigma - c^2) F^2.
    """
    metric = ppower_metric(PPowerSpec(alpha_spec, beta_spec, 1.0))
    report = EinsteinConditionReport("randers", tolerance=tolerance)
    res = {"closedness": 0.0, "divergence": 0.0, "ricci_alpha": 0.0,
           "einstein_relation": 0.0}
    c_values, sigma_values = [], []
    dirs = circle_directions(directions) if metric.dim == 2 else None
    for x in points:
        rd, ab = _tensors_at(alpha_spec, beta_spec, x)
        n = rd.dim
        if ab.b2 < 1e-9:
            report.notes.append(f"skipped x={list(x)!r}: b^2 ~ 0")
            continue
        c, dc, sigma = _randers_scalars(rd, ab)
        c_values.append(c)
        sigma_values.append(sigma)

        bs = np.outer(ab.b, ab.svec)
        closed = ab.r + bs + bs.T - 2.0 * c * (rd.a - np.outer(ab.b, ab.b))
        res["closedness"] = max(res["closedness"], _tensor_residual(
            closed, np.abs(ab.r).max(), abs(2 * c) * np.abs(rd.a).max()))

        div = (ab.sk_form()
               - 0.5 * (n - 1) * (2.0 * sigma * ab.b + 2.0 * ab.tvec
                                  + 4.0 * c * ab.svec + dc))
        res["divergence"] = max(res["divergence"], _tensor_residual(
            div, np.abs(ab.sk_form()).max(), abs(sigma), np.abs(dc).max()))

        sym_cov_s = 0.5 * (ab.cov_svec + ab.cov_svec.T)
        dcb = 0.5 * (np.outer(dc, ab.b) + np.outer(ab.b, dc))
        ric_rhs = (2.0 * ab.t + ab.tr_t * rd.a
                   + (n - 1) * (sigma * (rd.a + np.outer(ab.b, ab.b))
                                - 4.0 * c * c * rd.a - sym_cov_s
                                - np.outer(ab.svec, ab.svec) - dcb))
        res["ricci_alpha"] = max(res["ricci_alpha"], _tensor_residual(
            rd.ricci_alpha - ric_rhs, np.abs(rd.ricci_alpha).max(),
            np.abs(ric_rhs).max()))

        use_dirs = dirs if dirs is not None else circle_directions(directions)
        for y in (use_dirs if n == 2 else _unit_dirs(n, directions)):
            if not metric.in_domain(x, y):
                continue
            f = metric.value(x, y)
            ric_f = ricci(metric, x, y)
            want = (n - 1) * (sigma - c * c) * f * f
            res["einstein_relation"] = max(
                res["einstein_relation"],
                abs(ric_f - want) / max(1.0, abs(ric_f), abs(want)))
    report.scalars = {"c": c_values, "sigma": sigma_values}
    report.residuals = res
    return report.finalize()


def _unit_dirs(n, count):
    from .core import sphere_directions
    return sphere_directions(n, count)


def square_einstein_residuals(alpha_spec, beta_spec, points, directions=8,
                              tolerance=1e-6):
    """Residuals of the square-metric structure equations (exponent 2).

    c(x) comes from the trace of the covariant-derivative equation
    b_{i|j} = c [(1+2b^2) a_ij - 3 b_i b_j]; the report also carries the
    residuals of the curvature equation, of the gradient equation
    c_i = -2 c^2 b_i, and the Ricci curvature of F itself (instances that
    satisfy all equations are Ricci-flat).
    """
    metric = ppower_metric(PPowerSpec(alpha_spec, beta_spec, 2.0))
    report = EinsteinConditionReport("square", tolerance=tolerance)
    res = {"covariant_derivative": 0.0, "ricci_alpha": 0.0,
           "c_gradient": 0.0, "ricci_flat": 0.0}
    c_values = []
    for x in points:
        rd, ab = _tensors_at(alpha_spec, beta_spec, x)
        n = rd.dim
        denom = n * (1.0 + 2.0 * ab.b2) - 3.0 * ab.b2
        c = ab.tr_r / denom
        dc = (ab.rkk_grad() / denom
              - ab.tr_r * (2.0 * n - 3.0) * ab.db2() / denom ** 2)
        c_values.append(c)

        want_cov = c * ((1.0 + 2.0 * ab.b2) * rd.a - 3.0 * np.outer(ab.b, ab.b))
        res["covariant_derivative"] = max(
            res["covariant_derivative"], _tensor_residual(
                ab.cov_b - want_cov, np.abs(ab.cov_b).max(),
                np.abs(want_cov).max()))

        coef = 2.0 * (2.0 * n - 5.0) * ab.b2 + 5.0 * (n - 1.0)
        want_ric = -c * c * (coef * rd.a - 6.0 * (n - 2.0) * np.outer(ab.b, ab.b))
        res["ricci_alpha"] = max(res["ricci_alpha"], _tensor_residual(
            rd.ricci_alpha - want_ric, np.abs(rd.ricci_alpha).max(),
            np.abs(want_ric).max()))

        res["c_gradient"] = max(res["c_gradient"], _tensor_residual(
            dc + 2.0 * c * c * ab.b, np.abs(dc).max()))

        for y in _unit_dirs(n, directions):
            if not metric.in_domain(x, y):
                continue
            f = metric.value(x, y)
            res["ricci_flat"] = max(res["ricci_flat"],
                                    abs(ricci(metric, x, y)) / max(1.0, f * f))
    report.scalars = {"c": c_values}
    report.residuals = res
    return report.finalize()


def ricci_flat_parallel_check(alpha_spec, beta_spec, points, tolerance=1e-9):
    """True iff alpha is Ricci-flat and beta is parallel over the points."""
    max_cov = 0.0
    max_ric = 0.0
    for x in points:
        rd, ab = _tensors_at(alpha_spec, beta_spec, x)
        max_cov = max(max_cov, float(np.abs(ab.cov_b).max()))
        max_ric = max(max_ric, float(np.abs(rd.ricci_alpha).max()))
    return max_cov < tolerance and max_ric < tolerance, max_cov, max_ric
