"""Heat-flow interpolation between phi and phi^p, and the zero-branching toolkit.

A candidate solution phi and its power are the x=0 and x=1 slices of a
caloric function u solving u_x = u_tt / 4, recovered from phi by the
Poisson formula

    u(x, t) = (pi x)^(-1/2) int phi(tau) exp(-(t-tau)^2 / x) dtau,

which after tau = t - sqrt(x) v is a plain Gauss-Hermite sum.  The module
evaluates u and u_t, checks the energy and mean conservation laws that any
boundary-value solution must satisfy, provides the exact polynomial caloric
solutions whose zeros branch out of a multiple zero of u(1, .), locates and
classifies zeros (multiplicity by dyadic log-log slope, jumps by saltus
scan), and evaluates the a-priori kernel bound for even powers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

from .basis import SQRT_PI, GridFunction, QuadratureRule, gauss_hermite_rule

__all__ = [
    "Interpolant",
    "BranchingPolynomial",
    "ZeroReport",
    "TrackedZeros",
    "MeanConservationReport",
    "poisson_eval",
    "poisson_dt",
    "caloric_residual",
    "energy_identity_residual",
    "mean_conservation_residual",
    "heat_polynomial",
    "heat_polynomial_interpolant",
    "branching_polynomial",
    "branching_roots",
    "track_zeros",
    "kernel_estimate_bound",
    "kernel_estimate_check",
    "detect_multiplicity",
    "zero_report",
]


@dataclass(frozen=True)
class Interpolant:
    """Lazily evaluated caloric extension of boundary data phi.

    The boundary function must obey |phi(t)| <= C exp((1-eps) t^2); this is
    a documented contract, not a runtime check.
    """

    boundary: object  # callable
    rule: QuadratureRule = field(default_factory=lambda: gauss_hermite_rule(96))

    def __call__(self, x, t):
        return poisson_eval(self, x, t)


def _boundary_and_rule(ip, rule):
    if isinstance(ip, Interpolant):
        return ip.boundary, ip.rule
    if rule is None:
        rule = gauss_hermite_rule(96)
    return ip, rule


def poisson_eval(ip, x: float, t, rule: QuadratureRule | None = None):
    """u(x, t) = pi^(-1/2) sum_i w_i phi(t - sqrt(x) v_i); u(0, .) is phi itself."""
    phi, rule = _boundary_and_rule(ip, rule)
    if x < 0:
        raise ValueError(f"heat time x must be non-negative, got {x}")
    t = np.asarray(t, dtype=float)
    if x == 0:
        out = np.asarray(phi(t), dtype=float)
        return out if out.shape else float(out)
    shifted = t[..., None] - math.sqrt(x) * rule.nodes
    fv = np.asarray(phi(shifted.ravel()), dtype=float).reshape(shifted.shape)
    out = fv @ rule.weights / SQRT_PI
    return out if out.shape else float(out)


def poisson_dt(ip, x: float, t, rule: QuadratureRule | None = None):
    """u_t(x, t) by differentiating the kernel: -2 (pi x)^(-1/2) sum w_i v_i phi(t - sqrt(x) v_i).

    Uses only values of phi, so it stays meaningful when phi has a
    fractional-power zero whose derivative is unbounded.
    """
    phi, rule = _boundary_and_rule(ip, rule)
    if x <= 0:
        raise ValueError(f"kernel derivative needs x > 0, got {x}")
    t = np.asarray(t, dtype=float)
    shifted = t[..., None] - math.sqrt(x) * rule.nodes
    fv = np.asarray(phi(shifted.ravel()), dtype=float).reshape(shifted.shape)
    out = fv @ (rule.weights * rule.nodes) * (-2.0 / (math.sqrt(x) * SQRT_PI))
    return out if out.shape else float(out)


def caloric_residual(u, x: float, t: float, h: float = 1e-3) -> float:
    """|u_x - u_tt / 4| by fourth-order central differences with step h."""
    ux = (-u(x + 2 * h, t) + 8 * u(x + h, t) - 8 * u(x - h, t) + u(x - 2 * h, t)) / (12 * h)
    utt = (
        -u(x, t + 2 * h) + 16 * u(x, t + h) - 30 * u(x, t) + 16 * u(x, t - h) - u(x, t - 2 * h)
    ) / (12 * h * h)
    return abs(ux - utt / 4.0)


def _graded_grid(a: float, b: float, centers, coarse: float = 0.02, inner: float = 1e-6) -> np.ndarray:
    """Uniform grid on [a, b] refined geometrically around each center."""
    pts = [np.linspace(a, b, int(round((b - a) / coarse)) + 1)]
    for c in centers:
        ladder = inner * 1.12 ** np.arange(0, 140)
        ladder = ladder[ladder < (b - a)]
        pts.append(np.clip(c + ladder, a, b))
        pts.append(np.clip(c - ladder, a, b))
        pts.append(np.array([c]))
    grid = np.unique(np.concatenate(pts))
    return grid[(grid >= a) & (grid <= b)]


def energy_identity_residual(
    phi,
    p: int,
    rule: QuadratureRule | None = None,
    domain: tuple[float, float] = (-10.0, 10.0),
    xsteps: int = 32,
) -> float:
    """|LHS - RHS| of the energy law int phi^2 (1 - phi^{2p-2}) dt = (1/2) int_0^1 int u_t^2.

    Both integrals are truncated to the given t-window.  The t-grid is
    refined near sign changes of phi (where u_t can have an integrable
    x^(-1/6)-type spike), and the x-integral uses the substitution x = s^3
    to flatten that spike before Gauss-Legendre quadrature.
    """
    if rule is None:
        rule = gauss_hermite_rule(96)
    a, b = domain
    coarse = np.linspace(a, b, 801)
    cv = np.asarray(phi(coarse), dtype=float)
    flips = np.flatnonzero(np.diff(np.sign(cv)) != 0)
    centers = [0.5 * (coarse[i] + coarse[i + 1]) for i in flips]
    ts = _graded_grid(a, b, centers)

    pv = np.asarray(phi(ts), dtype=float)
    lhs = float(np.trapezoid(pv**2 * (1.0 - pv ** (2 * p - 2)), ts))

    s_nodes, s_weights = leggauss(xsteps)
    s = 0.5 * (s_nodes + 1.0)
    w = 0.5 * s_weights
    rhs = 0.0
    for si, wi in zip(s, w):
        x = si**3
        ut = poisson_dt(phi, x, ts, rule)
        inner = float(np.trapezoid(ut**2, ts))
        rhs += wi * 3.0 * si**2 * inner
    rhs *= 0.5
    return abs(lhs - rhs)


@dataclass(frozen=True)
class MeanConservationReport:
    """Windowed residuals of the mean conservation laws, with applicability gate."""

    applicable: bool
    interp_residual: float
    mean_law_residual: float
    x: float
    window: tuple[float, float]


def mean_conservation_residual(
    phi,
    p: int,
    x: float,
    window: tuple[float, float] = (-10.0, 10.0),
    rule: QuadratureRule | None = None,
) -> MeanConservationReport:
    """Residuals of int [u(x,t) - phi(t)] dt = 0 and int [phi - phi^p] dt = 0.

    Both laws presuppose that phi settles near its admissible limits at the
    window ends; when it does not (distance > 0.05), the report is marked
    not applicable and the residuals are NaN.
    """
    if x < 0:
        raise ValueError(f"heat time x must be non-negative, got {x}")
    if rule is None:
        rule = gauss_hermite_rule(96)
    a, b = window
    admissible = (0.0, 1.0) if p % 2 == 0 else (-1.0, 0.0, 1.0)
    edge_left = float(np.mean(np.asarray(phi(np.linspace(a, a + 0.5, 8)), dtype=float)))
    edge_right = float(np.mean(np.asarray(phi(np.linspace(b - 0.5, b, 8)), dtype=float)))
    settled = all(
        min(abs(edge - v) for v in admissible) <= 0.05 for edge in (edge_left, edge_right)
    )
    if not settled:
        return MeanConservationReport(False, math.nan, math.nan, x, window)
    ts = np.linspace(a, b, 2001)
    pv = np.asarray(phi(ts), dtype=float)
    uv = poisson_eval(phi, x, ts, rule)
    interp_residual = abs(float(np.trapezoid(uv - pv, ts)))
    mean_residual = abs(float(np.trapezoid(pv - pv**p, ts)))
    return MeanConservationReport(True, interp_residual, mean_residual, x, window)


def heat_polynomial(n: int, eps: float, t):
    """Exact caloric polynomial with u(1, t) = t^{2n} / (2n)!, evaluated at x = 1 - eps.

    u(1-eps, t) = sum_{m=0}^{n} (-1)^m t^{2n-2m} / ((2n-2m)! m!) (eps/4)^m,
    which solves u_x = u_tt / 4 identically in (eps, t).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for m in range(n + 1):
        out += (
            (-1.0) ** m
            * t ** (2 * n - 2 * m)
            / (math.factorial(2 * n - 2 * m) * math.factorial(m))
            * (eps / 4.0) ** m
        )
    return out if out.shape else float(out)


def heat_polynomial_interpolant(n: int):
    """The caloric polynomial as a function of (x, t)."""
    return lambda x, t: heat_polynomial(n, 1.0 - x, t)


@dataclass(frozen=True)
class BranchingPolynomial:
    """Branching equation of a multiplicity-2n zero, in lambda^2 and in Lambda.

    lambda_coeffs[m] multiplies lambda^{2n-2m}; Lambda_coeffs are the same
    numbers read as a degree-n polynomial in Lambda = lambda^2 (leading
    coefficient first).
    """

    n: int
    lambda_coeffs: np.ndarray
    Lambda_coeffs: np.ndarray


def branching_polynomial(n: int) -> BranchingPolynomial:
    """Coefficients of sum_m (-1)^m Lambda^{n-m} / ((2n-2m)! m!) = 0."""
    if not 1 <= n <= 20:
        raise ValueError("n must be in 1..20")
    coeffs = np.array(
        [(-1.0) ** m / (math.factorial(2 * n - 2 * m) * math.factorial(m)) for m in range(n + 1)]
    )
    return BranchingPolynomial(n=n, lambda_coeffs=coeffs, Lambda_coeffs=coeffs.copy())


def branching_roots(n: int) -> np.ndarray:
    """The 2n simple real locations +-sqrt(Lambda_k), sorted increasing.

    Lambda roots come from companion-matrix eigenvalues (imaginary parts
    below 1e-8 relative are discarded) and are polished by bracketed
    bisection to ~1e-13.  All Lambda_k must come out positive and distinct;
    anything else indicates a bug and raises AssertionError.
    """
    poly = branching_polynomial(n)
    raw = np.roots(poly.Lambda_coeffs)
    scale = np.max(np.abs(raw))
    if np.any(np.abs(raw.imag) > 1e-8 * scale):
        raise AssertionError(f"complex branching root beyond tolerance for n={n}: {raw}")
    lam = np.sort(raw.real)
    if np.any(lam <= 0):
        raise AssertionError(f"non-positive branching root for n={n}: {lam}")
    pval = lambda L: float(np.polyval(poly.Lambda_coeffs, L))
    polished = []
    for L in lam:
        lo, hi = L, L
        step = max(1e-9, 1e-9 * L)
        while pval(lo) * pval(hi) > 0 and step < 0.5 * L:
            lo, hi = L - step, L + step
            step *= 2.0
        if pval(lo) * pval(hi) < 0:
            L = brentq(pval, lo, hi, xtol=1e-13, rtol=8.9e-16)
        polished.append(L)
    lam = np.array(polished)
    if np.any(np.diff(lam) <= 0):
        raise AssertionError(f"branching roots not distinct for n={n}: {lam}")
    roots = np.sqrt(lam)
    return np.sort(np.concatenate([-roots, roots]))


@dataclass(frozen=True)
class TrackedZeros:
    """Roots of u(1-eps, .) near a branching zero, with asymptotic predictions."""

    n: int
    eps: float
    roots: np.ndarray
    predicted: np.ndarray
    mismatch: bool


def track_zeros(u, n: int, eps: float) -> TrackedZeros:
    """Locate the roots of u(1-eps, .) by sign scan plus bracketed bisection.

    u is either a callable u(x, t) or an Interpolant.  The scan covers
    |t| <= 3 sqrt(eps) max|lambda| with step sqrt(eps)/50; predictions are
    (lambda_k/2) sqrt(eps).  A root count different from 2n is reported via
    the mismatch flag (the branching count is only asymptotic in eps).
    """
    if not 0 < eps <= 0.5:
        raise ValueError(f"eps must be in (0, 0.5], got {eps}")
    lam = branching_roots(n)
    predicted = 0.5 * lam * math.sqrt(eps)
    g = (lambda t: poisson_eval(u, 1.0 - eps, t)) if isinstance(u, Interpolant) else (
        lambda t: u(1.0 - eps, t)
    )
    half = 3.0 * math.sqrt(eps) * float(np.max(np.abs(lam)))
    step = math.sqrt(eps) / 50.0
    ts = np.arange(-half, half + step, step)
    gv = np.asarray(g(ts), dtype=float)
    roots = []
    for i in np.flatnonzero(np.sign(gv[:-1]) * np.sign(gv[1:]) < 0):
        roots.append(brentq(lambda t: float(g(t)), ts[i], ts[i + 1], xtol=1e-15, rtol=8.9e-16))
    for i in np.flatnonzero(gv == 0.0):
        roots.append(float(ts[i]))
    roots = np.sort(np.unique(np.asarray(roots)))
    return TrackedZeros(
        n=n, eps=eps, roots=roots, predicted=predicted, mismatch=roots.size != 2 * n
    )


def kernel_estimate_bound(q: int, x: float) -> float:
    """A-priori bound on the x-smoothed power of a solution with even power 2q.

    Defined for integer q >= 1 and x > 1/(2q-1); at x = 1 this reduces to
    2^(-1/(4q-2)) sqrt((2q-1)/(2q-2)), which exists only for q >= 2.
    """
    if q < 1:
        raise ValueError(f"q must be a positive integer, got {q}")
    if not x > 1.0 / (2 * q - 1):
        raise ValueError(
            f"x must exceed 1/(2q-1)={1.0 / (2 * q - 1)}, got {x}"
            + (" (the x=1 constant requires q >= 2)" if q == 1 else "")
        )
    return (
        x ** (q / (2 * q - 1))
        * (1 + x) ** (-1.0 / (4 * q - 2))
        * math.sqrt((2 * q - 1) / (2 * q * x - x - 1))
    )


def kernel_estimate_check(phi, q: int, x: float, ts, rule: QuadratureRule | None = None) -> float:
    """Worst-case margin bound - J(x, t) over the sample points ts.

    J(x, t) is the x-smoothed 2q-th power, (pi x)^(-1/2) int phi^{2q}(tau)
    exp(-(t-tau)^2/x) dtau; a negative margin means the bound is violated
    (phi cannot be a solution).
    """
    bound = kernel_estimate_bound(q, x)
    power = lambda t: np.asarray(phi(t), dtype=float) ** (2 * q)
    jv = np.atleast_1d(poisson_eval(power, x, np.asarray(ts, dtype=float), rule))
    return float(np.min(bound - jv))


def detect_multiplicity(f, t0: float, j_range: tuple[int, int] = (6, 18)) -> float:
    """Order of a zero of f at t0 by log-log slope on the dyadic ladder t0 +- 2^-j."""
    hs, vals = [], []
    for j in range(*j_range):
        h = 2.0**-j
        for side in (+1, -1):
            v = abs(float(f(t0 + side * h)))
            if v > 0:
                hs.append(h)
                vals.append(v)
    if len(vals) < 4:
        raise ValueError(f"cannot fit a slope at t0={t0}: function vanishes on the ladder")
    slope = np.polyfit(np.log(hs), np.log(vals), 1)[0]
    return float(slope)


@dataclass(frozen=True)
class ZeroReport:
    """Zeros (location, multiplicity) and first-kind jumps (location, saltus)."""

    zeros: list
    jumps: list


def zero_report(g: GridFunction, jump_factor: float = 8.0) -> ZeroReport:
    """Classify sign changes of grid data into genuine zeros and jumps.

    A node gap whose value change exceeds jump_factor times the median
    neighbour change is reported as a discontinuity of the first kind with
    its saltus; remaining sign changes are refined by bisection on the
    interpolant and classified by the dyadic slope fit (multiplicity,
    rounded to the nearest integer >= 1).  The dyadic ladder stays above
    the grid spacing, below which linear interpolation would flatten every
    zero to first order.
    """
    t, v = g.nodes, g.values
    h_grid = float(np.median(np.diff(t)))
    j_lo = max(0, math.ceil(-math.log2(min(0.25, 32 * h_grid))))
    j_hi = max(j_lo + 4, math.floor(-math.log2(2 * h_grid)) + 1)
    dv = np.abs(np.diff(v))
    med = max(float(np.median(dv)), 1e-300)

    def multiplicity_at(t0: float) -> int:
        try:
            return max(1, round(detect_multiplicity(g, t0, j_range=(j_lo, j_hi))))
        except ValueError:
            return 1

    jumps = []
    zeros = []
    for i in np.flatnonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0):
        if dv[i] > jump_factor * med:
            jumps.append((float(0.5 * (t[i] + t[i + 1])), float(v[i + 1] - v[i])))
            continue
        root = brentq(lambda s: float(g(s)), t[i], t[i + 1], xtol=1e-13)
        zeros.append((float(root), multiplicity_at(float(root))))
    for i in np.flatnonzero(v == 0.0):
        zeros.append((float(t[i]), multiplicity_at(float(t[i]))))
    zeros.sort()
    jumps.sort()
    return ZeroReport(zeros=zeros, jumps=jumps)
