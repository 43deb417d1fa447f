"""Acceptance gate: one test per criterion, each at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to get one pass/fail line
per criterion.
"""
import math

import numpy as np
import pytest

from padic_string import basis, bvp, gaussop, heatflow, solver

from conftest import const_one, hermite_fn, modified_hermite_fn

SQRT_PI = math.sqrt(math.pi)


def report(number, name):
    print(f"\nACCEPTANCE {number:2d} ({name}): PASS")


def test_criterion_01_three_approximation_table():
    sols = solver.solve_3approx()
    by_label = {}
    for s in sols:
        by_label.setdefault(s.label, []).append(s)

    plus = [s for s in by_label["branch_c"] if s.a1 > 0][0]
    assert plus.a0 == pytest.approx(0.4 + math.sqrt(0.15), abs=1e-12)
    assert plus.a0 == pytest.approx(0.7873, abs=1e-3)
    assert abs(plus.a1) == pytest.approx(0.6984, abs=1e-3)
    assert plus.a2 == pytest.approx(-0.4000, abs=1e-3)
    assert abs(plus.a3) == pytest.approx(1.219, abs=1e-3)
    assert {1, -1} == {int(np.sign(s.a1)) for s in by_label["branch_c"]}

    parabolic = by_label["parabolic"][0]
    assert parabolic.coefficients() == pytest.approx([0.25, 0.0, -1.0, 0.0], abs=1e-3)

    heads = [s for s in by_label["zero_head"] if s.a2 > 0]
    assert {1, -1} == {int(np.sign(s.a3)) for s in heads}
    for s in heads:
        assert s.a2 == pytest.approx(2.0 / 3.0, abs=1e-3)
        assert abs(s.a3) == pytest.approx(4.0 / math.sqrt(3.0), abs=1e-3)

    for s in sols:
        assert s.equation_residual() < 1e-9
    report(1, "truncated p=2 coefficient table")


def test_criterion_02_bvp_coefficients():
    alpha = math.sqrt(1.1)
    c = bvp.solve_bvp_3approx(alpha)
    printed_c = np.array([0.3014, 0.1648, -0.05016, 0.04494])
    assert np.max(np.abs(c - printed_c)) < 2e-4

    monomials = bvp.gaussian_part_monomials(bvp.ErfAnsatz(alpha=alpha, c=printed_c))
    printed_monomials = np.array([0.4017, -0.2200, -0.2207, 0.4149])
    assert np.max(np.abs(monomials - printed_monomials)) < 3e-4
    report(2, "erf-ansatz boundary coefficients")


def test_criterion_03_spectral_relation(rule96):
    ts = np.arange(-3.0, 3.0 + 0.05, 0.05)
    for xi in (0.5, 1.0, 2.0):
        f = lambda t: np.cos(xi * np.asarray(t, dtype=float))
        kv = gaussop.apply_K_point(f, ts, rule96)
        assert np.max(np.abs(kv - math.exp(-(xi**2) / 4) * f(ts))) < 1e-8
    assert np.max(np.abs(gaussop.apply_K_point(const_one, ts, rule96) - 1.0)) < 1e-10
    ident = lambda t: np.asarray(t, dtype=float)
    assert np.max(np.abs(gaussop.apply_K_point(ident, ts, rule96) - ts)) < 1e-10
    report(3, "spectrum of the convolution operator")


def test_criterion_04_exact_nonlinear_solution(rule96):
    rng = np.random.default_rng(1)
    for p in (2, 3):
        phi, u = solver.exact_gaussian_solution(p)
        assert solver.residual(phi, p, ts=np.arange(-2.0, 2.01, 0.05), halfwidth=18.0) < 1e-8
        for _ in range(20):
            x = rng.uniform(1e-3, 1.0)
            t = rng.uniform(-2.0, 2.0)
            assert abs(heatflow.poisson_eval(phi, x, t, rule96) - u(x, t)) < 1e-8
    report(4, "closed-form growing solution and interpolant")


def test_criterion_05_branching_roots():
    assert heatflow.branching_roots(1) == pytest.approx(
        [-math.sqrt(2), math.sqrt(2)], abs=1e-12
    )
    lam2 = [math.sqrt(6 - 2 * math.sqrt(6)), math.sqrt(6 + 2 * math.sqrt(6))]
    assert heatflow.branching_roots(2) == pytest.approx(
        sorted([-lam2[1], -lam2[0], lam2[0], lam2[1]]), abs=1e-10
    )
    assert heatflow.branching_roots(3) == pytest.approx(
        [-4.70, -2.67, -0.87, 0.87, 2.67, 4.70], abs=1e-2
    )
    for n in (1, 2):
        tracked = heatflow.track_zeros(heatflow.heat_polynomial_interpolant(n), n, 1e-4)
        assert not tracked.mismatch
        assert np.max(np.abs(tracked.roots - tracked.predicted)) < 1e-6
    report(5, "branching of a multiple zero")


def test_criterion_06_norm_bound(rule96):
    assert gaussop.norm_bound(0.5, 1.0) == math.sqrt(2)
    rng = np.random.default_rng(2)
    bound = math.sqrt(2)
    for _ in range(50):
        coeffs = rng.standard_normal(9) / np.array([math.factorial(k) for k in range(9)])
        f = lambda t: np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), coeffs)
        kf = gaussop.apply_K_series(basis.project(f, 1.0, 8, rule96))
        norm_kf = math.sqrt(max(basis.inner_product(kf, kf, 1.0, rule96), 0.0))
        norm_f = math.sqrt(max(basis.inner_product(f, f, 0.5, rule96), 0.0))
        assert norm_kf <= bound * norm_f + 1e-9
    report(6, "operator norm constant")


def test_criterion_07_conservation_laws(solved_p3):
    laws = solver.conservation_laws_check(solved_p3.phi, 3, 8)
    assert np.max(laws) < 1e-6
    ts = np.linspace(-10.0, 10.0, 4001)
    pv = solved_p3.phi(ts)
    assert abs(np.trapezoid(pv - pv**3, ts)) < 1e-3
    report(7, "integral conservation laws")


def test_criterion_08_odd_power_solution(solved_p3):
    assert solved_p3.converged
    assert solved_p3.trace[-1]["change"] < 1e-8
    ts = np.linspace(0.01, 9.0, 500)
    assert np.max(np.abs(solved_p3.phi(ts) + solved_p3.phi(-ts))) < 1e-6
    assert np.max(np.abs(solved_p3.grid.values)) < 1.0
    limits = solver.limit_diagnostics(solved_p3.grid, 3, edge=8.0)
    assert (limits.left_limit, limits.right_limit) == (-1.0, 1.0)
    assert limits.left_distance < 1e-2 and limits.right_distance < 1e-2
    local = bvp.local_zero_analysis(solved_p3.grid, 1)
    assert abs(local.fitted_exponent - 1 / 3) < 0.05 * (1 / 3)
    assert local.a1 > 0
    report(8, "odd cube-root boundary solution")


def test_criterion_09_basis_machinery(rule96):
    gauss = lambda t: np.exp(-np.asarray(t, dtype=float) ** 2)
    cosine = lambda t: np.cos(np.asarray(t, dtype=float))
    expo = lambda t: np.exp(np.asarray(t, dtype=float))
    for f in (gauss, cosine, expo):
        series = basis.project(f, 1.0, 30, rule96)
        assert basis.parseval_residual(f, series, rule96) < 1e-8

    rng = np.random.default_rng(9)
    for _ in range(10):
        series = basis.HermiteSeries("H", rng.standard_normal(9))
        back = basis.convert_b_to_a(basis.convert_a_to_b(series, M=24), M=24)
        assert np.max(np.abs(back.coeffs[:9] - series.coeffs)) < 1e-9

    # tolerance 1e-9 at the Cauchy-Schwarz scale of each entry: the table
    # values themselves reach 2^10 10! ~ 4e9, so an absolute 1e-9 is below
    # double-precision resolution of the quadrature sums
    rule64 = basis.gauss_hermite_rule(64)
    for alpha, pair, closed_fn in (
        (0.5, lambda m, n: (hermite_fn(m), modified_hermite_fn(n)), basis.duality_HV_half),
        (1.0, lambda m, n: (hermite_fn(n), modified_hermite_fn(m)), lambda m, n: basis.duality_HV_one(n, m)),
    ):
        for m in range(11):
            for n in range(11):
                f, g = pair(m, n)
                value = basis.inner_product(f, g, alpha, rule64)
                scale = math.sqrt(
                    basis.inner_product(f, f, alpha, rule64)
                    * basis.inner_product(g, g, alpha, rule64)
                )
                assert abs(value - closed_fn(m, n)) < 1e-9 * max(1.0, scale)
    report(9, "weighted basis machinery")


def test_criterion_10_linear_periodic_solutions(rule96):
    phi, u = gaussop.periodic_solution(1, +1)
    ts = np.arange(-1.5, 1.5 + 0.05, 0.05)
    kv = gaussop.apply_K_point(phi, ts, rule96)
    assert np.max(np.abs(kv - phi(ts))) < 1e-7
    for x, t in ((0.3, 0.2), (0.7, -0.4), (0.5, 0.1), (0.25, 0.45)):
        assert heatflow.caloric_residual(u, x, t, h=1e-3) < 1e-8
    report(10, "oscillating linear fixed points")
