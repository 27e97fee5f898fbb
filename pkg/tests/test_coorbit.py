import math

import numpy as np
import pytest

from anisowave.anisotropy import build_ellipsoid, make_expansive, quasi_norm
from anisowave.coorbit import (
    control_weight,
    control_weight_eval,
    control_weight_symmetry_defect,
    envelope_eval,
    envelope_field,
    envelope_integrability,
    envelope_maximal_check,
    fit_envelope,
    grafakos_estimate_check,
    h_function_alternative_ratio,
    lambda_sensitivity,
    molecule_envelope_defect,
    molecule_envelope_parameters,
    molecule_param_check,
    random_elements,
    weight_check,
    weight_field,
    weight_v,
    weighted_lr_norm,
    wiener_amalgam_norm,
    wiener_symmetry_defect,
    wavelet_decay_bounds_check,
)
from anisowave.group import field_from_function
from anisowave.models import Envelope, GridSpec, GroupElement, GroupField, QBox, TLParams
from anisowave.spectra import build_admissible, tight_profile
from anisowave.transform import make_signal, signal_from_window, wavelet_transform

LINE = make_expansive([[2.0]], lambda_minus=1.9)
ISO = make_expansive([[2.0, 0.0], [0.0, 2.0]])
DIAG = make_expansive([[2.0, 0.0], [0.0, 4.0]])
LINE_E = build_ellipsoid(LINE)
DECAY_GRID = GridSpec(d=1, n=128, X=8.0, m=1, s_min=0.0, s_max=0.0)
SCALES = (-1.0, 2.0, 13)


def origin(d=1):
    return GroupElement(np.zeros(d), 0.0)


def test_envelope_values():
    env = Envelope(sigma=(2.0, 0.5), L=2.0)
    assert envelope_eval(env, origin(), LINE, LINE_E) == 1.0
    flat = Envelope(sigma=(3.0, 5.0), L=0.0)
    assert abs(envelope_eval(flat, GroupElement([7.0], 1.5), LINE, LINE_E) - 3.0 ** 1.5) < 1e-12
    assert abs(envelope_eval(flat, GroupElement([7.0], -0.5), LINE, LINE_E) - 5.0 ** -0.5) < 1e-12


def test_envelope_at_shell_of_three():
    # rho(x) = rho(A^-s x) = 3 needs |det A| = 3 and s = 0
    M = make_expansive([[3.0]])
    E = build_ellipsoid(M)
    env = Envelope(sigma=(1.0, 1.0), L=1.0)
    points = [GroupElement([v], 0.0) for v in np.linspace(0.1, 5.0, 200)]
    hits = [g for g in points if quasi_norm(E, M, g.x) == 3.0]
    assert hits
    assert abs(envelope_eval(env, hits[0], M, E) - 0.25) < 1e-12


def test_envelope_field_matches_pointwise():
    grid = GridSpec(d=1, n=16, X=4.0, m=5, s_min=-1.0, s_max=1.0)
    env = Envelope(sigma=(0.5, 3.0), L=1.5)
    F = envelope_field(env, grid, LINE, LINE_E)
    X = grid.axis
    for j, s in enumerate(grid.scales):
        for k in (0, 5, 11):
            assert abs(F.values[j, k] - envelope_eval(env, GroupElement([X[k]], s), LINE, LINE_E)) < 1e-14


def test_h_function_alternative():
    points = [origin()] + random_elements(LINE, 200, seed=3)
    report = h_function_alternative_ratio(2.0, points, LINE, LINE_E)
    assert abs(report["C"] - 1.0) < 1e-12
    points2 = [origin(2)] + random_elements(DIAG, 200, seed=4)
    report2 = h_function_alternative_ratio(2.0, points2, DIAG)
    assert report2["low"] <= 1.0 <= report2["high"]
    assert report2["C"] < 4.0 ** 4


def test_weight_v_closed_form():
    assert weight_v(origin(), LINE, E=LINE_E) == 2.0
    assert weight_v(origin(), LINE, mode="bruteforce", E=LINE_E) >= 1.0
    assert abs(weight_v(GroupElement([0.0], 30.0), LINE, E=LINE_E) - 1.0) < 1e-8
    with pytest.raises(ValueError):
        weight_v(origin(), LINE, mode="exact")


def test_weight_v_bruteforce_against_closed_form():
    report = weight_check(LINE, count=40, seed=1, E=LINE_E)
    assert report["violations"] == 0
    assert report["C"] < 10
    report2 = weight_check(DIAG, count=20, seed=2)
    assert report2["violations"] == 0
    assert report2["C"] < 20


def test_control_weight_exponents():
    spec = control_weight(TLParams(p=2.0, q=2.0, alpha=0.0, beta=1.0), ISO)
    assert spec.branch == "upper"
    assert spec.sigma == (4.0, 1.0)
    assert abs(spec.kappa[0] - 8.0) < 1e-12
    assert abs(spec.kappa[1] - 0.5) < 1e-12
    spec1 = control_weight(TLParams(p=1.0, q=1.0, alpha=0.0, beta=1.0), DIAG)
    assert spec1.sigma == (8.0, 1.0)
    low = control_weight(TLParams(p=2.0, q=2.0, alpha=-3.0, beta=1.0), ISO)
    assert low.branch == "lower"
    assert abs(low.kappa[0] - 4.0 ** 3.5) < 1e-9
    assert abs(low.kappa[1] - 4.0 ** -2.5) < 1e-15


def test_control_weight_exponents_oracle():
    rng = np.random.default_rng(0)
    for _ in range(20):
        p, q = rng.uniform(0.5, 4.0, size=2)
        params = TLParams(p=p, q=q, alpha=rng.uniform(-2, 2), beta=rng.uniform(0.5, 3))
        spec = control_weight(params, DIAG)
        a, r = 8.0, min(1.0, p, q)
        g = params.alpha + 1 / p - 1 / q
        assert spec.sigma == (a ** (1 / r + abs(g)), a ** (-abs(g)))
        first = 1 / r + params.alpha + params.beta - 1 / q
        second = -(params.alpha - 1 / q)
        assert abs(math.log(spec.kappa[0], a) - max(first, second)) < 1e-9


def test_control_weight_identity_and_symmetry():
    spec = control_weight(TLParams(p=2.0, q=2.0, alpha=0.3, beta=1.1), LINE)
    assert control_weight_eval(spec, origin(), LINE, LINE_E) == 2.0
    points = random_elements(LINE, 100, seed=5)
    assert all(control_weight_eval(spec, g, LINE, LINE_E) >= 1.0 for g in points)
    assert control_weight_symmetry_defect(spec, points, LINE, LINE_E) < 1e-9
    spec2 = control_weight(TLParams(p=0.8, q=3.0, alpha=-1.0, beta=2.0), DIAG)
    assert control_weight_symmetry_defect(spec2, random_elements(DIAG, 50, seed=6), DIAG) < 1e-9


def gaussian_field(grid, centre=0.0):
    return field_from_function(grid, lambda X, s: np.exp(-((X[:, 0] - centre) ** 2) - s ** 2))


def test_wiener_amalgam_basics():
    grid = GridSpec(d=1, n=64, X=4.0, m=9, s_min=-2.0, s_max=2.0)
    assert wiener_amalgam_norm(GroupField(grid=grid, values=np.zeros(grid.shape)), LINE) == 0.0
    F = gaussian_field(grid)
    small = wiener_amalgam_norm(F, LINE, QBox(half_width=0.5))
    large = wiener_amalgam_norm(F, LINE, QBox(half_width=1.0))
    assert weighted_lr_norm(F, LINE) <= small <= large


def test_wiener_amalgam_of_window_transform_is_finite():
    window = build_admissible(LINE, tight_profile(center=0.0))
    W = wavelet_transform(signal_from_window(window, DECAY_GRID), window, (-2.0, 2.0, 9))
    spec = control_weight(TLParams(p=2.0, q=2.0, alpha=0.0, beta=1.1), LINE)
    weight = weight_field(spec, W.grid, LINE, LINE_E)
    value = wiener_amalgam_norm(W, LINE, r=1.0, weight=weight)
    assert np.isfinite(value)
    assert value >= weighted_lr_norm(W, LINE, 1.0, weight)


def test_wiener_symmetry():
    grid = GridSpec(d=1, n=128, X=8.0, m=25, s_min=-3.0, s_max=3.0)
    spec = control_weight(TLParams(p=2.0, q=2.0, alpha=0.0, beta=1.1), LINE)
    weight = weight_field(spec, grid, LINE, LINE_E)
    invariant = field_from_function(grid, lambda X, s: np.exp(-(X[:, 0] ** 2) * (1 + 4.0 ** -s) - s ** 2))
    assert wiener_symmetry_defect(invariant, LINE, r=1.0, weight=weight) < 0.05
    assert wiener_symmetry_defect(gaussian_field(grid), LINE, r=1.0, weight=weight) < 1.0


def test_envelope_integrability_examples():
    a = LINE.det_a
    finite = envelope_integrability(Envelope(sigma=(0.5, 4 * a), L=2.0), 1.0, LINE)
    assert finite["finite"] and finite["certified"]
    assert finite["value"] > 0
    flat = envelope_integrability(Envelope(sigma=(1.0, 4 * a), L=2.0), 1.0, LINE)
    assert not flat["finite"] and not flat["s_positive"]["cauchy"]
    steps = np.diff(flat["s_positive"]["partial_sums"])
    assert np.allclose(steps, steps[0])
    boundary = envelope_integrability(Envelope(sigma=(0.5, 4 * a), L=1.0), 1.0, LINE)
    assert not boundary["finite"] and not boundary["x_outer"]["cauchy"]


def test_envelope_integrability_agreement():
    a = DIAG.det_a
    for sigma1 in (0.5, 1.0, 1.5):
        for sigma2 in (0.5 * a, a, 2.0 * a):
            for L in (0.5, 1.0, 2.0):
                report = envelope_integrability(Envelope(sigma=(sigma1, sigma2), L=L), 1.0, DIAG)
                assert report["agree"]
    with pytest.raises(ValueError):
        envelope_integrability(Envelope(sigma=(0.5, 8.0), L=2.0), 1.5, DIAG)


def test_envelope_maximal_stability():
    grid = GridSpec(d=1, n=64, X=8.0, m=17, s_min=-4.0, s_max=4.0)
    for env in (Envelope((0.5, 4.0), 2.0), Envelope((0.25, 8.0), 1.5), Envelope((2.0, 0.5), 0.0),
                Envelope((1.0, 1.0), 3.0)):
        report = envelope_maximal_check(env, grid, LINE, E=LINE_E)
        assert 1.0 <= report["C_inner"] <= report["C"] < 1e3
        assert report["spread"] < 10.0


def test_molecule_param_check_examples():
    params = TLParams(p=2.0, q=2.0, alpha=0.0, beta=1.0)
    ok = molecule_param_check(params, L=5.0, N=3, delta=0.5, lambda_minus=1.9, det_a=2.0)
    assert ok["passed"]
    assert abs(ok["threshold"] - 2.0) < 1e-12
    assert abs(ok["growth"] - 1.9 ** 1.5) < 1e-12
    low = molecule_param_check(params, L=5.0, N=1, delta=0.5, lambda_minus=1.9, det_a=2.0)
    assert not low["passed"]
    assert low["margins"]["lambda"] < 1
    tight = molecule_param_check(params, L=5.0, N=30, delta=0.999, lambda_minus=1.9, det_a=2.0)
    assert not tight["passed"]
    assert tight["margins"]["L"] < 0
    with pytest.raises(ValueError):
        molecule_param_check(params, L=5.0, N=3, delta=1.0, lambda_minus=1.9, det_a=2.0)


def test_molecule_param_check_is_monotone():
    params = TLParams(p=1.0, q=2.0, alpha=0.25, beta=1.5)
    grid = [[molecule_param_check(params, L=L, N=N, delta=0.4, lambda_minus=1.9, det_a=2.0)["passed"]
             for N in range(10)] for L in np.linspace(1.5, 10.0, 10)]
    for i in range(10):
        for j in range(10):
            if grid[i][j]:
                assert all(grid[i][k] for k in range(j, 10))
                assert all(grid[k][j] for k in range(i, 10))


def test_lambda_sensitivity_rows():
    rows = lambda_sensitivity(LINE, TLParams(p=2.0, q=2.0, beta=1.0), L=5.0, N=3, delta=0.5)
    assert len(rows) == 5
    assert all(1 < row["lambda_minus"] < 2 for row in rows)
    flags = [row["passed"] for row in rows]
    assert flags == sorted(flags)


def test_molecule_envelope_parameters():
    env = molecule_envelope_parameters(TLParams(p=2.0, q=2.0), L=5.0, N=3, delta=0.5, lambda_minus=1.9, det_a=2.0)
    growth = 1.9 ** 1.5
    assert abs(env.sigma[0] - 2 ** -0.5 / growth) < 1e-12
    assert abs(env.sigma[1] - 2 ** 0.5 * growth) < 1e-12
    assert env.L == 2.5


def test_molecule_envelope_defect_for_orbit_system():
    window = build_admissible(LINE, tight_profile(center=0.0))
    env = Envelope(sigma=(0.5, 2.0), L=2.0)
    W = wavelet_transform(signal_from_window(window, DECAY_GRID), window, SCALES)
    amplitude = fit_envelope(W, env, LINE, LINE_E) * 1.05
    points = [GroupElement([y], 0.0) for y in (0.0, 1.0, -2.5)]
    family = [signal_from_window(window, DECAY_GRID, g) for g in points]
    assert molecule_envelope_defect(family, points, window, env, amplitude, SCALES, LINE_E) == 0.0
    assert molecule_envelope_defect(family, points, window, env, amplitude / 2.1, SCALES, LINE_E) > 0
    assert molecule_envelope_defect([], [], window, env, amplitude, SCALES, LINE_E) == 0.0


def test_wavelet_decay_bounds():
    window = build_admissible(LINE, tight_profile(center=0.0))
    f2 = signal_from_window(window, DECAY_GRID)
    report = wavelet_decay_bounds_check(window, f2, L=3.0, N=1, scales=SCALES, E=LINE_E)
    assert report["moments_ok"]
    assert report["passed"]
    fine = signal_from_window(window, GridSpec(d=1, n=256, X=8.0, m=1, s_min=0.0, s_max=0.0))
    refined = wavelet_decay_bounds_check(window, fine, L=3.0, N=1, scales=SCALES, E=LINE_E)
    assert abs(refined["C_spatial"] / report["C_spatial"] - 1.0) < 0.2

    gaussian = make_signal("gaussian", DECAY_GRID, width=1.0)
    flagged = wavelet_decay_bounds_check(window, gaussian, L=3.0, N=1, scales=SCALES, E=LINE_E)
    assert not flagged["moments_ok"]
    assert not flagged["passed"]


def test_grafakos_estimate():
    grid = GridSpec(d=1, n=128, X=16.0, m=1, s_min=0.0, s_max=0.0)
    report = grafakos_estimate_check(LINE, 2.0, [0.0, 1.0, 2.5], grid, LINE_E)
    assert len(report["per_scale"]) == 3
    assert 0 < report["C"] < 20
    with pytest.raises(ValueError):
        grafakos_estimate_check(LINE, 2.0, [-1.0], grid, LINE_E)
