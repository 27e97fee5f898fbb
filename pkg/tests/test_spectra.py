import doctest
import warnings

import numpy as np
import pytest

from anisowave import spectra
from anisowave.anisotropy import adjoint, build_ellipsoid, continuous_scale, make_expansive, matrix_power
from anisowave.errors import AliasWarning, CoverageGap, ProfileDegenerate
from anisowave.models import GridSpec, ScaleProfile
from anisowave.spectra import (
    admissibility_defect,
    build_admissible,
    build_calderon_pair,
    calderon_defect,
    coverage,
    dilate_fourier,
    evaluate_window,
    frequency_scales,
    moments,
    periodized_energy,
    profile_l2_norm,
    profile_values,
    random_frequencies,
    smooth_step,
    synthesize,
    tight_profile,
    window_on_grid,
    window_profile,
)

DIAG = make_expansive([[2.0, 0.0], [0.0, 4.0]])
JORDAN = make_expansive([[2.0, 1.0], [0.0, 2.0]])
LINE = make_expansive([[2.0]])

# Wide, high-frequency bump: fast spatial decay on a modest box.
SMOOTH = ScaleProfile(kind="bump", center=2.5, halfwidth=1.5)
LONG_GRID = GridSpec(d=1, n=1024, X=32.0, m=1, s_min=0.0, s_max=0.0)


def test_smooth_step_partition():
    u = np.linspace(-0.5, 1.5, 201)
    step = smooth_step(u)
    assert np.all(step[u <= 0] == 0)
    assert np.all(step[u >= 1] == 1)
    assert np.allclose(step + smooth_step(1 - u), 1.0, atol=1e-15)


def test_profile_support_and_zero_frequency():
    profile = ScaleProfile()
    t = np.array([-np.inf, -1.0, -0.99, 0.5, 2.0, 3.0])
    values = profile_values(profile, t)
    assert values[0] == 0 and values[1] == 0 and values[-1] == 0
    assert values[3] == 1.0
    assert values[2] > 0


def test_cosine_profile_has_unit_norm_and_partition():
    profile = tight_profile(center=0.0)
    assert abs(profile_l2_norm(profile) - 1.0) < 1e-10
    low, high = coverage(profile)
    assert abs(low - 1.0) < 1e-12 and abs(high - 1.0) < 1e-12


def test_admissible_defect_is_small():
    window = build_admissible(DIAG)
    xi = random_frequencies(DIAG, 200, seed=4)
    assert admissibility_defect(window, xi)["defect"] < 1e-6


def test_admissible_defect_for_non_diagonal_matrix():
    window = build_admissible(JORDAN, ScaleProfile(kind="bump", center=0.0, halfwidth=1.2))
    xi = random_frequencies(JORDAN, 100, seed=5)
    assert admissibility_defect(window, xi)["defect"] < 1e-6


def test_degenerate_profile():
    with pytest.raises(ProfileDegenerate):
        build_admissible(DIAG, ScaleProfile(kind="bump", center=0.0, halfwidth=0.0))


def test_unknown_profile_kind():
    with pytest.raises(ValueError):
        build_admissible(DIAG, ScaleProfile(kind="gaussian"))


def test_window_vanishes_at_origin():
    window = build_admissible(DIAG)
    assert evaluate_window(window, np.zeros((1, 2)))[0] == 0.0


def test_orbit_shift():
    window = build_admissible(DIAG)
    star = adjoint(DIAG)
    xi = random_frequencies(DIAG, 20, seed=6)
    t = continuous_scale(window.ellipsoid, star, xi)
    assert np.any(evaluate_window(window, xi) > 0)
    for u in (-0.75, 0.3, 1.0):
        moved = xi @ matrix_power(star, u).T
        expected = window_profile(window, t + u)
        assert np.max(np.abs(evaluate_window(window, moved) - expected)) < 1e-9


def test_calderon_pair_with_short_plateau():
    profile = ScaleProfile(kind="plateau-bump", center=0.0, halfwidth=0.75, plateau_halfwidth=0.5)
    pair = build_calderon_pair(DIAG, profile)
    assert not pair.tight
    xi = random_frequencies(DIAG, 200, seed=7)
    assert calderon_defect(pair, xi)["defect"] < 1e-6
    t = np.linspace(-2, 2, 4001)
    sums = sum(
        window_profile(pair.analyzing, t + j) * window_profile(pair.dual, t + j) for j in range(-3, 4)
    )
    assert np.max(np.abs(sums - 1.0)) < 1e-12


def test_narrow_bump_leaves_gaps():
    with pytest.raises(CoverageGap):
        build_calderon_pair(DIAG, ScaleProfile(kind="bump", center=0.0, halfwidth=0.4))


def test_tight_pair_is_parseval():
    pair = build_calderon_pair(JORDAN, tight_profile())
    assert pair.tight
    xi = random_frequencies(JORDAN, 150, seed=8)
    assert calderon_defect(pair, xi)["defect"] < 1e-6
    t = np.linspace(-1, 1, 501)
    assert np.allclose(periodized_energy(pair.analyzing.profile, t), 1.0, atol=1e-12)


def test_dilate_fourier_identity_and_support_shift():
    grid = GridSpec(d=2, n=32, X=4.0, m=1, s_min=0.0, s_max=0.0)
    window = build_admissible(DIAG, ScaleProfile(kind="bump", center=0.0, halfwidth=1.0))
    assert np.array_equal(dilate_fourier(window, 0.0, grid), window_on_grid(window, grid))
    t = frequency_scales(window, grid)
    moved = dilate_fourier(window, 0.5, grid)
    inside = moved > 0
    assert np.all(np.abs(t[inside] - 0.5) < 1.0)


def test_dilate_fourier_plancherel():
    grid = GridSpec(d=1, n=1024, X=64.0, m=1, s_min=0.0, s_max=0.0)
    window = build_admissible(LINE, ScaleProfile(kind="bump", center=0.5, halfwidth=1.5))
    base = np.sum(np.abs(dilate_fourier(window, 0.0, grid)) ** 2)
    for s in (-0.5, 0.5, 1.0):
        dilated = np.sum(np.abs(dilate_fourier(window, s, grid)) ** 2)
        assert abs(dilated / base / LINE.det_a ** s - 1.0) < 1e-4


def test_synthesized_window_is_real_with_vanishing_moments():
    window = build_admissible(LINE, SMOOTH)
    samples, report = synthesize(window, LONG_GRID)
    assert report["imag_max"] < 1e-10
    assert not report["alias"]
    assert moments(samples.real, LONG_GRID, order=3) < 1e-3


def test_synthesized_window_decays_fast():
    window = build_admissible(LINE, SMOOTH)
    _, report = synthesize(window, LONG_GRID)
    assert report["decay"]["slope"] <= -3.0


def test_gaussian_has_nonvanishing_mean():
    X = LONG_GRID.axis
    assert moments(np.exp(-X ** 2), LONG_GRID, order=0) > 0.99


def test_synthesize_warns_on_alias():
    grid = GridSpec(d=1, n=32, X=4.0, m=1, s_min=0.0, s_max=0.0)
    window = build_admissible(LINE, ScaleProfile(kind="bump", center=2.5, halfwidth=1.5))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        _, report = synthesize(window, grid)
    assert report["alias"]
    assert any(issubclass(w.category, AliasWarning) for w in caught)


def test_profile_round_trip_dict():
    profile = ScaleProfile(kind="plateau-bump", center=0.25, halfwidth=0.75, plateau_halfwidth=0.5)
    assert ScaleProfile.from_dict(profile.to_dict()) == profile
    assert build_ellipsoid(adjoint(DIAG)).r > 1


def test_docstring_examples_run():
    assert doctest.testmod(spectra).failed == 0
