import numpy as np
import pytest

from anisowave.anisotropy import build_ellipsoid, make_expansive, quasi_norm
from anisowave.errors import EmptyBallRange
from anisowave.group import field_from_function
from anisowave.maximal import (
    MAXIMAL_KINDS,
    ball_masks,
    default_ball_range,
    dilation_commutation_defect,
    fefferman_stein_monitor,
    group_maximal_check,
    hl_maximal,
    local_envelope_constant,
    local_maximal,
    majorant_check,
    maximal_field,
    peetre_inequality_constant,
    peetre_maximal,
    pointwise_indicator_check,
)
from anisowave.models import GridSpec, GroupField, MaximalConfig, QBox
from anisowave.transform import make_signal
from anisowave.utils import spatial_points

LINE = make_expansive([[2.0]])
DIAG = make_expansive([[2.0, 0.0], [0.0, 4.0]])
LINE_E = build_ellipsoid(LINE)
DIAG_E = build_ellipsoid(DIAG)
GRID1 = GridSpec(d=1, n=256, X=8.0, m=1, s_min=0.0, s_max=0.0)
GRID2 = GridSpec(d=2, n=32, X=4.0, m=1, s_min=0.0, s_max=0.0)


def gaussian(grid, width=1.0):
    X = spatial_points(grid)
    return np.exp(-np.sum(X ** 2, axis=1) / width ** 2).reshape(grid.spatial_shape)


def test_constant_function_is_fixed():
    ones = np.ones(GRID2.spatial_shape)
    assert np.allclose(hl_maximal(ones, GRID2, DIAG, DIAG_E), 1.0, atol=1e-12)


def test_maximal_dominates_and_is_homogeneous():
    f = np.random.default_rng(0).normal(size=GRID2.spatial_shape)
    Mf = hl_maximal(f, GRID2, DIAG, DIAG_E)
    assert np.all(Mf >= np.abs(f))
    assert np.allclose(hl_maximal(-3.0 * f, GRID2, DIAG, DIAG_E), 3.0 * Mf, rtol=1e-12)
    assert np.all(hl_maximal(Mf, GRID2, DIAG, DIAG_E) >= Mf - 1e-12)


def test_centered_is_below_uncentered():
    f = gaussian(GRID2)
    centered = hl_maximal(f, GRID2, DIAG, DIAG_E, MaximalConfig(centered=True))
    assert np.all(centered <= hl_maximal(f, GRID2, DIAG, DIAG_E) + 1e-12)


def test_default_ball_range_spans_center_to_window():
    j_min, j_max = default_ball_range(GRID2, DIAG, DIAG_E)
    masks = dict(ball_masks(GRID2, DIAG, DIAG_E))
    assert np.count_nonzero(masks[j_min]) == 1
    assert np.all(masks[j_max])


def test_empty_ball_range():
    with pytest.raises(EmptyBallRange):
        hl_maximal(np.ones(GRID1.spatial_shape), GRID1, LINE, LINE_E, MaximalConfig(j_min=3, j_max=1))


def test_single_cell_decays_like_inverse_quasi_norm():
    f = np.zeros(GRID1.spatial_shape)
    f[GRID1.n // 2] = 1.0
    Mf = hl_maximal(f, GRID1, LINE, LINE_E)
    X = spatial_points(GRID1)
    rho = quasi_norm(LINE_E, LINE, X)
    far = (rho >= 8 * GRID1.step) & (np.abs(X[:, 0]) < GRID1.X / 2)
    scaled = Mf.ravel()[far] * rho[far] / GRID1.step
    assert np.all(scaled > 0.2) and np.all(scaled < 5.0)


def test_dilation_commutation():
    grid = GridSpec(d=1, n=512, X=8.0, m=1, s_min=0.0, s_max=0.0)

    def f(X):
        return np.exp(-np.sum(X ** 2, axis=1))

    assert dilation_commutation_defect(f, 0, grid, LINE, LINE_E) == 0.0
    assert dilation_commutation_defect(f, 1, grid, LINE, LINE_E) < 0.02


def test_peetre_dominates_and_decreases_in_beta():
    values = gaussian(GRID1) * np.cos(3 * GRID1.axis)
    low = peetre_maximal(values, GRID1, 0.0, 1.0, LINE, LINE_E)
    high = peetre_maximal(values, GRID1, 0.0, 3.0, LINE, LINE_E)
    assert np.all(low >= np.abs(values))
    assert np.all(high <= low + 1e-15)
    assert np.all(high >= np.abs(values))


def test_peetre_large_beta_and_constant_slice():
    values = gaussian(GRID1) * np.cos(3 * GRID1.axis)
    limit = peetre_maximal(values, GRID1, 0.0, 200.0, LINE, LINE_E)
    assert np.allclose(limit, np.abs(values), atol=1e-9)
    constant = np.full(GRID1.spatial_shape, 0.7)
    for beta in (0.5, 2.0):
        assert np.allclose(peetre_maximal(constant, GRID1, 1.0, beta, LINE, LINE_E), 0.7)


def test_pruned_peetre_is_between_slice_and_exact():
    values = gaussian(GRID2)
    exact = peetre_maximal(values, GRID2, 0.5, 1.5, DIAG, DIAG_E)
    pruned = peetre_maximal(values, GRID2, 0.5, 1.5, DIAG, DIAG_E, pruned=True, prune_ratio=1e-2)
    assert np.all(pruned <= exact + 1e-15)
    assert np.all(pruned >= values)


def test_peetre_rejects_nonpositive_beta():
    with pytest.raises(ValueError):
        peetre_maximal(np.ones(GRID1.spatial_shape), GRID1, 0.0, 0.0, LINE, LINE_E)


def test_peetre_inequality_constant_is_finite():
    values = gaussian(GRID1) * np.cos(2 * GRID1.axis)
    C = peetre_inequality_constant(values, GRID1, 0.0, 2.0, LINE, LINE_E)
    assert 0 < C < 100


def test_peetre_inequality_constant_is_stable_under_refinement():
    for beta in (1.1, 2.0):
        constants = []
        for n in (256, 512):
            grid = GridSpec(d=1, n=n, X=8.0, m=1, s_min=0.0, s_max=0.0)
            values = gaussian(grid) * np.cos(2 * grid.axis)
            constants.append(peetre_inequality_constant(values, grid, 0.0, beta, LINE, LINE_E))
        assert abs(constants[1] / constants[0] - 1.0) < 0.1


LOCAL_GRID = GridSpec(d=1, n=32, X=4.0, m=9, s_min=-2.0, s_max=2.0)


@pytest.fixture(scope="module")
def smooth_field():
    return field_from_function(LOCAL_GRID, lambda X, s: np.exp(-X[:, 0] ** 2 - s ** 2) * (1 + 0.5j))


def test_degenerate_box_is_modulus(smooth_field):
    result = local_maximal(smooth_field, LINE, QBox(half_width=0.0))
    assert np.allclose(result.values.real, np.abs(smooth_field.values), atol=1e-14)


def test_local_maximal_orderings(smooth_field):
    small = local_maximal(smooth_field, LINE, QBox(half_width=0.5))
    large = local_maximal(smooth_field, LINE, QBox(half_width=1.0))
    left = local_maximal(smooth_field, LINE, QBox(half_width=1.0), side="left")
    base = np.abs(smooth_field.values)
    assert np.all(small.values.real >= base - 1e-14)
    assert np.all(large.values.real >= small.values.real - 1e-14)
    assert np.all(left.values.real <= large.values.real + 1e-14)


def test_local_maximal_rejects_unknown_side(smooth_field):
    with pytest.raises(ValueError):
        local_maximal(smooth_field, LINE, side="right")


def test_maximal_field_kinds_dominate_the_modulus(smooth_field):
    base = np.abs(smooth_field.values)
    for kind in MAXIMAL_KINDS:
        result = maximal_field(smooth_field, kind, LINE, E=LINE_E)
        assert result.values.shape == smooth_field.values.shape
        assert np.all(result.values.real >= base - 1e-12)


def test_maximal_field_reads_its_config(smooth_field):
    base = np.abs(smooth_field.values)
    point = maximal_field(smooth_field, "local", LINE, MaximalConfig(box=QBox(half_width=0.0)))
    assert np.allclose(point.values.real, base, atol=1e-14)
    soft = maximal_field(smooth_field, "peetre", LINE, MaximalConfig(beta=1.1), LINE_E)
    steep = maximal_field(smooth_field, "peetre", LINE, MaximalConfig(beta=4.0), LINE_E)
    assert np.all(steep.values.real <= soft.values.real + 1e-14)
    assert np.any(steep.values.real < soft.values.real - 1e-6)
    cfg = MaximalConfig(beta=1.1, pruned=True, prune_ratio=0.5)
    pruned = maximal_field(smooth_field, "peetre", LINE, cfg, LINE_E)
    assert np.all(pruned.values.real <= soft.values.real + 1e-14)
    assert np.all(pruned.values.real >= base - 1e-14)
    centered = maximal_field(smooth_field, "hl", LINE, MaximalConfig(centered=True), LINE_E)
    uncentered = maximal_field(smooth_field, "hl", LINE, MaximalConfig(), LINE_E)
    assert np.all(centered.values.real <= uncentered.values.real + 1e-12)


def test_maximal_field_rejects_unknown_kind(smooth_field):
    with pytest.raises(ValueError):
        maximal_field(smooth_field, "vertical", LINE)


def test_local_envelope_constant():
    F = field_from_function(LOCAL_GRID, lambda X, s: (1 + np.abs(X[:, 0])) ** -2 * 2.0 ** -abs(s))
    C = local_envelope_constant(F, LINE, QBox(half_width=0.5))
    assert 1.0 <= C < 50


def test_majorant_with_radial_kernel():
    rng = np.random.default_rng(1)
    f = rng.uniform(size=GRID1.spatial_shape)
    rho = quasi_norm(LINE_E, LINE, spatial_points(GRID1))
    theta = (1.0 + rho) ** -2
    g = theta * np.cos(5 * GRID1.axis)
    result = majorant_check(f, g, theta, GRID1, LINE, LINE_E)
    assert result["relative"] <= 1e-12


def test_majorant_with_normalized_indicator():
    rng = np.random.default_rng(2)
    f = rng.normal(size=GRID2.spatial_shape)
    rho = quasi_norm(DIAG_E, DIAG, spatial_points(GRID2)).reshape(GRID2.spatial_shape)
    indicator = (rho <= 1.0 / DIAG.det_a).astype(float)
    indicator /= indicator.sum() * GRID2.cell_volume
    assert majorant_check(f, indicator, indicator, GRID2, DIAG, DIAG_E)["relative"] <= 1e-12


def test_majorant_equality_for_constants():
    rho = quasi_norm(LINE_E, LINE, spatial_points(GRID1))
    theta = (1.0 + rho) ** -2
    result = majorant_check(np.ones(GRID1.spatial_shape), theta, theta, GRID1, LINE, LINE_E)
    assert abs(result["excess"]) < 1e-12


def test_fefferman_stein_single_constant():
    ones = np.ones(GRID1.spatial_shape)
    assert abs(fefferman_stein_monitor([ones], 2.0, 2.0, GRID1, LINE, LINE_E) - 1.0) < 1e-12


def test_fefferman_stein_band_limited_family():
    family = [
        make_signal("band-limited-random", GRID1, LINE, band=(-1.0, 1.0), seed=k).samples
        for k in range(8)
    ]
    ratio = fefferman_stein_monitor(family, 2.0, 2.0, GRID1, LINE, LINE_E)
    assert 1.0 <= ratio < 10.0
    assert np.isfinite(fefferman_stein_monitor(family, 3.0, np.inf, GRID1, LINE, LINE_E))


def test_fefferman_stein_precondition():
    with pytest.raises(ValueError):
        fefferman_stein_monitor([np.ones(GRID1.spatial_shape)], 1.0, 2.0, GRID1, LINE, LINE_E)


def test_pointwise_indicator_constant():
    grid = GridSpec(d=1, n=64, X=8.0, m=1, s_min=0.0, s_max=0.0)
    for ell in (0, 1, 2):
        result = pointwise_indicator_check(LINE, ell, np.array([0.5]), 2.0, grid, LINE_E)
        assert 0 < result["C"] < 100


def test_group_maximal_bound():
    F = field_from_function(LOCAL_GRID, lambda X, s: np.exp(-X[:, 0] ** 2) * np.cos(X[:, 0] + s))
    result = group_maximal_check(F, 1.5, LINE, LINE_E, samples=16)
    assert result["C"] <= 1.0 + 1e-12
