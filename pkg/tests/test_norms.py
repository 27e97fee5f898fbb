import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anisowave.anisotropy import build_ellipsoid, make_expansive
from anisowave.errors import CoverageGap
from anisowave.group import field_from_function, translate_left, translate_right
from anisowave.models import GridSpec, GroupElement, GroupField, TestSignal, TLParams
from anisowave.norms import (
    OVERLAP_WARNING,
    coorbit_norm,
    fatou_check,
    mixed_lpq_norm,
    norm_equivalence,
    peetre_seq_norm,
    peetre_space_norm,
    r_norm_defect,
    random_sparse_sequence,
    rasterize_atoms,
    regular_points,
    regular_scale_grid,
    seq_maximal_norm,
    seq_norm,
    sequence_equivalence,
    shell_range,
    tl_norm_lp,
    tl_norm_peetre_cont,
    tl_norm_peetre_disc,
    uncovered_fraction,
)
from anisowave.spectra import build_admissible, build_calderon_pair, tight_profile
from anisowave.transform import make_battery, make_signal, wavelet_transform

LINE = make_expansive([[2.0]])
DIAG = make_expansive([[2.0, 0.0], [0.0, 4.0]])
JORDAN = make_expansive([[2.0, 1.0], [0.0, 2.0]])
LINE_E = build_ellipsoid(LINE)
GRID = GridSpec(d=1, n=256, X=8.0, m=1, s_min=0.0, s_max=0.0)
SEQ_GRID = GridSpec(d=1, n=128, X=8.0, m=1, s_min=0.0, s_max=0.0)
FIELD_GRID = GridSpec(d=1, n=64, X=4.0, m=9, s_min=-2.0, s_max=2.0)
L2 = TLParams(p=2.0, q=2.0, alpha=0.0, beta=1.1)


@pytest.fixture(scope="module")
def pair():
    return build_calderon_pair(LINE, tight_profile(center=0.0))


@pytest.fixture(scope="module")
def signal():
    return make_signal("modulated-gaussian", GRID, width=2.0, frequency=[1.5])


def scaled(signal, c):
    return TestSignal(grid=signal.grid, samples=c * signal.samples, kind=signal.kind, fourier=c * signal.fourier)


def smooth_field(grid=FIELD_GRID):
    # vanishes on |s| >= 1.5 so scale re-indexing never meets the box ends
    def fn(X, s):
        bump = max(0.0, 1.0 - (s / 1.5) ** 2) ** 2
        return bump * np.exp(-X[:, 0] ** 2) * (1.0 + 0.3 * np.cos(2 * X[:, 0] + s))

    return field_from_function(grid, fn)


def random_field(seed, grid=FIELD_GRID):
    rng = np.random.default_rng(seed)
    return GroupField(grid=grid, values=rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))


def test_all_forms_vanish_on_zero_signal(pair, signal):
    zero = scaled(signal, 0.0)
    assert tl_norm_lp(zero, pair, L2) == 0.0
    assert tl_norm_peetre_disc(zero, pair, L2) == 0.0
    assert tl_norm_peetre_cont(zero, pair, L2) == 0.0


def test_lp_form_with_tight_pair_is_l2_norm(pair, signal):
    value = tl_norm_lp(signal, pair, L2)
    assert abs(value / math.sqrt(signal.energy) - 1.0) < 0.02


def test_lp_form_is_homogeneous(pair, signal):
    params = TLParams(p=1.0, q=2.0, alpha=0.5, beta=1.1)
    base = tl_norm_lp(signal, pair, params)
    assert abs(tl_norm_lp(scaled(signal, -2.5), pair, params) - 2.5 * base) < 1e-12 * base


def test_coverage_gap_for_short_level_range(pair, signal):
    assert uncovered_fraction(signal, pair, range(*shell_range(signal, pair))) < 1e-6
    assert uncovered_fraction(signal, pair, [0]) > 1e-6
    with pytest.raises(CoverageGap):
        tl_norm_lp(signal, pair, L2, j_range=(0, 0))


def test_discrete_peetre_dominates_lp_form(pair, signal):
    for params in (L2, TLParams(p=1.0, q=2.0, alpha=0.0, beta=1.1), TLParams(p=2.0, q=math.inf, beta=1.1)):
        assert tl_norm_peetre_disc(signal, pair, params) >= tl_norm_lp(signal, pair, params) * (1 - 1e-12)


def test_continuous_peetre_is_stable_under_refinement(pair, signal):
    disc = tl_norm_peetre_disc(signal, pair, L2)
    coarse = tl_norm_peetre_cont(signal, pair, L2, step=0.25) / disc
    fine = tl_norm_peetre_cont(signal, pair, L2, step=0.125) / disc
    assert abs(fine / coarse - 1.0) < 0.05


def test_norm_equivalence_over_battery(pair):
    battery = make_battery(GRID, LINE, size=6)
    report = norm_equivalence(battery, pair, L2)
    assert len(report["rows"]) == 6
    assert report["disc"]["min"] >= 1.0 - 1e-12
    assert report["disc"]["C"] < 20
    assert np.isfinite(report["cont"]["C"])


def test_equivalence_constants_are_stable_under_refinement(pair):
    constants = []
    for n in (128, 256):
        grid = GridSpec(d=1, n=n, X=8.0, m=1, s_min=0.0, s_max=0.0)
        signals = [make_signal("modulated-gaussian", grid, width=2.0, frequency=[f]) for f in (0.75, 1.5)]
        sequences = [random_sparse_sequence(1, 4, seed=k) for k in range(5)]
        constants.append((norm_equivalence(signals, pair, L2)["disc"]["C"],
                          sequence_equivalence(sequences, L2, LINE, grid)["ratio"]["C"]))
    (disc, seq), (fine_disc, fine_seq) = constants
    assert abs(fine_disc / disc - 1.0) < 0.1
    assert abs(fine_seq / seq - 1.0) < 0.1


def test_single_coefficient_sequence_norm():
    for M in (LINE, DIAG, JORDAN):
        coeffs = {(0, (0,) * M.dim): 1.0}
        for params in (L2, TLParams(p=1.0, q=2.0), TLParams(p=2.0, q=math.inf)):
            assert abs(seq_norm(coeffs, params, M) - 1.0) < 1e-12


def test_sequence_norm_scaling_and_disjoint_additivity():
    c = random_sparse_sequence(2, 5, seed=1)
    base = seq_norm(c, L2, DIAG)
    assert abs(seq_norm({k: 3 * v for k, v in c.items()}, L2, DIAG) - 3 * base) < 1e-12 * base
    other = {(2, (5, 5)): 0.7, (-2, (4, -4)): 1.3}
    params = TLParams(p=1.5, q=1.5, alpha=0.25)
    joint = seq_norm({**c, **other}, params, DIAG) ** 1.5
    assert abs(joint - seq_norm(c, params, DIAG) ** 1.5 - seq_norm(other, params, DIAG) ** 1.5) < 1e-10


def test_sequence_norm_methods_agree():
    c = random_sparse_sequence(2, 6, seed=2)
    closed = seq_norm(c, L2, DIAG, method="closed")
    assert abs(seq_norm(c, L2, DIAG, method="breakpoints") / closed - 1.0) < 1e-10
    d = random_sparse_sequence(2, 4, levels=(0, 1), seed=3)
    reference = seq_norm(d, L2, JORDAN, method="closed")
    assert abs(seq_norm(d, L2, JORDAN, method="sobol") / reference - 1.0) < 0.05


def test_sobol_sequence_norm_is_accurate_for_shear_with_p_not_q(caplog):
    # cells of one level tile disjointly, so the p = q closed form is exact for any q
    c = random_sparse_sequence(2, 4, levels=(1,), seed=7)
    exact = seq_norm(c, TLParams(p=1.0, q=1.0), JORDAN, method="closed")
    with caplog.at_level(logging.WARNING, logger="anisowave.norms"):
        value = seq_norm(c, TLParams(p=1.0, q=2.0), JORDAN)
    assert abs(value / exact - 1.0) < 0.01
    assert not caplog.records


def test_sequence_norm_rejects_bad_methods():
    c = {(0, (0,)): 1.0}
    with pytest.raises(ValueError):
        seq_norm(c, L2, LINE, method="simpson")
    with pytest.raises(ValueError):
        seq_norm(c, TLParams(p=1.0, q=2.0), LINE, method="closed")
    with pytest.raises(ValueError):
        seq_norm({(0, (0, 0)): 1.0}, TLParams(p=1.0, q=2.0), JORDAN, method="breakpoints")


@settings(max_examples=25, deadline=None)
@given(c=st.floats(min_value=-10, max_value=10).filter(lambda v: abs(v) > 1e-3))
def test_sequence_norm_is_absolutely_homogeneous(c):
    coeffs = random_sparse_sequence(1, 4, seed=5)
    params = TLParams(p=1.0, q=3.0, alpha=-0.5)
    base = seq_norm(coeffs, params, LINE)
    assert abs(seq_norm({k: c * v for k, v in coeffs.items()}, params, LINE) - abs(c) * base) < 1e-10 * abs(c) * base


def test_sequence_maximal_functional():
    assert seq_maximal_norm({}, L2, LINE, SEQ_GRID, LINE_E) == 0.0
    single = {(0, (0,)): 1.0}
    assert seq_maximal_norm(single, L2, LINE, SEQ_GRID, LINE_E) >= seq_norm(single, L2, LINE)


def test_sequence_equivalence_over_random_sequences():
    sequences = [random_sparse_sequence(1, 4, seed=k) for k in range(20)]
    report = sequence_equivalence(sequences, L2, LINE, SEQ_GRID)
    assert report["ratio"]["min"] >= 1.0
    assert report["ratio"]["C"] < 20


def test_peetre_space_norm_basics():
    zero = GroupField(grid=FIELD_GRID, values=np.zeros(FIELD_GRID.shape))
    assert peetre_space_norm(zero, L2, LINE, LINE_E) == 0.0
    F = random_field(0)
    G = GroupField(grid=FIELD_GRID, values=np.abs(F.values) + 0.1)
    assert peetre_space_norm(F, L2, LINE, LINE_E) <= peetre_space_norm(G, L2, LINE, LINE_E)


def test_left_translation_scales_norm_exactly():
    F = random_field(1)
    params = TLParams(p=2.0, q=1.5, alpha=0.3, beta=1.2)
    base = peetre_space_norm(F, params, LINE, LINE_E)
    for y, t in ((0.5, 1.0), (-0.25, -0.5), (1.0, 0.0)):
        moved = translate_left(F, GroupElement([y], t), LINE, reindex=True)
        expected = LINE.det_a ** (t * params.gamma)
        assert abs(peetre_space_norm(moved, params, LINE, LINE_E) / base / expected - 1.0) < 1e-9


def test_right_translation_bound():
    F = smooth_field()
    params = TLParams(p=2.0, q=2.0, alpha=0.2, beta=1.5)
    base = peetre_space_norm(F, params, LINE, LINE_E)
    for t in (1.0, -1.0):
        moved = translate_right(F, GroupElement([0.0], t), LINE)
        weight = max(1.0, LINE.det_a ** (-t))
        bound = LINE.det_a ** (-t * (params.alpha - params.inv_q)) * weight ** params.beta
        assert peetre_space_norm(moved, params, LINE, LINE_E) <= bound * base * (1 + 1e-9)


def test_peetre_norm_is_an_r_norm():
    for params in (L2, TLParams(p=0.8, q=2.0, beta=1.6)):

        def norm(F, params=params):
            return peetre_space_norm(F, params, LINE, LINE_E)

        for seed in range(3):
            defect = r_norm_defect(norm, random_field(2 * seed), random_field(2 * seed + 1), params.r)
            assert defect <= 1e-10


@settings(max_examples=10, deadline=None)
@given(c=st.floats(min_value=-4, max_value=4).filter(lambda v: abs(v) > 1e-2))
def test_peetre_norm_is_absolutely_homogeneous(c):
    grid = GridSpec(d=1, n=16, X=2.0, m=3, s_min=-0.5, s_max=0.5)
    F = random_field(7, grid)
    base = peetre_space_norm(F, L2, LINE, LINE_E)
    moved = GroupField(grid=grid, values=c * F.values)
    assert abs(peetre_space_norm(moved, L2, LINE, LINE_E) - abs(c) * base) < 1e-10 * abs(c) * base


def test_fatou_monotone():
    F = random_field(3)
    norms = fatou_check(F, L2, LINE, steps=6, E=LINE_E)
    assert all(b >= a for a, b in zip(norms, norms[1:]))
    assert abs(norms[-1] - peetre_space_norm(F, L2, LINE, LINE_E)) < 1e-12 * norms[-1]


def test_mixed_norm_of_one_cell():
    values = np.zeros(FIELD_GRID.shape)
    values[3, 20] = 1.0
    F = GroupField(grid=FIELD_GRID, values=values)
    nu = (LINE.det_a ** -(-0.75) - LINE.det_a ** -(-0.25)) / LINE.log_det
    for p, q in ((2.0, 2.0), (1.0, 3.0), (0.5, 1.0)):
        expected = FIELD_GRID.cell_volume ** (1 / p) * nu ** (1 / q)
        assert abs(mixed_lpq_norm(F, p, q, LINE) / expected - 1.0) < 1e-12


def test_mixed_norm_weight_and_solidity():
    F = random_field(4)
    assert mixed_lpq_norm(F, 2.0, 1.0, LINE, np.ones(FIELD_GRID.shape)) == mixed_lpq_norm(F, 2.0, 1.0, LINE)
    G = GroupField(grid=FIELD_GRID, values=0.5 * F.values)
    assert mixed_lpq_norm(G, 1.5, 2.5, LINE) <= mixed_lpq_norm(F, 1.5, 2.5, LINE)


def test_coorbit_norm_dominates_transform_norm(signal):
    window = build_admissible(LINE, tight_profile(center=0.0))
    scales = (-5.0, 2.0, 29)
    params = L2
    assert coorbit_norm(scaled(signal, 0.0), window, params, scales=scales) == 0.0
    W = wavelet_transform(signal, window, scales)
    plain = peetre_space_norm(W, params.with_alpha(-params.alpha_prime), LINE, LINE_E)
    assert plain <= coorbit_norm(signal, window, params, scales=scales, E=LINE_E) * (1 + 1e-12)


def test_coorbit_norm_tracks_lp_form(pair):
    window = build_admissible(LINE, tight_profile(center=0.0))
    ratios = []
    for f in make_battery(GRID, LINE, size=4):
        ratios.append(coorbit_norm(f, window, L2, E=LINE_E) / tl_norm_lp(f, pair, L2))
    assert min(ratios) > 0.5
    assert max(ratios) < 20
    assert max(ratios) / min(ratios) < 20


def test_peetre_sequence_norm_of_one_atom():
    grid = FIELD_GRID
    assert peetre_seq_norm([], [], L2, LINE, grid) == 0.0
    value = peetre_seq_norm([2.0], [GroupElement([0.0], 0.0)], L2, LINE, grid, LINE_E)
    X = grid.axis
    box = np.array([((-1 <= s < 1) * ((X >= -1) & (X < 1))) for s in grid.scales], dtype=float)
    expected = peetre_space_norm(GroupField(grid=grid, values=2.0 * box), L2, LINE, LINE_E)
    assert abs(value - expected) < 1e-12 * expected


def test_peetre_sequence_norm_checks_inputs():
    origin = GroupElement([0.0], 0.0)
    with pytest.raises(ValueError):
        peetre_seq_norm([1.0, 2.0], [origin], L2, LINE, FIELD_GRID)
    _, overlap = rasterize_atoms([1.0, 1.0], [origin, origin], LINE, FIELD_GRID)
    assert overlap == 2
    with pytest.raises(ValueError):
        peetre_seq_norm([1.0, 1.0], [origin, origin], L2, LINE, FIELD_GRID, max_overlap=1)


def test_peetre_sequence_norm_warns_on_dense_point_sets(caplog):
    origin = GroupElement([0.0], 0.0)
    with caplog.at_level(logging.WARNING, logger="anisowave.norms"):
        peetre_seq_norm([1.0] * 3, [origin] * 3, L2, LINE, FIELD_GRID, LINE_E)
    assert not caplog.records
    with caplog.at_level(logging.WARNING, logger="anisowave.norms"):
        count = OVERLAP_WARNING + 1
        value = peetre_seq_norm([1.0] * count, [origin] * count, L2, LINE, FIELD_GRID, LINE_E)
    assert value > 0
    assert any("poorly separated" in r.getMessage() for r in caplog.records)


def test_regular_point_set_matches_sequence_space():
    c = random_sparse_sequence(1, 5, seed=11)
    values, points = regular_points(c, LINE)
    grid = regular_scale_grid(c, SEQ_GRID)
    direct = peetre_seq_norm(values, points, L2.with_alpha(-L2.alpha_prime), LINE, grid, LINE_E)
    assert abs(direct - seq_maximal_norm(c, L2, LINE, SEQ_GRID, LINE_E)) < 1e-12 * direct
    assert 1.0 <= direct / seq_norm(c, L2, LINE) < 20
