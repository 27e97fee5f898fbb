"""
Triebel-Lizorkin, sequence, mixed-norm and Peetre-type norms for anisowave.

The three equivalent Triebel-Lizorkin forms (Littlewood-Paley, continuous
Peetre, discrete Peetre) act on sampled signals; the sequence norms act on
finitely supported coefficients c[(j, k)]; the mixed-norm and Peetre-type
norms act on GroupFields. Equivalence constants are fitted and reported,
never asserted.

Exponents at or above Q_INFINITY_THRESHOLD are evaluated as sup norms.
"""

import logging
import math
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid

from .anisotropy import _sobol, build_ellipsoid, matrix_power
from .errors import CoverageGap
from .group import scale_weights, spatial_weight
from .maximal import local_maximal, peetre_maximal
from .models import (
    Q_INFINITY_THRESHOLD,
    AnisotropicEllipsoid,
    CalderonPair,
    ExpansiveMatrix,
    GridSpec,
    GroupElement,
    GroupField,
    QBox,
    SpectralWindow,
    TestSignal,
    TLParams,
)
from .spectra import frequency_scales, window_on_grid, window_profile
from .transform import covering_scales, wavelet_transform
from .utils import from_fourier, map_ordered, quasi_triangle_defect, seeded_rng, spatial_points

logger = logging.getLogger(__name__)

# largest tolerated share of (nonzero-frequency) energy outside the covered shells
COVERAGE_TOL = 1e-6
DEFAULT_SCALE_STEP = 0.25
# atom overlap above which a point set is reported as poorly separated
OVERLAP_WARNING = 64

Coefficients = Dict[Tuple[int, Tuple[int, ...]], complex]
WindowLike = Union[CalderonPair, SpectralWindow]


def _is_infinite(exponent: float) -> bool:
    return math.isinf(exponent) or exponent >= Q_INFINITY_THRESHOLD


def _combine(values: np.ndarray, exponent: float, weights: Any = 1.0, axis: Optional[int] = None) -> Any:
    """(sum w |v|^e)^(1/e) along axis, or the max for infinite exponents."""
    values = np.abs(values)
    if values.size == 0:
        return 0.0
    if _is_infinite(exponent):
        return values.max(axis=axis)
    return np.sum(weights * values ** exponent, axis=axis) ** (1.0 / exponent)


def _windows(window: WindowLike) -> Tuple[SpectralWindow, SpectralWindow]:
    if isinstance(window, CalderonPair):
        return window.analyzing, window.dual
    return window, window


def _check_exponents(params: TLParams) -> None:
    if not params.satisfies_equivalence():
        logger.warning(
            f"beta={params.beta} does not exceed max(1/p, 1/q) for p={params.p}, q={params.q}; "
            "equivalence constants may blow up"
        )


# --- Littlewood-Paley bands -------------------------------------------------


def shell_range(signal: TestSignal, window: WindowLike) -> Tuple[int, int]:
    """Integer levels j whose dilated window phi_hat((A*)^-j xi) meets a nonzero grid frequency."""
    phi, _ = _windows(window)
    t = frequency_scales(phi, signal.grid)
    finite = t[np.isfinite(t)]
    lo, hi = phi.profile.support
    return int(math.floor(finite.min() - hi)), int(math.ceil(finite.max() - lo))


def uncovered_fraction(signal: TestSignal, window: WindowLike, levels: Sequence[int]) -> float:
    """
    Share of the signal's nonzero-frequency energy that the given levels miss.

    A frequency with scale t is covered in proportion to
    sum_{j in levels} phi_hat psi_hat(t - j) / sum_{all j} phi_hat psi_hat(t - j).
    The zero frequency is excluded; homogeneous norms do not see it.
    """
    phi, psi = _windows(window)
    t = frequency_scales(phi, signal.grid).ravel()
    energy = np.abs(signal.fourier.ravel()) ** 2
    nonzero = np.isfinite(t)
    total = float(np.sum(energy[nonzero]))
    if total == 0:
        return 0.0
    if not np.all(nonzero):
        share = float(np.sum(energy[~nonzero])) / float(np.sum(energy)) if np.sum(energy) > 0 else 0.0
        logger.debug(f"Excluding zero-frequency energy share {share:.3e}")
    t = t[nonzero]
    energy = energy[nonzero]
    j_min, j_max = shell_range(signal, window)
    chosen = set(int(j) for j in levels)
    full = np.zeros_like(t)
    partial = np.zeros_like(t)
    for j in range(min(j_min, min(chosen, default=j_min)), max(j_max, max(chosen, default=j_max)) + 1):
        term = window_profile(phi, t - j) * window_profile(psi, t - j)
        full += term
        if j in chosen:
            partial += term
    with np.errstate(divide="ignore", invalid="ignore"):
        covered = np.where(full > 0, np.clip(partial / full, 0.0, 1.0), 0.0)
    return float(np.sum(energy * (1.0 - covered)) / total)


def _require_coverage(signal: TestSignal, window: WindowLike, levels: Sequence[int]) -> float:
    missing = uncovered_fraction(signal, window, levels)
    if missing > COVERAGE_TOL:
        raise CoverageGap(
            f"Levels [{min(levels)}, {max(levels)}] miss {missing:.3e} of the signal energy "
            f"(tolerance {COVERAGE_TOL})"
        )
    return missing


def _levels(signal: TestSignal, window: WindowLike, j_range: Optional[Tuple[int, int]]) -> np.ndarray:
    j_min, j_max = shell_range(signal, window) if j_range is None else j_range
    return np.arange(j_min, j_max + 1)


def band(signal: TestSignal, window: SpectralWindow, s: float) -> np.ndarray:
    """f * phi_s with phi_s = |det A|^s phi(A^s .), i.e. multiplier phi_hat((A*)^-s xi)."""
    return from_fourier(signal.fourier * window_on_grid(window, signal.grid, -s), signal.grid)


def _scale_axis(
    signal: TestSignal, window: WindowLike, scales: Union[GridSpec, Tuple[float, float, int], None], step: float
) -> np.ndarray:
    if isinstance(scales, GridSpec):
        return scales.scales
    if scales is None:
        j_min, j_max = shell_range(signal, window)
        m = int(round((j_max - j_min) / step)) + 1
        return np.linspace(j_min, j_max, m)
    s_min, s_max, m = scales
    return np.linspace(s_min, s_max, int(m))


# --- Triebel-Lizorkin norms -------------------------------------------------


def tl_norm_lp(
    signal: TestSignal, window: WindowLike, params: TLParams, j_range: Optional[Tuple[int, int]] = None
) -> float:
    """
    Littlewood-Paley norm ||(sum_j (|det A|^{j alpha} |f * phi_j|)^q)^{1/q}||_{L^p}.

    Args:
        signal: Sampled signal
        window: Calderon pair (its analyzing window is used) or a single window
        params: Exponents
        j_range: Inclusive level range (default: every level meeting the grid)

    Returns:
        The norm as a nonnegative float

    Raises:
        CoverageGap: If the levels miss more than 1e-6 of the signal energy
    """
    phi, _ = _windows(window)
    levels = _levels(signal, window, j_range)
    _require_coverage(signal, window, levels)
    det_a = phi.matrix.det_a
    bands = np.stack([det_a ** (params.alpha * j) * np.abs(band(signal, phi, j)) for j in levels])
    inner = _combine(bands, params.q, axis=0)
    return float(_combine(np.ravel(inner), params.p, signal.grid.cell_volume))


def tl_norm_peetre_disc(
    signal: TestSignal,
    window: WindowLike,
    params: TLParams,
    j_range: Optional[Tuple[int, int]] = None,
    E: Optional[AnisotropicEllipsoid] = None,
) -> float:
    """Discrete Peetre form ||(sum_j (|det A|^{j alpha} phi**_{j, beta} f)^q)^{1/q}||_{L^p}."""
    _check_exponents(params)
    phi, _ = _windows(window)
    M = phi.matrix
    E = E or build_ellipsoid(M)
    levels = _levels(signal, window, j_range)
    _require_coverage(signal, window, levels)

    def level(j: int) -> np.ndarray:
        star = peetre_maximal(band(signal, phi, j), signal.grid, float(j), params.beta, M, E)
        return M.det_a ** (params.alpha * j) * star

    inner = _combine(np.stack(map_ordered(level, levels)), params.q, axis=0)
    return float(_combine(np.ravel(inner), params.p, signal.grid.cell_volume))


def tl_norm_peetre_cont(
    signal: TestSignal,
    window: WindowLike,
    params: TLParams,
    scales: Union[GridSpec, Tuple[float, float, int], None] = None,
    step: float = DEFAULT_SCALE_STEP,
    E: Optional[AnisotropicEllipsoid] = None,
) -> float:
    """
    Continuous Peetre form ||(int (|det A|^{alpha s} phi**_{s, beta} f)^q ds)^{1/q}||_{L^p}.

    The s-integral is a trapezoid rule over the scale samples (default: the
    level range of shell_range at the given step).

    Raises:
        CoverageGap: If the integer levels inside the scale range miss signal energy
    """
    _check_exponents(params)
    phi, _ = _windows(window)
    M = phi.matrix
    E = E or build_ellipsoid(M)
    s_axis = _scale_axis(signal, window, scales, step)
    _require_coverage(signal, window, np.arange(math.ceil(s_axis[0]), math.floor(s_axis[-1]) + 1))

    def slice_at(s: float) -> np.ndarray:
        star = peetre_maximal(band(signal, phi, s), signal.grid, float(s), params.beta, M, E)
        return M.det_a ** (params.alpha * s) * star

    stack = np.stack(map_ordered(slice_at, s_axis))
    if _is_infinite(params.q):
        inner = stack.max(axis=0)
    elif len(s_axis) == 1:
        inner = stack[0]
    else:
        inner = trapezoid(stack ** params.q, x=s_axis, axis=0) ** (1.0 / params.q)
    return float(_combine(np.ravel(inner), params.p, signal.grid.cell_volume))


# --- sequence norms ---------------------------------------------------------


def _sequence_profile(points: np.ndarray, coeffs: Coefficients, params: TLParams, M: ExpansiveMatrix) -> np.ndarray:
    """(sum_j (|det A|^{j(alpha + 1/2)} |c_{j,k(x)}|)^q)^{1/q} with k(x) = floor(A^j x)."""
    levels: Dict[int, List[Tuple[Tuple[int, ...], float]]] = {}
    for (j, k), value in coeffs.items():
        levels.setdefault(int(j), []).append((tuple(k), abs(value)))
    rows = []
    for j, entries in sorted(levels.items()):
        K = np.floor(points @ matrix_power(M, float(j)).T).astype(np.int64)
        row = np.zeros(points.shape[0])
        for k, value in entries:
            row[np.all(K == np.asarray(k), axis=1)] = value
        rows.append(M.det_a ** (j * (params.alpha + 0.5)) * row)
    return _combine(np.stack(rows), params.q, axis=0)


def _cell_vertices(coeffs: Coefficients, M: ExpansiveMatrix) -> np.ndarray:
    d = M.dim
    corners = np.array(np.meshgrid(*([[0.0, 1.0]] * d), indexing="ij")).reshape(d, -1).T
    vertices = [(corners + np.asarray(k)) @ matrix_power(M, -float(j)).T for (j, k) in coeffs]
    return np.concatenate(vertices)


def _is_diagonal(A: np.ndarray) -> bool:
    return not np.any(A - np.diag(np.diag(A)))


def seq_norm(
    coeffs: Coefficients,
    params: TLParams,
    M: ExpansiveMatrix,
    method: str = "auto",
    samples: int = 2 ** 16,
    seed: int = 0,
    replicates: int = 4,
    rtol: float = 0.02,
) -> float:
    """
    Triebel-Lizorkin sequence norm of finitely supported coefficients.

    ||(sum_{j,k} (|det A|^{j(alpha+1/2)} |c_{j,k}| 1_{A^-j([0,1)^d + k)})^q)^{1/q}||_{L^p}

    Methods:
        closed: p = q only, sum of cell integrals in closed form
        breakpoints: diagonal A, exact integration over the product of box edges
        sobol: quasi-Monte Carlo over the bounding box of the cells
        auto: the first of these that applies

    Auto only reaches Sobol for a non-diagonal matrix with p != q. The Sobol
    value is the mean over `replicates` independent scramblings; their
    relative spread is typically below 1e-3 at the default sample count and
    a spread above `rtol` is logged as a warning.

    Args:
        coeffs: Mapping (j, k) -> c_{j,k}
        params: Exponents
        M: Expansive matrix
        method: One of the methods above
        samples: Sobol sample count per replicate
        seed: Scrambling seed of the first replicate
        replicates: Number of scramblings averaged
        rtol: Relative replicate spread above which a warning is logged

    Returns:
        The norm as a nonnegative float

    Raises:
        ValueError: For an unknown or inapplicable method
    """
    if method not in ("auto", "closed", "breakpoints", "sobol"):
        raise ValueError(f"Unknown sequence norm method: {method}")
    coeffs = {key: value for key, value in coeffs.items() if value != 0}
    if not coeffs:
        return 0.0
    p = params.p
    same = not _is_infinite(params.q) and abs(p - params.q) < 1e-15

    if method == "closed" or (method == "auto" and same):
        if not same:
            raise ValueError(f"Closed form needs p = q, got p={p}, q={params.q}")
        total = sum(
            (M.det_a ** (j * (params.alpha + 0.5)) * abs(v)) ** p * M.det_a ** (-j)
            for (j, _), v in coeffs.items()
        )
        return float(total ** (1.0 / p))

    if method == "breakpoints" or (method == "auto" and _is_diagonal(M.A)):
        if not _is_diagonal(M.A):
            raise ValueError("Breakpoint integration needs a diagonal matrix")
        vertices = _cell_vertices(coeffs, M)
        edges = [np.unique(vertices[:, i]) for i in range(M.dim)]
        mids = [0.5 * (e[1:] + e[:-1]) for e in edges]
        widths = [np.diff(e) for e in edges]
        points = np.array(np.meshgrid(*mids, indexing="ij")).reshape(M.dim, -1).T
        volumes = np.prod(np.array(np.meshgrid(*widths, indexing="ij")).reshape(M.dim, -1), axis=0)
        return float(_combine(_sequence_profile(points, coeffs, params, M), p, volumes))

    vertices = _cell_vertices(coeffs, M)
    lo, hi = vertices.min(axis=0), vertices.max(axis=0)
    volume = float(np.prod(hi - lo))
    estimates = []
    for r in range(max(1, replicates)):
        points = lo + (hi - lo) * _sobol(M.dim, samples, seed + r)
        estimates.append(float(_combine(_sequence_profile(points, coeffs, params, M), p, volume / len(points))))
    value = float(np.mean(estimates))
    spread = (max(estimates) - min(estimates)) / value if value > 0 else 0.0
    logger.debug(f"Sobol sequence norm over {len(estimates)} scramblings, spread {spread:.2e}")
    if spread > rtol:
        logger.warning(f"Sobol sequence norm spread {spread:.2e} exceeds {rtol:.2e}; raise the sample count")
    return value


def random_sparse_sequence(
    d: int, count: int, levels: Sequence[int] = (-1, 0, 1), reach: int = 1, seed: int = 0
) -> Coefficients:
    """Seeded coefficients on `count` distinct cells with k in [-reach, reach]^d."""
    rng = seeded_rng(seed)
    cells = [(int(j), tuple(int(v) for v in k))
             for j in levels
             for k in np.array(np.meshgrid(*([np.arange(-reach, reach + 1)] * d), indexing="ij")).reshape(d, -1).T]
    picks = rng.choice(len(cells), size=min(count, len(cells)), replace=False)
    return {cells[i]: complex(rng.normal(), rng.normal()) for i in sorted(picks)}


def regular_points(coeffs: Coefficients, M: ExpansiveMatrix) -> Tuple[List[complex], List[GroupElement]]:
    """The regular set (A^-j k, -j) carrying the coefficients c_{j,k}."""
    values, points = [], []
    for (j, k), value in coeffs.items():
        values.append(value)
        points.append(GroupElement(matrix_power(M, -float(j)) @ np.asarray(k, dtype=float), -float(j)))
    return values, points


def regular_scale_grid(coeffs: Coefficients, grid: GridSpec, per_unit: int = 4, half_width: float = 1.0) -> GridSpec:
    """
    Scale grid whose samples are the midpoints of cells of width 1/per_unit.

    Covers [-j_max - h, -j_min + h) with one zero-valued sample beyond each end.
    """
    js = [j for (j, _) in coeffs] or [0]
    lo, hi = -max(js) - half_width, -min(js) + half_width
    ds = 1.0 / per_unit
    m = int(round((hi - lo) / ds)) + 2
    return grid.with_scales(lo - 0.5 * ds, hi + 0.5 * ds, m)


def seq_maximal_norm(
    coeffs: Coefficients,
    params: TLParams,
    M: ExpansiveMatrix,
    grid: GridSpec,
    E: Optional[AnisotropicEllipsoid] = None,
    per_unit: int = 4,
) -> float:
    """
    Maximal functional equivalent to the sequence norm.

    ||(int (esssup_z |det A|^{-(alpha+1/2)s} (1 + rho(A^-s z))^-beta
    sum |c_{l,k}| 1_{A^-l([-1,1)^d + k)}(. + z) 1_{-l + [-1,1)}(s))^q ds)^{1/q}||_{L^p},
    evaluated as the Peetre-type norm with exponent -(alpha + 1/2 - 1/q)
    of the rasterized atoms on the spatial lattice of `grid`.
    """
    if not any(v != 0 for v in coeffs.values()):
        return 0.0
    values, points = regular_points(coeffs, M)
    scaled = regular_scale_grid(coeffs, grid, per_unit)
    return peetre_seq_norm(values, points, params.with_alpha(-params.alpha_prime), M, scaled, E)


# --- norms on the group -----------------------------------------------------


def mixed_lpq_norm(
    F: GroupField, p: float, q: float, M: ExpansiveMatrix, weight: Union[np.ndarray, GroupField, None] = None
) -> float:
    """
    Mixed norm ||x -> ||F(x, .)||_{L^q(nu)}||_{L^p} with nu(ds) = |det A|^-s ds.

    A weight is multiplied into F first.
    """
    values = np.abs(F.values)
    if weight is not None:
        values = values * np.abs(weight.values if isinstance(weight, GroupField) else weight)
    nu = scale_weights(F.grid, M, F.scale_offset).reshape((-1,) + (1,) * F.grid.d)
    inner = _combine(values, q, nu, axis=0)
    return float(_combine(np.ravel(inner), p, spatial_weight(F)))


def peetre_space_norm(
    F: GroupField, params: TLParams, M: ExpansiveMatrix, E: Optional[AnisotropicEllipsoid] = None
) -> float:
    """
    Norm of the Peetre-type space on G_A.

    ||x -> (int (|det A|^{alpha s} esssup_z |F(x+z, s)| / (1 + rho(A^-s z))^beta)^q
    ds / |det A|^s)^{1/q}||_{L^p}

    The esssup runs over all periodic lattice offsets, mapped through the
    field's frame, and the scale integral uses the exact Haar cell masses,
    so left translations stored by reindexing scale the norm by exactly
    |det A|^{t(alpha + 1/p - 1/q)}.

    Args:
        F: Field (frame, origin and scale offset are honored)
        params: Exponents (p, q, alpha, beta)
        M: Expansive matrix
        E: Ellipsoid of A

    Returns:
        The norm as a nonnegative float
    """
    E = E or build_ellipsoid(M)
    grid = F.grid
    scales = F.scales

    def slice_at(j: int) -> np.ndarray:
        s = scales[j]
        star = peetre_maximal(F.values[j], grid, -s, params.beta, M, E, frame=F.frame)
        return M.det_a ** (params.alpha * s) * star

    stack = np.stack(map_ordered(slice_at, range(grid.m)))
    nu = scale_weights(grid, M, F.scale_offset).reshape((-1,) + (1,) * grid.d)
    inner = _combine(stack, params.q, nu, axis=0)
    return float(_combine(np.ravel(inner), params.p, spatial_weight(F)))


def coorbit_norm(
    signal: TestSignal,
    window: SpectralWindow,
    params: TLParams,
    box: Optional[QBox] = None,
    scales: Union[GridSpec, Tuple[float, float, int], None] = None,
    E: Optional[AnisotropicEllipsoid] = None,
) -> float:
    """
    Coorbit norm ||M^L_Q (W_psi f)||_{PT} with Peetre exponent -(alpha + 1/2 - 1/q).

    The default scale box is the covering box of the signal's orbit.
    """
    if scales is None:
        cover = covering_scales(signal, window)
        scales = (cover["s_min"], cover["s_max"], cover["m"])
    W = wavelet_transform(signal, window, scales)
    maximal = local_maximal(W, window.matrix, box, side="left")
    return peetre_space_norm(maximal, params.with_alpha(-params.alpha_prime), window.matrix, E)


def rasterize_atoms(
    values: Sequence[complex],
    points: Sequence[GroupElement],
    M: ExpansiveMatrix,
    grid: GridSpec,
    box: Optional[QBox] = None,
) -> Tuple[GroupField, int]:
    """
    Samples of sum_gamma |c_gamma| 1_{gamma U} and the largest overlap count.

    U = [-h, h)^d x [-h, h) with h = box.half_width, so (x, s) lies in gamma U
    iff A^{-s_gamma}(x - x_gamma) is in [-h, h)^d and s - s_gamma is in [-h, h).
    """
    h = (box or QBox()).half_width
    eps = 1e-12
    X = spatial_points(grid)
    scales = grid.scales
    field = np.zeros(grid.shape)
    count = np.zeros(grid.shape, dtype=int)
    for value, gamma in zip(values, points):
        in_scale = (scales - gamma.s >= -h - eps) & (scales - gamma.s < h - eps)
        if not np.any(in_scale):
            continue
        local = (X - gamma.x) @ matrix_power(M, -gamma.s).T
        inside = np.all((local >= -h - eps) & (local < h - eps), axis=1).reshape(grid.spatial_shape)
        field[in_scale] += abs(value) * inside
        count[in_scale] += inside
    overlap = int(count.max()) if count.size else 0
    return GroupField(grid=grid, values=field), overlap


def peetre_seq_norm(
    values: Sequence[complex],
    points: Sequence[GroupElement],
    params: TLParams,
    M: ExpansiveMatrix,
    grid: GridSpec,
    E: Optional[AnisotropicEllipsoid] = None,
    box: Optional[QBox] = None,
    max_overlap: Optional[int] = None,
) -> float:
    """
    Sequence norm ||sum_gamma |c_gamma| 1_{gamma U}||_{PT} over a point set in G_A.

    The value is only meaningful for a relatively separated point set. An
    overlap count above OVERLAP_WARNING is logged; pass max_overlap to make
    it an error.

    Raises:
        ValueError: If the overlap count exceeds max_overlap
    """
    if len(values) != len(points):
        raise ValueError(f"Got {len(values)} coefficients for {len(points)} points")
    if not points:
        return 0.0
    F, overlap = rasterize_atoms(values, points, M, grid, box)
    logger.debug(f"Rasterized {len(points)} atoms, overlap {overlap}")
    if max_overlap is not None and overlap > max_overlap:
        raise ValueError(f"Point set overlap {overlap} exceeds {max_overlap}; not relatively separated")
    if overlap > OVERLAP_WARNING:
        logger.warning(f"Point set overlap {overlap} exceeds {OVERLAP_WARNING}; the set is poorly separated")
    return peetre_space_norm(F, params, M, E)


# --- quasi-norm checks ------------------------------------------------------


def _add(F1: Any, F2: Any) -> Any:
    if isinstance(F1, GroupField):
        return GroupField(grid=F1.grid, values=F1.values + F2.values, frame=F1.frame,
                          origin=F1.origin, scale_offset=F1.scale_offset)
    return np.asarray(F1) + np.asarray(F2)


def r_norm_defect(norm_fn: Callable[[Any], float], F1: Any, F2: Any, r: float) -> float:
    """||F1 + F2||^r - ||F1||^r - ||F2||^r; nonpositive (up to rounding) for an r-norm."""
    return quasi_triangle_defect(norm_fn(F1), norm_fn(F2), norm_fn(_add(F1, F2)), r)


def fatou_check(
    F: GroupField, params: TLParams, M: ExpansiveMatrix, steps: int = 8, E: Optional[AnisotropicEllipsoid] = None
) -> List[float]:
    """Peetre-type norms of min(|F|, level_k) for levels rising to max |F|."""
    E = E or build_ellipsoid(M)
    magnitude = np.abs(F.values)
    peak = float(magnitude.max()) if magnitude.size else 0.0
    norms = []
    for k in range(1, steps + 1):
        truncated = GroupField(grid=F.grid, values=np.minimum(magnitude, peak * k / steps), frame=F.frame,
                               origin=F.origin, scale_offset=F.scale_offset)
        norms.append(peetre_space_norm(truncated, params, M, E))
    return norms


# --- equivalence reports ----------------------------------------------------


def _ratio_summary(ratios: np.ndarray) -> Dict[str, float]:
    ratios = ratios[np.isfinite(ratios) & (ratios > 0)]
    if ratios.size == 0:
        return {"min": math.nan, "max": math.nan, "C": math.nan, "spread": math.nan}
    low, high = float(ratios.min()), float(ratios.max())
    return {"min": low, "max": high, "C": max(high, 1.0 / low), "spread": high / low}


def norm_equivalence(
    signals: Sequence[TestSignal],
    window: WindowLike,
    params: TLParams,
    step: float = DEFAULT_SCALE_STEP,
) -> Dict[str, Any]:
    """
    Three Triebel-Lizorkin forms over a battery, with fitted two-sided constants.

    Returns:
        Dictionary with per-signal rows and ratio summaries of the Peetre forms
        against the Littlewood-Paley form
    """
    phi, _ = _windows(window)
    E = build_ellipsoid(phi.matrix)

    def evaluate(signal: TestSignal) -> Dict[str, Any]:
        return {
            "kind": signal.kind,
            "lp": tl_norm_lp(signal, window, params),
            "peetre_cont": tl_norm_peetre_cont(signal, window, params, step=step, E=E),
            "peetre_disc": tl_norm_peetre_disc(signal, window, params, E=E),
        }

    rows = map_ordered(evaluate, signals)
    lp = np.array([row["lp"] for row in rows])
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = np.array([row["peetre_disc"] for row in rows]) / lp
        cont = np.array([row["peetre_cont"] for row in rows]) / lp
    report = {
        "params": params.to_dict(),
        "rows": rows,
        "disc": _ratio_summary(disc),
        "cont": _ratio_summary(cont),
    }
    logger.info(f"Norm equivalence at {params.to_dict()}: C_disc={report['disc']['C']:.4f}, "
                f"C_cont={report['cont']['C']:.4f}")
    return report


def sequence_equivalence(
    sequences: Sequence[Coefficients],
    params: TLParams,
    M: ExpansiveMatrix,
    grid: GridSpec,
    per_unit: int = 4,
) -> Dict[str, Any]:
    """Sequence norm against its maximal functional over a family of coefficient sets."""
    E = build_ellipsoid(M)

    def evaluate(coeffs: Coefficients) -> Dict[str, float]:
        return {
            "seq": seq_norm(coeffs, params, M),
            "maximal": seq_maximal_norm(coeffs, params, M, grid, E, per_unit),
        }

    rows = map_ordered(evaluate, sequences)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.array([row["maximal"] for row in rows]) / np.array([row["seq"] for row in rows])
    summary = _ratio_summary(ratios)
    logger.info(f"Sequence equivalence at {params.to_dict()}: C={summary['C']:.4f}")
    return {"params": params.to_dict(), "rows": rows, "ratio": summary}
