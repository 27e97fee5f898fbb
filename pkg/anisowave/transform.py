"""
Sampled continuous wavelet transform on G_A.

W_psi f(x, s) = <f, pi(x, s) psi> = |det A|^{s/2} F^-1[f_hat . conj psi_hat((A*)^s .)](x),
evaluated per scale by frequency multiplication; reconstruction is the
Haar-weighted synthesis int W(g) pi(g) psi dmu(g), also done per scale in
the Fourier domain.
"""

import logging
import math
import warnings
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .anisotropy import adjoint, build_ellipsoid, continuous_scale
from .errors import AliasWarning, GridMismatch
from .group import group_convolve, haar_weights, scale_weights, translate_left
from .models import ExpansiveMatrix, GridSpec, GroupElement, GroupField, ScaleProfile, SpectralWindow, TestSignal
from .spectra import (
    ALIAS_TOL,
    frequency_scales,
    profile_values,
    radial_decay,
    synthesize,
    window_on_grid,
    window_profile,
)
from .utils import (
    frequency_points,
    from_fourier,
    linear_fit,
    map_ordered,
    nyquist_ring,
    seeded_rng,
    spatial_points,
    to_fourier,
)

logger = logging.getLogger(__name__)

SIGNAL_KINDS = ("gaussian", "modulated-gaussian", "band-limited-random", "indicator-smoothed")
BATTERY_SEED = 0x5EED
SUPPORT_TOL = 1e-8


def spatial_grid(grid: GridSpec) -> GridSpec:
    """The grid's spatial lattice with a single unit-mass scale slice."""
    return grid.with_scales(0.0, 0.0, 1)


def _same_lattice(a: GridSpec, b: GridSpec) -> bool:
    return a.d == b.d and a.n == b.n and a.X == b.X


def _signal(grid: GridSpec, samples: np.ndarray, kind: str, params: Dict[str, Any]) -> TestSignal:
    grid = spatial_grid(grid)
    samples = np.asarray(samples, dtype=complex).reshape(grid.spatial_shape)
    return TestSignal(grid=grid, samples=samples, kind=kind, fourier=to_fourier(samples, grid), params=params)


def make_signal(kind: str, grid: GridSpec, M: Optional[ExpansiveMatrix] = None, **params) -> TestSignal:
    """
    Sample a test signal on the spatial lattice.

    Args:
        kind: gaussian | modulated-gaussian | band-limited-random | indicator-smoothed
        grid: Grid whose spatial lattice is used
        M: Expansive matrix (band-limited-random places its band on A*-shells)
        **params: center, width, frequency, band, seed, radius depending on kind

    Returns:
        TestSignal with cached Fourier samples

    Raises:
        ValueError: For unknown kinds
    """
    X = spatial_points(grid)
    center = np.asarray(params.get("center", np.zeros(grid.d)), dtype=float)
    width = float(params.get("width", 1.0))
    envelope = np.exp(-np.sum((X - center) ** 2, axis=1) / (2 * width ** 2))

    if kind == "gaussian":
        samples = envelope
    elif kind == "modulated-gaussian":
        freq = np.asarray(params.get("frequency", np.ones(grid.d)), dtype=float)
        samples = envelope * np.exp(2j * np.pi * ((X - center) @ freq))
    elif kind == "band-limited-random":
        if M is None:
            raise ValueError("band-limited-random signals need the expansive matrix")
        lo, hi = params.get("band", (-0.5, 1.5))
        rng = seeded_rng(params.get("seed", 0))
        star = adjoint(M)
        xi = frequency_points(grid)
        t = np.full(xi.shape[0], -np.inf)
        nonzero = np.any(xi != 0, axis=1)
        t[nonzero] = continuous_scale(build_ellipsoid(star), star, xi[nonzero])
        # smooth taper across the band, zero outside it
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        taper = profile_values(ScaleProfile(kind="bump", center=mid, halfwidth=half), t)
        coeffs = rng.normal(size=xi.shape[0]) + 1j * rng.normal(size=xi.shape[0])
        fhat = (taper * coeffs).reshape(grid.spatial_shape)
        samples = from_fourier(fhat, spatial_grid(grid))
        samples /= max(np.sqrt(np.sum(np.abs(samples) ** 2) * grid.cell_volume), 1e-300)
    elif kind == "indicator-smoothed":
        radius = float(params.get("radius", 1.0))
        indicator = (np.linalg.norm(X - center, axis=1) <= radius).astype(float)
        xi = frequency_points(grid)
        smoothing = np.exp(-2 * (np.pi * width) ** 2 * np.sum(xi ** 2, axis=1)).reshape(grid.spatial_shape)
        g = spatial_grid(grid)
        samples = from_fourier(to_fourier(indicator.reshape(g.spatial_shape), g) * smoothing, g)
    else:
        raise ValueError(f"Unknown signal kind: {kind}")

    logger.debug(f"Sampled {kind} signal on {grid.spatial_shape}")
    return _signal(grid, samples, kind, dict(params))


def make_battery(
    grid: GridSpec, M: ExpansiveMatrix, size: int = 10, seed: int = BATTERY_SEED
) -> List[TestSignal]:
    """
    Deterministic battery of test signals cycling through every kind.

    Parameters are drawn from a generator seeded with ``seed`` so equal
    inputs give identical batteries.
    """
    rng = seeded_rng(seed)
    battery = []
    for k in range(size):
        kind = SIGNAL_KINDS[k % len(SIGNAL_KINDS)]
        center = rng.uniform(-0.25, 0.25, size=grid.d) * grid.X
        width = float(rng.uniform(0.5, 1.5))
        if kind == "gaussian":
            params = {"center": center, "width": width}
        elif kind == "modulated-gaussian":
            direction = rng.normal(size=grid.d)
            direction /= np.linalg.norm(direction)
            params = {"center": center, "width": width,
                      "frequency": direction * rng.uniform(0.5, 1.0)}
        elif kind == "band-limited-random":
            params = {"band": (-0.5, 1.5), "seed": int(rng.integers(0, 2 ** 31))}
        else:
            params = {"center": center, "width": 0.25 * width, "radius": width}
        battery.append(make_signal(kind, grid, M, **params))
    return battery


def signal_from_window(window: SpectralWindow, grid: GridSpec, g: Optional[GroupElement] = None) -> TestSignal:
    """Samples of pi(g) psi = |det A|^{-s/2} psi(A^-s (. - x))."""
    g = g or GroupElement(np.zeros(grid.d), 0.0)
    samples, _ = synthesize(window, spatial_grid(grid), s=g.s, shift=g.x)
    return _signal(grid, samples, "window", {"x": g.x.tolist(), "s": g.s})


def _profile_mass(window: SpectralWindow, lo: np.ndarray, hi: np.ndarray, samples: int = 4001) -> np.ndarray:
    a, b = window.profile.support
    t = np.linspace(a, b, samples)
    w2 = window_profile(window, t) ** 2
    cdf = np.concatenate(([0.0], np.cumsum(0.5 * (w2[1:] + w2[:-1]) * np.diff(t))))
    total = cdf[-1] if cdf[-1] > 0 else 1.0
    return (np.interp(hi, t, cdf) - np.interp(lo, t, cdf)) / total


def covering_scales(
    signal: TestSignal, window: SpectralWindow, margin: float = 2.0, step: float = 0.25
) -> Dict[str, Any]:
    """
    Scale box covering the orbit of the signal's frequency support, widened by margin.

    The box ends are multiples of ``step``. The reported tail is the share of
    the signal's energy whose orbit integral falls outside the box.
    """
    t = frequency_scales(window, signal.grid).ravel()
    energy = np.abs(signal.fourier.ravel()) ** 2
    lo, hi = window.profile.support
    if energy.max() == 0:
        return {"s_min": 0.0, "s_max": 0.0, "m": 1, "tail": 0.0}
    active = (energy > SUPPORT_TOL * energy.max()) & np.isfinite(t)
    if not np.any(active):
        return {"s_min": 0.0, "s_max": 0.0, "m": 1, "tail": 0.0}
    s_min = math.floor((lo - t[active].max() - margin) / step) * step
    s_max = math.ceil((hi - t[active].min() + margin) / step) * step
    m = int(round((s_max - s_min) / step)) + 1
    covered = _profile_mass(window, t[active] + s_min, t[active] + s_max)
    weights = energy[active]
    tail = float(np.sum(weights * np.clip(1.0 - covered, 0.0, 1.0)) / np.sum(energy))
    return {"s_min": s_min, "s_max": s_max, "m": m, "tail": tail}


def _transform_grid(signal: TestSignal, scales: Union[GridSpec, Tuple[float, float, int]]) -> GridSpec:
    if isinstance(scales, GridSpec):
        if not _same_lattice(scales, signal.grid):
            raise GridMismatch(f"Signal lattice {signal.grid} differs from {scales}")
        return scales
    s_min, s_max, m = scales
    return signal.grid.with_scales(s_min, s_max, m)


def _check_alias(window: SpectralWindow, grid: GridSpec, scales: np.ndarray) -> None:
    ring = nyquist_ring(grid)
    for s in scales:
        edge = np.abs(window_on_grid(window, grid, s)[ring])
        if edge.size and edge.max() > ALIAS_TOL:
            warnings.warn(f"Window at scale {s:.4g} reaches the Nyquist box", AliasWarning)
            logger.warning(f"Window at scale {s:.4g} reaches the Nyquist box; transform is aliased")
            return


def wavelet_transform(
    signal: TestSignal,
    window: SpectralWindow,
    scales: Union[GridSpec, Tuple[float, float, int]],
) -> GroupField:
    """
    Wavelet transform W_psi f sampled on the lattice times the scale grid.

    Args:
        signal: Sampled signal
        window: Analyzing window psi
        scales: Grid on the signal's lattice, or (s_min, s_max, m)

    Returns:
        GroupField of W_psi f

    Raises:
        GridMismatch: If a grid with a different lattice is given

    Example:
        >>> from anisowave.anisotropy import make_expansive
        >>> M = make_expansive([[2.0]])
        >>> f = make_signal("gaussian", GridSpec(d=1, n=256, X=8.0, m=1, s_min=0, s_max=0), M)
        >>> W = wavelet_transform(f, build_admissible(M), (-4.0, 2.0, 25))
        >>> W.values.shape
        (25, 256)
    """
    grid = _transform_grid(signal, scales)
    _check_alias(window, grid, grid.scales)
    det_a = window.matrix.det_a
    lattice = spatial_grid(grid)

    def one_scale(s: float) -> np.ndarray:
        psi_hat = window_on_grid(window, grid, s)
        return det_a ** (s / 2.0) * from_fourier(signal.fourier * np.conj(psi_hat), lattice)

    values = np.stack(map_ordered(one_scale, grid.scales))
    logger.info(f"Wavelet transform on {grid.shape}, scales [{grid.s_min}, {grid.s_max}]")
    return GroupField(grid=grid, values=values)


def reconstruct(W: GroupField, window: SpectralWindow) -> TestSignal:
    """
    Haar-weighted synthesis f = int W(x, s) pi(x, s) psi dmu(x, s).

    Raises:
        GridMismatch: If the field is not on its grid's own lattice
    """
    if not W.is_standard:
        raise GridMismatch("Reconstruction needs a field on the standard lattice")
    grid = W.grid
    lattice = spatial_grid(grid)
    weights = scale_weights(grid, window.matrix)
    det_a = window.matrix.det_a

    def one_scale(j: int) -> np.ndarray:
        s = grid.scales[j]
        return weights[j] * det_a ** (s / 2.0) * window_on_grid(window, grid, s) * to_fourier(W.values[j], lattice)

    fhat = np.sum(map_ordered(one_scale, range(grid.m)), axis=0)
    return _signal(grid, from_fourier(fhat, lattice), "reconstruction", {})


def relative_error(estimate: np.ndarray, reference: np.ndarray) -> float:
    """||estimate - reference|| / ||reference||, with 0/0 read as 0."""
    ref = float(np.linalg.norm(reference))
    diff = float(np.linalg.norm(estimate - reference))
    if ref == 0:
        return 0.0 if diff == 0 else math.inf
    return diff / ref


def field_norm(F: GroupField, M: ExpansiveMatrix) -> float:
    """L2(G_A) norm of a sampled field."""
    return math.sqrt(float(np.sum(np.abs(F.values) ** 2 * haar_weights(F, M))))


def isometry_ratio(W: GroupField, signal: TestSignal, M: ExpansiveMatrix) -> float:
    """||W||_{L2(G_A)} / ||f||_{L2}; nan for the zero signal."""
    energy = signal.energy
    if energy == 0:
        return math.nan
    return field_norm(W, M) / math.sqrt(energy)


def reproducing_defect(
    signal: TestSignal,
    phi: SpectralWindow,
    psi: SpectralWindow,
    scales: Union[GridSpec, Tuple[float, float, int]],
    order: int = 1,
) -> Dict[str, Any]:
    """
    Relative defect of W_phi f = W_psi f * W_phi psi on a shared grid.

    Both sides are compared in L2(G_A); a zero signal has defect 0. `order` is
    the spline order used to evaluate the kernel off the lattice.
    """
    grid = _transform_grid(signal, scales)
    M = phi.matrix
    lhs = wavelet_transform(signal, phi, grid)
    kernel = wavelet_transform(signal_from_window(psi, grid), phi, grid)
    rhs = group_convolve(wavelet_transform(signal, psi, grid), kernel, M, order=order)
    diff = GroupField(grid=grid, values=lhs.values - rhs.values)
    lhs_norm = field_norm(lhs, M)
    diff_norm = field_norm(diff, M)
    defect = 0.0 if lhs_norm == 0 and diff_norm == 0 else diff_norm / lhs_norm
    logger.info(f"Reproducing defect on {grid.shape}: {defect:.4e}")
    return {"defect": defect, "lhs_norm": lhs_norm, "rhs_norm": field_norm(rhs, M)}


def intertwining_defect(
    signal: TestSignal, window: SpectralWindow, scales: Union[GridSpec, Tuple[float, float, int]], shift: np.ndarray
) -> float:
    """Defect of W[pi(y, 0) f] = L_(y, 0) W f for a lattice vector y."""
    grid = _transform_grid(signal, scales)
    g = GroupElement(shift, 0.0)
    lattice = spatial_grid(grid)
    moved = np.roll(signal.samples, tuple(np.round(np.asarray(shift) / grid.step).astype(int)),
                    axis=tuple(range(grid.d)))
    lhs = wavelet_transform(_signal(lattice, moved, signal.kind, signal.params), window, grid)
    rhs = translate_left(wavelet_transform(signal, window, grid), g, window.matrix)
    return relative_error(lhs.values, rhs.values)


def scale_marginals(W: GroupField, M: ExpansiveMatrix) -> np.ndarray:
    """Energy of each scale slice against the Haar measure."""
    weights = haar_weights(W, M)
    axes = tuple(range(1, W.grid.d + 1))
    return np.sum(np.abs(W.values) ** 2 * weights, axis=axes)


def expected_marginals(signal: TestSignal, window: SpectralWindow, grid: GridSpec) -> np.ndarray:
    """Predicted per-scale energies sum_xi |f_hat|^2 |psi_hat((A*)^s xi)|^2 times the scale cells."""
    weights = scale_weights(grid, window.matrix)
    d_xi = 1.0 / (2.0 * grid.X) ** grid.d
    energy = np.abs(signal.fourier) ** 2
    return np.array([
        weights[j] * window.matrix.det_a ** s * d_xi * np.sum(energy * window_on_grid(window, grid, s) ** 2)
        for j, s in enumerate(grid.scales)
    ])


def decay_fit(W: GroupField, M: ExpansiveMatrix, which: str = "spatial") -> Dict[str, Any]:
    """
    Log-regression of max-modulus envelopes of a field.

    Args:
        W: Sampled field (typically the transform of a window)
        M: Expansive matrix
        which: "spatial" fits log|W(x, 0)| against log(1 + rho_A(x));
            "scale" fits log|W(0, s)| against |s|

    Returns:
        Dictionary with slope, intercept and r2
    """
    grid = W.grid
    if which == "spatial":
        j = int(np.argmin(np.abs(W.scales)))
        return radial_decay(W.values[j], spatial_points(grid) @ W.spatial_frame.T + W.spatial_origin, M)
    if which == "scale":
        centre = tuple([grid.n // 2] * grid.d)
        values = np.abs(W.values[(slice(None),) + centre])
        s = np.abs(W.scales)
        levels = np.unique(s)
        envelope = np.array([values[s >= level].max() for level in levels])
        peak = envelope.max() if envelope.size else 0.0
        keep = envelope > 1e-12 * peak if peak > 0 else np.zeros_like(envelope, dtype=bool)
        if np.count_nonzero(keep) < 2:
            return {"slope": 0.0, "intercept": 0.0, "r2": 1.0}
        return linear_fit(levels[keep], np.log(envelope[keep]))
    raise ValueError(f"Unknown decay direction: {which}")

