"""
Fourier-domain windows for anisowave.

Windows are built on the continuous A*-scale coordinate t(xi): a window is
psi_hat(xi) = w(t(xi)) up to a role-dependent normalization, where w is a
smooth compactly supported scale profile. Since t((A*)^s xi) = t(xi) + s,
orbit integrals and dilation sums reduce to integrals and sums of w.
"""

import logging
import math
import warnings
from itertools import product
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy import integrate

from .anisotropy import adjoint, build_ellipsoid, continuous_scale, matrix_powers, quasi_norm
from .errors import AliasWarning, CoverageGap, ProfileDegenerate
from .models import CalderonPair, ExpansiveMatrix, GridSpec, ScaleProfile, SpectralWindow
from .utils import frequency_points, from_fourier, linear_fit, nyquist_ring, spatial_points

logger = logging.getLogger(__name__)

PROFILE_KINDS = ("bump", "plateau-bump", "cosine")
COVERAGE_FLOOR = 1e-8
ALIAS_TOL = 1e-10


def _transition(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def smooth_step(u: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for u <= 0, 1 for u >= 1, and step(u) + step(1-u) = 1."""
    a = _transition(u)
    b = _transition(1.0 - np.asarray(u, dtype=float))
    return a / (a + b)


def validate_profile(profile: ScaleProfile) -> None:
    if profile.kind not in PROFILE_KINDS:
        raise ValueError(f"Unsupported profile kind: {profile.kind}")
    if profile.kind == "cosine" and abs(profile.halfwidth - 1.0) > 1e-12:
        raise ValueError("Cosine profiles have halfwidth 1")
    if profile.kind == "plateau-bump" and not 0 <= profile.plateau_halfwidth < profile.halfwidth:
        raise ValueError(
            f"Plateau halfwidth {profile.plateau_halfwidth} must lie in [0, {profile.halfwidth})"
        )


def profile_values(profile: ScaleProfile, t: np.ndarray) -> np.ndarray:
    """
    Evaluate the scale profile w(t); t = -inf (the zero frequency) maps to 0.

    Args:
        profile: Scale profile
        t: Scale coordinates

    Returns:
        Array of profile values, same shape as t
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    finite = np.isfinite(t)
    u = (t[finite] - profile.center)
    if profile.halfwidth <= 0:
        return out

    if profile.kind == "bump":
        v = u / profile.halfwidth
        inside = np.abs(v) < 1
        vals = np.zeros_like(v)
        vals[inside] = np.exp(1.0 - 1.0 / (1.0 - v[inside] ** 2))
    elif profile.kind == "plateau-bump":
        width = profile.halfwidth - profile.plateau_halfwidth
        vals = smooth_step((profile.halfwidth - np.abs(u)) / width)
    elif profile.kind == "cosine":
        inside = np.abs(u) < 1
        vals = np.zeros_like(u)
        vals[inside] = np.cos(0.5 * np.pi * smooth_step(np.abs(u[inside])))
    else:
        raise ValueError(f"Unsupported profile kind: {profile.kind}")

    out[finite] = vals
    return out


def profile_l2_norm(profile: ScaleProfile) -> float:
    """||w||_{L2(R)} by adaptive quadrature over the support."""
    lo, hi = profile.support
    if hi <= lo:
        return 0.0
    points = [profile.center]
    if profile.kind == "plateau-bump":
        points += [profile.center - profile.plateau_halfwidth, profile.center + profile.plateau_halfwidth]
    points = sorted(p for p in set(points) if lo < p < hi)
    value, _ = integrate.quad(
        lambda t: float(profile_values(profile, np.array([t]))[0]) ** 2,
        lo, hi, points=points or None, limit=200, epsabs=1e-14, epsrel=1e-13,
    )
    return math.sqrt(value)


def periodized_energy(profile: ScaleProfile, t: np.ndarray) -> np.ndarray:
    """S(t) = sum_j w(t + j)^2, a 1-periodic function."""
    t = np.asarray(t, dtype=float)
    reach = int(math.ceil(profile.halfwidth)) + 1
    base = np.round(profile.center - np.where(np.isfinite(t), t, 0.0))
    total = np.zeros_like(t)
    for k in range(-reach, reach + 1):
        total += profile_values(profile, t + base + k) ** 2
    return np.where(np.isfinite(t), total, 0.0)


def coverage(profile: ScaleProfile, samples: int = 4096) -> Tuple[float, float]:
    """Minimum and maximum of S(t) over one period."""
    S = periodized_energy(profile, np.linspace(0.0, 1.0, samples, endpoint=False))
    return float(S.min()), float(S.max())


def _make_window(M: ExpansiveMatrix, profile: ScaleProfile, role: str, norm: float, cover: float) -> SpectralWindow:
    M_star = adjoint(M)
    return SpectralWindow(
        matrix=M,
        adjoint=M_star,
        ellipsoid=build_ellipsoid(M_star),
        profile=profile,
        role=role,
        profile_norm=norm,
        min_coverage=cover,
    )


def build_admissible(M: ExpansiveMatrix, profile: Optional[ScaleProfile] = None) -> SpectralWindow:
    """
    Build an admissible window psi_hat(xi) = w(t(xi)) / ||w||_{L2}.

    The orbit integral of |psi_hat((A*)^s xi)|^2 over s equals
    ||w||^2 / ||w||^2 = 1 for every xi != 0.

    Args:
        M: Expansive matrix
        profile: Scale profile (default: plateau-bump on t in [-1, 2])

    Returns:
        SpectralWindow with role "admissible"

    Raises:
        ProfileDegenerate: If ||w|| = 0
    """
    profile = profile or ScaleProfile()
    validate_profile(profile)
    norm = profile_l2_norm(profile)
    if norm <= 0:
        raise ProfileDegenerate(f"Profile {profile} has zero L2 norm")
    logger.info(f"Built admissible window: {profile.kind}, ||w|| = {norm:.6f}")
    return _make_window(M, profile, "admissible", norm, coverage(profile)[0])


def build_calderon_pair(M: ExpansiveMatrix, profile: Optional[ScaleProfile] = None) -> CalderonPair:
    """
    Build a Calderon pair: phi_hat = w(t) and psi_hat = conj(phi_hat) / sum_k |phi_hat((A*)^k xi)|^2.

    Args:
        M: Expansive matrix
        profile: Scale profile whose integer shifts cover the line

    Returns:
        CalderonPair (tight when sum_j w(t + j)^2 is identically 1)

    Raises:
        CoverageGap: If min_t sum_j w(t + j)^2 < 1e-8
    """
    profile = profile or ScaleProfile()
    validate_profile(profile)
    lowest, highest = coverage(profile)
    if lowest < COVERAGE_FLOOR:
        raise CoverageGap(
            f"Integer shifts of the profile leave gaps: min sum_j w(t+j)^2 = {lowest:.3e}"
        )
    norm = profile_l2_norm(profile)
    tight = abs(lowest - 1.0) < 1e-9 and abs(highest - 1.0) < 1e-9
    analyzing = _make_window(M, profile, "analyzing", norm, lowest)
    dual = SpectralWindow(
        matrix=M,
        adjoint=analyzing.adjoint,
        ellipsoid=analyzing.ellipsoid,
        profile=profile,
        role="dual",
        profile_norm=norm,
        min_coverage=lowest,
    )
    logger.info(f"Built Calderon pair: {profile.kind}, coverage [{lowest:.4f}, {highest:.4f}], tight={tight}")
    return CalderonPair(analyzing=analyzing, dual=dual, tight=tight)


def tight_profile(center: float = 0.5) -> ScaleProfile:
    """Shifted squared-cosine profile with sum_j w(t + j)^2 = 1."""
    return ScaleProfile(kind="cosine", center=center, halfwidth=1.0, plateau_halfwidth=0.0)


def window_profile(window: SpectralWindow, t: np.ndarray) -> np.ndarray:
    """Window value as a function of the scale coordinate."""
    w = profile_values(window.profile, t)
    if window.role == "admissible":
        return w / window.profile_norm
    if window.role == "analyzing":
        return w
    if window.role == "dual":
        S = periodized_energy(window.profile, t)
        return np.divide(w, S, out=np.zeros_like(w), where=S > 0)
    raise ValueError(f"Unknown window role: {window.role}")


def frequency_scales(window: SpectralWindow, grid: GridSpec) -> np.ndarray:
    """A*-scale t(xi) on the grid's FFT frequencies (-inf at xi = 0), cached per lattice."""
    key = ("scales", grid.d, grid.n, grid.X)
    if key not in window.cache:
        xi = frequency_points(grid)
        t = np.full(xi.shape[0], -np.inf)
        nonzero = np.any(xi != 0, axis=1)
        t[nonzero] = continuous_scale(window.ellipsoid, window.adjoint, xi[nonzero])
        window.cache[key] = t.reshape(grid.spatial_shape)
    return window.cache[key]


def window_on_grid(window: SpectralWindow, grid: GridSpec, s: float = 0.0) -> np.ndarray:
    """Samples of psi_hat((A*)^s xi) on the FFT frequency grid."""
    return window_profile(window, frequency_scales(window, grid) + s)


def dilate_fourier(window: SpectralWindow, s: float, grid: GridSpec) -> np.ndarray:
    """
    Samples of phi_hat_s(xi) = phi_hat((A*)^-s xi), the transform of |det A|^s phi(A^s .).

    Example:
        >>> from anisowave.anisotropy import make_expansive
        >>> W = build_admissible(make_expansive([[2.0]]), tight_profile(center=0.0))
        >>> grid = GridSpec(d=1, n=64, X=8.0, m=1, s_min=0.0, s_max=0.0)
        >>> bool(np.array_equal(dilate_fourier(W, 1.0, grid), window_on_grid(W, grid, -1.0)))
        True
    """
    return window_on_grid(window, grid, -s)


def evaluate_window(window: SpectralWindow, xi: np.ndarray) -> np.ndarray:
    """Window values at arbitrary frequencies, shape (N, d) -> (N,)."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float)).reshape(-1, window.matrix.dim)
    t = np.full(xi.shape[0], -np.inf)
    nonzero = np.any(xi != 0, axis=1)
    if np.any(nonzero):
        t[nonzero] = continuous_scale(window.ellipsoid, window.adjoint, xi[nonzero])
    return window_profile(window, t)


def _gauss_panels(lo: float, hi: float, panels: int, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    points = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return points, weights


def _dilated(window: SpectralWindow, xi: np.ndarray, s: np.ndarray) -> np.ndarray:
    powers = matrix_powers(window.adjoint, s.ravel())
    repeated = np.repeat(xi, s.shape[1], axis=0)
    return np.einsum("nij,nj->ni", powers, repeated)


def admissibility_defect(
    window: SpectralWindow, xi: np.ndarray, panels: int = 16, nodes: int = 16
) -> Dict[str, Any]:
    """
    Numerical orbit integrals int |psi_hat((A*)^s xi)|^2 ds at sampled frequencies.

    Every node (A*)^s xi is formed explicitly and its scale re-solved, so the
    defect measures the scale solver and the quadrature, not the algebra.

    Returns:
        Dictionary with max defect and per-frequency integrals
    """
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    t0 = continuous_scale(window.ellipsoid, window.adjoint, xi)
    lo, hi = window.profile.support
    tau, weights = _gauss_panels(lo, hi, panels, nodes)
    s = tau[None, :] - np.atleast_1d(t0)[:, None]
    t_nodes = continuous_scale(window.ellipsoid, window.adjoint, _dilated(window, xi, s))
    values = window_profile(window, np.asarray(t_nodes).reshape(s.shape)) ** 2
    integrals = values @ weights
    defect = float(np.max(np.abs(integrals - 1.0)))
    logger.info(f"Admissibility defect over {len(xi)} frequencies: {defect:.3e}")
    return {"defect": defect, "integrals": integrals}


def calderon_defect(pair: CalderonPair, xi: np.ndarray) -> Dict[str, Any]:
    """sup over sampled xi of |sum_j phi_hat psi_hat((A*)^j xi) - 1|, with integer dilates formed explicitly."""
    window = pair.analyzing
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    t0 = np.atleast_1d(continuous_scale(window.ellipsoid, window.adjoint, xi))
    reach = int(math.ceil(window.profile.halfwidth)) + 2
    base = np.round(window.profile.center - t0)
    shifts = base[:, None] + np.arange(-reach, reach + 1)[None, :]
    t_nodes = np.asarray(
        continuous_scale(window.ellipsoid, window.adjoint, _dilated(window, xi, shifts))
    ).reshape(shifts.shape)
    sums = np.sum(window_profile(pair.analyzing, t_nodes) * window_profile(pair.dual, t_nodes), axis=1)
    defect = float(np.max(np.abs(sums - 1.0)))
    logger.info(f"Calderon defect over {len(xi)} frequencies: {defect:.3e}")
    return {"defect": defect, "sums": sums}


def random_frequencies(M: ExpansiveMatrix, count: int, seed: int = 0, spread: float = 3.0) -> np.ndarray:
    """Random nonzero frequencies spread over several A*-shells."""
    rng = np.random.default_rng(seed)
    directions = rng.normal(size=(count, M.dim))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    radii = np.exp(rng.uniform(-spread, spread, size=count))
    return directions * radii[:, None]


def moments(samples: np.ndarray, grid: GridSpec, order: int = 3) -> float:
    """Largest relative moment |int f x^a| / int |f| |x^a| over |a| <= order."""
    X = spatial_points(grid)
    f = samples.ravel()
    worst = 0.0
    for a in product(range(order + 1), repeat=grid.d):
        if sum(a) > order:
            continue
        mono = np.prod(X ** np.array(a), axis=1)
        scale = np.sum(np.abs(f * mono))
        if scale > 0:
            worst = max(worst, abs(np.sum(f * mono)) / scale)
    return float(worst)


def radial_decay(
    values: np.ndarray, points: np.ndarray, M: ExpansiveMatrix, floor: float = 1e-11
) -> Dict[str, float]:
    """
    Fit log max|f| against log(1 + rho_A(x)) over quasi-norm shells with rho >= 1.

    The envelope on each shell is the maximum of |f| on that shell and every
    shell further out; values below floor * peak are discarded.
    """
    key_E = build_ellipsoid(M)
    rho = quasi_norm(key_E, M, points)
    mags = np.abs(values).ravel()
    peak = mags.max() if mags.size else 0.0
    shells = np.unique(rho[rho >= 1])
    if peak == 0 or shells.size < 2:
        return {"slope": 0.0, "intercept": 0.0, "r2": 1.0, "points": int(shells.size)}
    envelope = np.array([mags[rho >= level].max() for level in shells])
    keep = envelope > floor * peak
    if np.count_nonzero(keep) < 2:
        return {"slope": 0.0, "intercept": 0.0, "r2": 1.0, "points": int(np.count_nonzero(keep))}
    fit = linear_fit(np.log1p(shells[keep]), np.log(envelope[keep]))
    fit["points"] = int(np.count_nonzero(keep))
    return fit


def synthesize(
    window: SpectralWindow, grid: GridSpec, s: float = 0.0, shift: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, Dict[str, Any]]:
    """
    Spatial samples of the window (optionally dilated and translated) by inverse FFT.

    Args:
        window: Spectral window
        grid: Spatial grid
        s: Scale; samples |det A|^{-s/2} psi(A^-s (x - shift))
        shift: Spatial translation (default 0)

    Returns:
        (samples, report) where report has imag_max, alias flag and the fitted decay
    """
    fhat = window_on_grid(window, grid, s) * window.matrix.det_a ** (s / 2.0)
    alias = bool(np.max(np.abs(fhat[nyquist_ring(grid)]), initial=0.0) > ALIAS_TOL * max(np.abs(fhat).max(), 1e-300))
    if alias:
        warnings.warn(f"Window at scale {s} reaches the Nyquist box of {grid}", AliasWarning)
        logger.warning(f"Window at scale {s} reaches the Nyquist box")
    if shift is not None:
        xi = frequency_points(grid)
        fhat = fhat * np.exp(-2j * np.pi * (xi @ np.asarray(shift, dtype=float))).reshape(grid.spatial_shape)
    samples = from_fourier(fhat, grid)
    report = {
        "imag_max": float(np.max(np.abs(samples.imag))),
        "alias": alias,
        "decay": radial_decay(samples, spatial_points(grid), window.matrix),
    }
    return samples, report
