"""
Weight calculus on G_A for anisowave.

Standard envelopes Xi_{sigma,L}, the submultiplicative weight v, standard
control weights realized by their envelope surrogate, Wiener-amalgam norms,
envelope integrability certificates and the molecule criteria.
"""

import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .anisotropy import _certify, _sobol, build_ellipsoid, matrix_power, quasi_norm
from .errors import NonConvergent
from .group import haar_weights, invert, multiply, reflect
from .maximal import local_maximal
from .models import (
    AnisotropicEllipsoid,
    ControlWeightSpec,
    Envelope,
    ExpansiveMatrix,
    GridSpec,
    GroupElement,
    GroupField,
    QBox,
    SpectralWindow,
    TestSignal,
    TLParams,
)
from .spectra import moments
from .transform import wavelet_transform
from .utils import linear_fit, map_ordered, seeded_rng, spatial_points

logger = logging.getLogger(__name__)

V_MAX_LEVEL = 8
V_STABLE = 0.01
V_SAMPLES = 256
SUBMULTIPLICATIVE_SLACK = 0.05
MOMENT_TOL = 1e-6


def _ellipsoid(M: ExpansiveMatrix, E: Optional[AnisotropicEllipsoid]) -> AnisotropicEllipsoid:
    return E if E is not None else build_ellipsoid(M)


# --- standard envelopes -----------------------------------------------------


def theta(sigma: Tuple[float, float], s: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """theta_sigma(s) = sigma_1^s for s >= 0 and sigma_2^s for s < 0."""
    s = np.asarray(s, dtype=float)
    out = np.where(s >= 0, float(sigma[0]) ** s, float(sigma[1]) ** s)
    return float(out) if out.ndim == 0 else out


def eta(L: float, X: np.ndarray, s: float, M: ExpansiveMatrix, E: Optional[AnisotropicEllipsoid] = None) -> np.ndarray:
    """eta_L(x, s) = (1 + min(rho(x), rho(A^-s x)))^-L for points X of shape (N, d)."""
    E = _ellipsoid(M, E)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    rho = np.minimum(quasi_norm(E, M, X), quasi_norm(E, M, X @ matrix_power(M, -s).T))
    return (1.0 + rho) ** (-float(L))


def envelope_eval(
    env: Envelope, g: GroupElement, M: ExpansiveMatrix, E: Optional[AnisotropicEllipsoid] = None
) -> float:
    """
    Evaluate Xi_{sigma,L}(x, s) = theta_sigma(s) * eta_L(x, s).

    Example:
        >>> from anisowave.anisotropy import make_expansive
        >>> M = make_expansive([[2.0]])
        >>> envelope_eval(Envelope(sigma=(2.0, 0.5), L=2.0), GroupElement([0.0], 0.0), M)
        1.0
    """
    return float(theta(env.sigma, g.s) * eta(env.L, g.x[None, :], g.s, M, E)[0])


def envelope_field(
    env: Envelope, grid: GridSpec, M: ExpansiveMatrix, E: Optional[AnisotropicEllipsoid] = None
) -> GroupField:
    """Samples of Xi_{sigma,L} on the grid."""
    E = _ellipsoid(M, E)
    X = spatial_points(grid)
    values = np.stack([
        (theta(env.sigma, s) * eta(env.L, X, s, M, E)).reshape(grid.spatial_shape) for s in grid.scales
    ])
    return GroupField(grid=grid, values=values)


def h_function_alternative_ratio(
    L: float, points: Sequence[GroupElement], M: ExpansiveMatrix, E: Optional[AnisotropicEllipsoid] = None
) -> Dict[str, float]:
    """Two-sided constant between eta_L(x, s) and (1 + rho(A^{-s+} x))^-L over the points."""
    E = _ellipsoid(M, E)
    ratios = []
    for g in points:
        exact = eta(L, g.x[None, :], g.s, M, E)[0]
        alternative = (1.0 + quasi_norm(E, M, matrix_power(M, -max(g.s, 0.0)) @ g.x)) ** (-float(L))
        ratios.append(exact / alternative)
    low, high = float(min(ratios)), float(max(ratios))
    return {"low": low, "high": high, "C": max(high, 1.0 / low)}


def fit_envelope(
    W: GroupField, env: Envelope, M: ExpansiveMatrix, E: Optional[AnisotropicEllipsoid] = None
) -> float:
    """Smallest amplitude C with |W| <= C * Xi_{sigma,L} on the samples of W."""
    Xi = envelope_field(env, W.grid, M, E)
    return float(np.max(np.abs(W.values) / Xi.values))


def envelope_maximal_check(
    env: Envelope,
    grid: GridSpec,
    M: ExpansiveMatrix,
    box: Optional[QBox] = None,
    E: Optional[AnisotropicEllipsoid] = None,
) -> Dict[str, float]:
    """
    Fitted C in M_Q Xi <= C Xi over the whole grid and over its central half.

    A location-independent constant shows up as spread = C / C_inner close to 1.
    """
    Xi = envelope_field(env, grid, M, E)
    ratio = local_maximal(Xi, M, box).values.real / Xi.values
    inner = (slice(grid.m // 4, grid.m - grid.m // 4),) + (slice(grid.n // 4, grid.n - grid.n // 4),) * grid.d
    C, C_inner = float(ratio.max()), float(ratio[inner].max())
    return {"C": C, "C_inner": C_inner, "spread": C / C_inner}


# --- the weight v -----------------------------------------------------------


def v_closed_form(g: GroupElement, M: ExpansiveMatrix, E: Optional[AnisotropicEllipsoid] = None) -> float:
    """1 + |det A|^-t + rho(A^-t y)."""
    E = _ellipsoid(M, E)
    return 1.0 + M.det_a ** (-g.s) + float(quasi_norm(E, M, matrix_power(M, -g.s) @ g.x))


def _v_ratios(W: np.ndarray, g: GroupElement, M: ExpansiveMatrix, E: AnisotropicEllipsoid) -> np.ndarray:
    # sup over (z, u) of (1 + rho(A^-u z)) / (1 + rho(A^-u A^t z - y)); with w = A^-u z the
    # ratio is (1 + rho(w)) / (1 + rho(A^t w - y)), independent of u
    moved = W @ matrix_power(M, g.s).T - g.x
    return (1.0 + quasi_norm(E, M, W)) / (1.0 + quasi_norm(E, M, moved))


def v_bruteforce(
    g: GroupElement,
    M: ExpansiveMatrix,
    E: Optional[AnisotropicEllipsoid] = None,
    samples: int = V_SAMPLES,
    seed: int = 0,
) -> float:
    """
    Sampled sup defining v over boxes A^k [-1, 1]^d, |k| <= 2 level, around A^-t y.

    Levels grow until the running sup changes by less than 1% between
    consecutive levels.

    Raises:
        NonConvergent: If the sup keeps growing past level 8
    """
    E = _ellipsoid(M, E)
    centre = matrix_power(M, -g.s) @ g.x
    unit = 2.0 * _sobol(M.dim, samples, seed) - 1.0
    best = float(max(_v_ratios(np.stack([centre, np.zeros(M.dim)]), g, M, E)))
    previous = best
    for level in range(1, V_MAX_LEVEL + 1):
        ks = (2 * level - 1, 2 * level, 1 - 2 * level, -2 * level) + ((0,) if level == 1 else ())
        for k in ks:
            W = unit @ matrix_power(M, float(k)).T
            best = max(best, float(_v_ratios(centre + W, g, M, E).max()), float(_v_ratios(W, g, M, E).max()))
        if level > 1 and best <= previous * (1.0 + V_STABLE):
            logger.debug(f"v({g.x}, {g.s}) stabilized at level {level}: {best:.6g}")
            return best
        previous = best
    raise NonConvergent(f"Sampled sup of v at (y={g.x}, t={g.s}) still growing at level {V_MAX_LEVEL}")


def weight_v(
    g: GroupElement, M: ExpansiveMatrix, mode: str = "closedform", E: Optional[AnisotropicEllipsoid] = None
) -> float:
    """
    The submultiplicative weight v(y, t).

    Args:
        g: Group element (y, t)
        M: Expansive matrix
        mode: "closedform" for 1 + |det A|^-t + rho(A^-t y), "bruteforce" for the sampled sup
        E: Ellipsoid of A

    Returns:
        Positive weight value

    Raises:
        ValueError: For unknown modes
        NonConvergent: If the brute-force sup does not stabilize
    """
    if mode == "closedform":
        return v_closed_form(g, M, E)
    if mode == "bruteforce":
        return v_bruteforce(g, M, E)
    raise ValueError(f"Unknown mode for v: {mode}")


def random_elements(M: ExpansiveMatrix, count: int, seed: int = 0, spread: float = 2.0) -> List[GroupElement]:
    rng = seeded_rng(seed)
    return [GroupElement(rng.normal(scale=spread, size=M.dim), float(rng.uniform(-spread, spread)))
            for _ in range(count)]


def weight_check(
    M: ExpansiveMatrix, count: int = 100, seed: int = 0, E: Optional[AnisotropicEllipsoid] = None
) -> Dict[str, Any]:
    """
    Brute-force against closed form v over random points, and submultiplicativity.

    Returns:
        Dictionary with the fitted two-sided constant C and the number of
        pairs with v(gh) > (1 + 5%) v(g) v(h)
    """
    E = _ellipsoid(M, E)
    points = random_elements(M, count, seed)
    partners = random_elements(M, count, seed + 1)

    def evaluate(pair: Tuple[GroupElement, GroupElement]) -> Dict[str, float]:
        g, h = pair
        vg, vh = v_bruteforce(g, M, E), v_bruteforce(h, M, E)
        return {
            "ratio": vg / v_closed_form(g, M, E),
            "submultiplicative": v_bruteforce(multiply(g, h, M), M, E) / (vg * vh),
        }

    rows = map_ordered(evaluate, list(zip(points, partners)))
    ratios = np.array([row["ratio"] for row in rows])
    violations = int(sum(row["submultiplicative"] > 1.0 + SUBMULTIPLICATIVE_SLACK for row in rows))
    C = float(max(ratios.max(), 1.0 / ratios.min()))
    logger.info(f"Weight v over {count} points: C = {C:.4f}, violations = {violations}")
    return {"C": C, "violations": violations, "rows": rows}


# --- control weights --------------------------------------------------------


def control_weight(params: TLParams, M: ExpansiveMatrix) -> ControlWeightSpec:
    """
    Exponents of the standard control weight w ~ Xi_{sigma,0} + Xi_{kappa,-beta}.

    sigma = (|det A|^{1/r + |gamma|}, |det A|^-|gamma|) with gamma = alpha + 1/p - 1/q;
    kappa follows the branch alpha >= -(1/r + beta - 2/q)/2.

    Example:
        >>> spec = control_weight(TLParams(p=2, q=2, alpha=0, beta=1), make_expansive([[2, 0], [0, 2]]))
        >>> spec.sigma, spec.kappa
        ((4.0, 1.0), (8.0, 0.5))
    """
    a, r = M.det_a, params.r
    alpha, beta, inv_q = params.alpha, params.beta, params.inv_q
    gamma = abs(params.gamma)
    sigma = (a ** (1.0 / r + gamma), a ** (-gamma))
    if alpha >= -(1.0 / r + beta - 2.0 * inv_q) / 2.0:
        branch = "upper"
        kappa = (a ** (1.0 / r + alpha + beta - inv_q), a ** (-(alpha + beta - inv_q)))
    else:
        branch = "lower"
        kappa = (a ** (-(alpha - inv_q)), a ** (1.0 / r + alpha - inv_q))
    return ControlWeightSpec(params=params, det_a=a, sigma=sigma, kappa=kappa, branch=branch)


def control_weight_eval(
    spec: ControlWeightSpec, g: GroupElement, M: ExpansiveMatrix, E: Optional[AnisotropicEllipsoid] = None
) -> float:
    """w(g) = Xi_{sigma,0}(g) + Xi_{kappa,-beta}(g)."""
    return (envelope_eval(Envelope(spec.sigma, 0.0), g, M, E)
            + envelope_eval(Envelope(spec.kappa, -spec.params.beta), g, M, E))


def weight_field(
    spec: ControlWeightSpec, grid: GridSpec, M: ExpansiveMatrix, E: Optional[AnisotropicEllipsoid] = None
) -> GroupField:
    E = _ellipsoid(M, E)
    first = envelope_field(Envelope(spec.sigma, 0.0), grid, M, E)
    second = envelope_field(Envelope(spec.kappa, -spec.params.beta), grid, M, E)
    return GroupField(grid=grid, values=first.values + second.values)


def control_weight_symmetry_defect(
    spec: ControlWeightSpec, points: Sequence[GroupElement], M: ExpansiveMatrix,
    E: Optional[AnisotropicEllipsoid] = None,
) -> float:
    """Largest relative residual of w(g) = Delta^{1/r}(g^-1) w(g^-1) over the points."""
    E = _ellipsoid(M, E)
    worst = 0.0
    for g in points:
        inverse = invert(g, M)
        w = control_weight_eval(spec, g, M, E)
        mirrored = M.det_a ** (-inverse.s / spec.params.r) * control_weight_eval(spec, inverse, M, E)
        worst = max(worst, abs(w - mirrored) / w)
    return worst


# --- Wiener amalgams --------------------------------------------------------


def _weight_values(weight: Union[np.ndarray, GroupField, None]) -> Any:
    if weight is None:
        return 1.0
    return np.abs(weight.values if isinstance(weight, GroupField) else weight)


def weighted_lr_norm(
    F: GroupField, M: ExpansiveMatrix, r: float = 1.0, weight: Union[np.ndarray, GroupField, None] = None
) -> float:
    """||F||_{L^r_w(G_A)} by Haar quadrature."""
    values = np.abs(F.values) * _weight_values(weight)
    return float(np.sum(values ** r * haar_weights(F, M)) ** (1.0 / r))


def wiener_amalgam_norm(
    F: GroupField,
    M: ExpansiveMatrix,
    box: Optional[QBox] = None,
    r: float = 1.0,
    weight: Union[np.ndarray, GroupField, None] = None,
) -> float:
    """
    Norm of F in the Wiener amalgam W_Q(L^r_w): ||M_Q F||_{L^r_w}.

    Args:
        F: Field on the standard lattice
        M: Expansive matrix
        box: Neighborhood Q (default [-1, 1]^d x [-1, 1])
        r: Exponent of the local component
        weight: Samples of w on F's grid

    Returns:
        The amalgam norm
    """
    maximal = local_maximal(F, M, box, side="two")
    return weighted_lr_norm(maximal, M, r, weight)


def wiener_symmetry_defect(
    F: GroupField,
    M: ExpansiveMatrix,
    box: Optional[QBox] = None,
    r: float = 1.0,
    weight: Union[np.ndarray, GroupField, None] = None,
) -> float:
    """
    |N(F_check) - N(F)| / N(F) for the amalgam norm N and F_check(g) = F(g^-1).

    For a weight with w(g) = Delta^{1/r}(g^-1) w(g^-1) and Q = Q^-1 the two norms
    agree. The box neighborhood is not inverse-closed, so for general F the
    norms are only equivalent; for F = F_check the defect is pure discretization.
    """
    base = wiener_amalgam_norm(F, M, box, r, weight)
    if base == 0:
        return 0.0
    mirrored = wiener_amalgam_norm(reflect(F, M), M, box, r, weight)
    return abs(mirrored - base) / base


# --- envelope integrability -------------------------------------------------


def _exponential_terms(rate: float, minimum: int = 40) -> np.ndarray:
    """Unit-step pieces of int_0^S e^{rate s} ds."""
    count = minimum
    if rate < 0:
        count = max(minimum, int(math.ceil(math.log(1e-9) / rate)) + 5)
    k = np.arange(count, dtype=float)
    piece = 1.0 if rate == 0 else math.expm1(rate) / rate
    return np.exp(rate * k) * piece


def envelope_integrability(
    env: Envelope, r: float, M: ExpansiveMatrix, shells: int = 60
) -> Dict[str, Any]:
    """
    Decide whether Xi_{sigma,L} lies in L^r(G_A).

    The scale integral splits into int_0^inf e^{s r ln sigma_1} ds and
    int_-inf^0 e^{s (r ln sigma_2 - ln|det A|)} ds, both in closed form; the
    spatial integral of (1 + rho)^{-Lr} is a sum over quasi-norm shells.
    Divergent parts come with their unbounded partial sums.

    Args:
        env: Envelope (sigma, L)
        r: Exponent in (0, 1]
        M: Expansive matrix
        shells: Minimum number of shells on each side

    Returns:
        Dictionary with the finiteness predicate, the certificates of the three
        parts and, when finite, the value of the integral surrogate
    """
    if not 0 < r <= 1:
        raise ValueError(f"r must lie in (0, 1], got {r}")
    a = M.det_a
    sigma1, sigma2 = env.sigma
    predicate = sigma1 < 1 and sigma2 > a ** (1.0 / r) and env.L > 1.0 / r

    rate_pos = r * math.log(sigma1)
    rate_neg = -(r * math.log(sigma2) - math.log(a))
    positive = _certify(_exponential_terms(rate_pos))
    negative = _certify(_exponential_terms(rate_neg))

    # shell j carries rho = |det A|^j on a set of volume |det A|^j (|det A| - 1)
    Lr = env.L * r
    outer_count = shells
    if Lr > 1:
        outer_count = max(shells, int(math.ceil(math.log(1e-9) / ((1.0 - Lr) * math.log(a)))) + 5)
    log_a = math.log(a)

    def shell_terms(j: np.ndarray) -> np.ndarray:
        return np.exp(-Lr * np.logaddexp(0.0, j * log_a) + j * log_a + math.log(a - 1.0))

    outer = _certify(shell_terms(np.arange(outer_count, dtype=float)))
    inner = _certify(shell_terms(-np.arange(1, shells + 1, dtype=float)))

    numeric = positive["cauchy"] and negative["cauchy"] and outer["cauchy"]
    report: Dict[str, Any] = {
        "finite": bool(predicate),
        "certified": bool(numeric),
        "agree": bool(predicate) == bool(numeric),
        "s_positive": positive,
        "s_negative": negative,
        "x_outer": outer,
        "x_inner": inner,
    }
    if predicate:
        s_integral = -1.0 / rate_pos - 1.0 / rate_neg
        x_integral = outer["partial_sums"][-1] + inner["partial_sums"][-1]
        report["value"] = s_integral * x_integral
    logger.info(f"Envelope sigma={env.sigma}, L={env.L}, r={r}: finite={predicate}, certified={numeric}")
    return report


# --- molecules --------------------------------------------------------------


def molecule_thresholds(params: TLParams, det_a: float) -> List[float]:
    """The three lower bounds that lambda_-^{delta N} must exceed."""
    r, alpha, beta, inv_q = params.r, params.alpha, params.beta, params.inv_q
    return [
        det_a ** (1.0 / r - 0.5 + abs(params.gamma)),
        det_a ** (-0.5 + 1.0 / r + alpha + beta - inv_q),
        det_a ** (-0.5 - (alpha - inv_q)),
    ]


def molecule_param_check(
    params: TLParams, L: float, N: int, delta: float, lambda_minus: float, det_a: float
) -> Dict[str, Any]:
    """
    Sufficient conditions for W_f f to lie in the amalgam W(L^r_w).

    Both lambda_-^{delta N} > max(thresholds) and L (1 - delta) > 1/r + beta
    must hold.

    Args:
        params: Exponents (p, q, alpha, beta)
        L: Spatial decay order of f, L > 1
        N: Number of vanishing moments, N >= 0
        delta: Interpolation parameter in (0, 1)
        lambda_minus: Bound 1 < lambda_- < min |sigma(A)|
        det_a: |det A|

    Returns:
        Dictionary with the verdict and the margins of both inequalities

    Raises:
        ValueError: If delta, N, L or lambda_minus are out of range
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if N < 0 or L <= 1:
        raise ValueError(f"Need N >= 0 and L > 1, got N={N}, L={L}")
    if lambda_minus <= 1:
        raise ValueError(f"lambda_minus must exceed 1, got {lambda_minus}")
    threshold = max(molecule_thresholds(params, det_a))
    growth = lambda_minus ** (delta * N)
    decay = L * (1.0 - delta)
    needed = 1.0 / params.r + params.beta
    passed = growth > threshold and decay > needed
    return {
        "passed": bool(passed),
        "growth": growth,
        "threshold": threshold,
        "decay": decay,
        "decay_needed": needed,
        "margins": {"lambda": growth / threshold, "L": decay - needed},
    }


def lambda_sensitivity(
    M: ExpansiveMatrix,
    params: TLParams,
    L: float,
    N: int,
    delta: float,
    lambdas: Optional[Sequence[float]] = None,
) -> List[Dict[str, Any]]:
    """Re-run the molecule check over lambda_- values inside (1, min |sigma(A)|)."""
    if lambdas is None:
        top = float(np.min(np.abs(np.linalg.eigvals(M.A))))
        lambdas = np.linspace(1.0, top, 7)[1:-1]
    rows = []
    for lam in lambdas:
        result = molecule_param_check(params, L, N, delta, float(lam), M.det_a)
        rows.append({"lambda_minus": float(lam), "passed": result["passed"], "margins": result["margins"]})
    return rows


def molecule_envelope_parameters(
    params: TLParams, L: float, N: int, delta: float, lambda_minus: float, det_a: float
) -> Envelope:
    """Envelope Xi_{tau, L(1-delta)} dominating |W_f f| for a molecule with decay L and N moments."""
    growth = lambda_minus ** (N * delta)
    return Envelope(sigma=(det_a ** -0.5 / growth, det_a ** 0.5 * growth), L=L * (1.0 - delta))


def _periodic(X: np.ndarray, grid: GridSpec) -> np.ndarray:
    return np.mod(X + grid.X, 2.0 * grid.X) - grid.X


def molecule_envelope_defect(
    family: Sequence[TestSignal],
    points: Sequence[GroupElement],
    window: SpectralWindow,
    envelope: Envelope,
    amplitude: float,
    scales: Union[GridSpec, Tuple[float, float, int]],
    E: Optional[AnisotropicEllipsoid] = None,
) -> float:
    """
    max over gamma and grid points g of (|W_psi phi_gamma(g)| - Phi(gamma^-1 g))_+.

    Phi = amplitude * Xi_envelope. Spatial offsets of gamma^-1 g are taken on
    the periodic box, as the transforms are periodic.
    """
    if len(family) != len(points):
        raise ValueError(f"Got {len(family)} molecules for {len(points)} points")
    M = window.matrix
    E = _ellipsoid(M, E)
    worst = 0.0
    for phi, gamma in zip(family, points):
        W = wavelet_transform(phi, window, scales)
        X = spatial_points(W.grid)
        back = matrix_power(M, -gamma.s)
        for j, s in enumerate(W.scales):
            local = _periodic((X - gamma.x) @ back.T, W.grid)
            bound = amplitude * theta(envelope.sigma, s - gamma.s) * eta(envelope.L, local, s - gamma.s, M, E)
            excess = np.abs(W.values[j]).ravel() - bound
            worst = max(worst, float(excess.max(initial=0.0)))
    return worst


# --- decay estimates --------------------------------------------------------


def wavelet_decay_bounds_check(
    window: SpectralWindow,
    f2: TestSignal,
    L: float,
    N: int,
    scales: Union[GridSpec, Tuple[float, float, int]],
    E: Optional[AnisotropicEllipsoid] = None,
) -> Dict[str, Any]:
    """
    Fitted constants of the two decay bounds of W_{f1} f2.

    Spatial: |W| <= C |det A|^{-|s|/2} (1 + rho(A^{-s+} x))^-L.
    Scale (s >= 0): |W| <= C |det A|^{-s/2} ||A^-s||_inf^N, which needs the
    moments of f2 below order N to vanish.

    Returns:
        Dictionary with both constants, the fitted scale slope of the
        max-modulus envelope against the target -(ln|det A|)/2 - N ln lambda_-,
        the relative moment size and the overall verdict
    """
    M = window.matrix
    E = _ellipsoid(M, E)
    W = wavelet_transform(f2, window, scales)
    X = spatial_points(W.grid)
    magnitude = np.abs(W.values)
    spatial_c, scale_c = 0.0, 0.0
    peaks = []
    for j, s in enumerate(W.scales):
        rho = quasi_norm(E, M, X @ matrix_power(M, -max(s, 0.0)).T)
        profile = M.det_a ** (-abs(s) / 2.0) * (1.0 + rho) ** (-float(L))
        spatial_c = max(spatial_c, float(np.max(magnitude[j].ravel() / profile)))
        if s >= 0:
            bound = M.det_a ** (-s / 2.0) * np.linalg.norm(matrix_power(M, -s), ord=np.inf) ** N
            scale_c = max(scale_c, float(magnitude[j].max() / bound))
            peaks.append((s, float(magnitude[j].max())))

    target = -0.5 * M.log_det - N * math.log(M.lambda_minus)
    top = max((value for _, value in peaks), default=0.0)
    kept = [(s, value) for s, value in peaks if value > 1e-12 * top]
    slope = linear_fit([s for s, _ in kept], [math.log(v) for _, v in kept])["slope"] if len(kept) > 1 else 0.0
    moment = moments(f2.samples, f2.grid, order=N - 1) if N > 0 else 0.0
    moments_ok = moment < MOMENT_TOL
    return {
        "C_spatial": spatial_c,
        "C_scale": scale_c,
        "scale_slope": slope,
        "target_slope": target,
        "moments": moment,
        "moments_ok": bool(moments_ok),
        "passed": bool(moments_ok and slope <= 0.9 * target),
    }


def grafakos_estimate_check(
    M: ExpansiveMatrix,
    L: float,
    s_values: Sequence[float],
    grid: GridSpec,
    E: Optional[AnisotropicEllipsoid] = None,
) -> Dict[str, Any]:
    """
    Fitted C in int (1 + rho(y))^-L (1 + rho(A^-s (y - x)))^-L dy <= C (1 + rho(A^-s x))^-L.

    The integral is a Riemann sum over the (non-periodic) lattice of `grid`;
    only s >= 0 is meaningful.
    """
    E = _ellipsoid(M, E)
    X = spatial_points(grid)
    outer = (1.0 + quasi_norm(E, M, X)) ** (-float(L))
    per_scale = []
    for s in s_values:
        if s < 0:
            raise ValueError(f"Scales must be nonnegative, got {s}")
        back = matrix_power(M, -s)
        target = (1.0 + quasi_norm(E, M, X @ back.T)) ** (-float(L))
        ratios = []
        for x, bound in zip(X, target):
            inner = (1.0 + quasi_norm(E, M, (X - x) @ back.T)) ** (-float(L))
            ratios.append(float(np.sum(outer * inner) * grid.cell_volume) / bound)
        per_scale.append({"s": float(s), "C": max(ratios)})
    return {"C": max(row["C"] for row in per_scale), "per_scale": per_scale}
