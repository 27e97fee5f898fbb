"""
Expansive-matrix core for anisowave.

Spectral checks, continuous powers A^s = exp(sB), the unit-volume ellipsoid
Omega_A, the step homogeneous quasi-norm rho_A and its structural constants.
"""

import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from scipy.special import gamma as gamma_fn
from scipy.stats import qmc

from .errors import ConvergenceFailure, LogarithmUnavailable, SingularMatrix, ZeroVector
from .models import AnisotropicEllipsoid, ExpansiveMatrix

logger = logging.getLogger(__name__)

DET_THRESHOLD = 1e-12
MAX_SERIES_TERMS = 10_000
SERIES_TOL = 1e-12
SCALE_TOL = 1e-13
MAX_SHELL_STEPS = 500
LOG_RESIDUAL_TOL = 1e-10

ArrayLike = Union[Sequence[float], np.ndarray]


def check_expansive(A: ArrayLike) -> Dict[str, Any]:
    """
    Check whether every eigenvalue of A exceeds 1 in modulus.

    Args:
        A: Square real matrix

    Returns:
        Dictionary with expansive flag, spectral extremes and the default
        lambda_minus / lambda_plus bounds

    Raises:
        SingularMatrix: If |det A| is below 1e-12

    Example:
        >>> check_expansive([[2, 0], [0, 4]])["expansive"]
        True
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    det = abs(float(np.linalg.det(A)))
    if det < DET_THRESHOLD:
        raise SingularMatrix(f"|det A| = {det:.3e} below threshold {DET_THRESHOLD}")

    moduli = np.abs(np.linalg.eigvals(A))
    min_mod = float(moduli.min())
    max_mod = float(moduli.max())
    lambda_minus = max((min_mod + 1.0) / 2.0, 1.0 + 1e-12)
    return {
        "expansive": bool(min_mod > 1.0),
        "min_modulus": min_mod,
        "max_modulus": max_mod,
        "lambdaMinus": lambda_minus,
        "lambdaPlus": max_mod * 1.01,
        "detA": det,
    }


def principal_log(A: np.ndarray, tol: float = LOG_RESIDUAL_TOL) -> np.ndarray:
    """
    Real principal logarithm of A.

    Uses scipy's Schur-based inverse scaling-and-squaring logm.
    The result is accepted only when max|exp(B) - A| / max|A| <= tol.

    Raises:
        LogarithmUnavailable: If A has an eigenvalue on the closed negative real axis,
            or the logarithm does not reproduce A to within tol
    """
    eigenvalues = np.linalg.eigvals(A)
    for lam in eigenvalues:
        if lam.real <= 0 and abs(lam.imag) <= 1e-12 * max(1.0, abs(lam)):
            raise LogarithmUnavailable(
                f"Eigenvalue {lam.real:.6g} lies on the negative real axis; "
                "use integer_only mode for integer powers"
            )

    B = scipy.linalg.logm(A)
    if np.iscomplexobj(B):
        if np.max(np.abs(B.imag)) > 1e-10 * max(1.0, np.max(np.abs(B.real))):
            raise LogarithmUnavailable("Principal logarithm is not real")
        B = B.real

    residual = np.max(np.abs(scipy.linalg.expm(B) - A)) / np.max(np.abs(A))
    logger.debug(f"Principal logarithm residual: {residual:.3e}")
    if not residual <= tol:
        raise LogarithmUnavailable(f"Principal logarithm residual {residual:.3e} exceeds {tol:.1e}")
    return np.asarray(B, dtype=float)


def make_expansive(
    A: ArrayLike,
    lambda_minus: Optional[float] = None,
    lambda_plus: Optional[float] = None,
    integer_only: bool = False,
) -> ExpansiveMatrix:
    """
    Build an ExpansiveMatrix from a raw matrix.

    Args:
        A: Square real matrix with all eigenvalue moduli > 1
        lambda_minus: Optional bound with 1 < lambda_minus < min |sigma(A)|
        lambda_plus: Optional bound with lambda_plus > max |sigma(A)|
        integer_only: Accept matrices without a real logarithm (integer powers only)

    Returns:
        ExpansiveMatrix

    Raises:
        ValueError: If A is not expansive or the bounds are out of range
        LogarithmUnavailable: If A has a negative real eigenvalue and integer_only is False
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"Matrix must be square, got shape {A.shape}")

    info = check_expansive(A)
    if not info["expansive"]:
        raise ValueError(f"Matrix is not expansive: min |eigenvalue| = {info['min_modulus']:.6g}")

    lm = info["lambdaMinus"] if lambda_minus is None else float(lambda_minus)
    lp = info["lambdaPlus"] if lambda_plus is None else float(lambda_plus)
    if not 1.0 < lm < info["min_modulus"]:
        raise ValueError(f"lambda_minus must lie in (1, {info['min_modulus']:.6g}), got {lm}")
    if not lp > info["max_modulus"]:
        raise ValueError(f"lambda_plus must exceed {info['max_modulus']:.6g}, got {lp}")

    try:
        B: Optional[np.ndarray] = principal_log(A)
    except LogarithmUnavailable:
        if not integer_only:
            raise
        logger.warning("No real logarithm; only integer powers of A are available")
        B = None

    return ExpansiveMatrix(
        A=A, B=B, det_a=info["detA"], lambda_minus=lm, lambda_plus=lp, integer_only=integer_only
    )


def adjoint(M: ExpansiveMatrix) -> ExpansiveMatrix:
    """The transpose A* with the same spectral bounds."""
    return ExpansiveMatrix(
        A=M.A.T.copy(),
        B=None if M.B is None else M.B.T.copy(),
        det_a=M.det_a,
        lambda_minus=M.lambda_minus,
        lambda_plus=M.lambda_plus,
        integer_only=M.integer_only,
    )


def _is_integer(s: float) -> bool:
    return float(s).is_integer()


def matrix_power(M: ExpansiveMatrix, s: float) -> np.ndarray:
    """
    Continuous power A^s = exp(sB).

    Integer exponents use repeated multiplication.

    Raises:
        LogarithmUnavailable: For non-integer s when A has no real logarithm

    Example:
        >>> M = make_expansive([[2, 1], [0, 2]])
        >>> matrix_power(M, 2)
        array([[4., 4.],
               [0., 4.]])
    """
    if _is_integer(s):
        k = int(s)
        base = M.A if k >= 0 else np.linalg.inv(M.A)
        return np.linalg.matrix_power(base, abs(k))
    if M.B is None:
        raise LogarithmUnavailable(f"A^{s} needs a real logarithm; matrix is integer-only")
    return scipy.linalg.expm(s * M.B)


def matrix_powers(M: ExpansiveMatrix, s: ArrayLike) -> np.ndarray:
    """Stack of A^s for an array of exponents, shape (k, d, d)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.empty((s.size, M.dim, M.dim))
    integer = np.array([_is_integer(v) for v in s], dtype=bool)
    for idx in np.flatnonzero(integer):
        out[idx] = matrix_power(M, s[idx])
    if np.any(~integer):
        if M.B is None:
            raise LogarithmUnavailable("Non-integer powers need a real logarithm")
        out[~integer] = scipy.linalg.expm(s[~integer, None, None] * M.B[None])
    return out


def _unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2.0) / gamma_fn(d / 2.0 + 1.0)


def _series_form(A_inv: np.ndarray, r0: float) -> Tuple[np.ndarray, int]:
    d = A_inv.shape[0]
    scaled = r0 * A_inv
    power = np.eye(d)
    P = np.eye(d)
    previous = None
    for j in range(1, MAX_SERIES_TERMS + 1):
        power = scaled @ power
        term = power.T @ power
        P += term
        norm = np.linalg.norm(term, 2)
        if previous is not None and previous > 0:
            ratio = norm / previous
            if ratio < 1.0 and norm * ratio / (1.0 - ratio) < SERIES_TOL * np.linalg.norm(P, 2):
                logger.debug(f"Ellipsoid series converged after {j} terms (ratio {ratio:.4f})")
                return P, j
        previous = norm
    raise ConvergenceFailure(f"Ellipsoid series did not converge within {MAX_SERIES_TERMS} terms")


def build_ellipsoid(M: ExpansiveMatrix, method: str = "series") -> AnisotropicEllipsoid:
    """
    Build the unit-volume ellipsoid Omega_A with Omega subset r*Omega subset A*Omega.

    P = sum_j r0^{2j} (A^-j)^T A^-j with r0 = (1 + lambda_minus)/2, normalized to
    det P = 1. The same form solves the discrete Lyapunov equation
    P = I + r0^2 A^-T P A^-1, which ``method="lyapunov"`` hands to scipy.

    Args:
        M: Expansive matrix
        method: "series" (explicit sum with tail control) or "lyapunov"

    Returns:
        AnisotropicEllipsoid with certified contraction factor r

    Raises:
        ConvergenceFailure: If the series needs more than 10_000 terms
        ValueError: For an unknown method
    """
    d = M.dim
    A_inv = np.linalg.inv(M.A)
    r0 = (1.0 + M.lambda_minus) / 2.0

    if method == "series":
        P, terms = _series_form(A_inv, r0)
    elif method == "lyapunov":
        P = scipy.linalg.solve_discrete_lyapunov(r0 * A_inv.T, np.eye(d))
        terms = 0
    else:
        raise ValueError(f"Unsupported ellipsoid method: {method}")

    P = 0.5 * (P + P.T)
    P = P / np.linalg.det(P) ** (1.0 / d)

    contraction = scipy.linalg.eigh(A_inv.T @ P @ A_inv, P, eigvals_only=True)
    r = 1.0 / math.sqrt(float(np.max(contraction)))

    omega = _unit_ball_volume(d)
    c = omega ** (-1.0 / d)
    volume = c ** d * omega / math.sqrt(np.linalg.det(P))

    monotone = True
    if M.B is not None:
        rate = P @ M.B + M.B.T @ P
        monotone = bool(np.min(np.linalg.eigvalsh(0.5 * (rate + rate.T))) > 0)
        if not monotone:
            logger.warning("P-norm is not monotone along continuous powers; scale solves use brackets")

    logger.info(f"Built ellipsoid: d={d}, r={r:.6f}, c={c:.6f}, terms={terms}")
    return AnisotropicEllipsoid(P=P, c=c, r=r, volume=volume, terms=terms, monotone=monotone)


def p_norm(E: AnisotropicEllipsoid, X: np.ndarray) -> np.ndarray:
    """||x||_P for rows of X."""
    X = np.atleast_2d(X)
    return np.sqrt(np.maximum(np.einsum("ni,ij,nj->n", X, E.P, X), 0.0))


def _as_points(M: ExpansiveMatrix, x: ArrayLike) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 0 or (x.ndim == 1 and x.size == M.dim)
    X = np.atleast_2d(x).reshape(-1, M.dim)
    return X, single


def _apply_integer_powers(M: ExpansiveMatrix, exponents: np.ndarray, X: np.ndarray) -> np.ndarray:
    out = np.empty_like(X)
    for k in np.unique(exponents):
        mask = exponents == k
        out[mask] = X[mask] @ matrix_power(M, float(k)).T
    return out


def _shells(E: AnisotropicEllipsoid, M: ExpansiveMatrix, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    norms = p_norm(E, X)
    nonzero = norms > 0
    j = np.zeros(X.shape[0], dtype=np.int64)
    if not np.any(nonzero):
        return j, nonzero

    base = math.log(M.det_a) / M.dim
    j[nonzero] = np.floor(np.log(norms[nonzero] / E.c) / base).astype(np.int64)
    active = np.flatnonzero(nonzero)
    for _ in range(MAX_SHELL_STEPS):
        Xa = X[active]
        ja = j[active]
        inner = p_norm(E, _apply_integer_powers(M, -ja, Xa)) >= E.c
        outer = p_norm(E, _apply_integer_powers(M, -(ja + 1), Xa)) < E.c
        j[active[~inner]] -= 1
        j[active[inner & ~outer]] += 1
        active = active[~(inner & outer)]
        if active.size == 0:
            return j, nonzero
    raise ConvergenceFailure("Shell search did not settle; is the ellipsoid contraction certified?")


def shell_index(E: AnisotropicEllipsoid, M: ExpansiveMatrix, x: ArrayLike) -> np.ndarray:
    """
    Integer j with x in A^{j+1} Omega minus A^j Omega.

    Returns the minimum int64 value for x = 0.
    """
    X, single = _as_points(M, x)
    j, nonzero = _shells(E, M, X)
    j = np.where(nonzero, j, np.iinfo(np.int64).min)
    return j[0] if single else j


def quasi_norm(E: AnisotropicEllipsoid, M: ExpansiveMatrix, x: ArrayLike) -> Union[float, np.ndarray]:
    """
    Step homogeneous quasi-norm rho_A.

    rho_A(x) = |det A|^j for x in A^{j+1} Omega minus A^j Omega and rho_A(0) = 0.

    Args:
        E: Ellipsoid of A
        M: Expansive matrix
        x: Point of shape (d,) or array of points of shape (N, d)

    Returns:
        Float for a single point, array of shape (N,) otherwise

    Example:
        >>> M = make_expansive([[2, 0], [0, 2]])
        >>> E = build_ellipsoid(M)
        >>> quasi_norm(E, M, [0.0, 0.0])
        0.0
    """
    X, single = _as_points(M, x)
    j, nonzero = _shells(E, M, X)
    rho = np.where(nonzero, M.det_a ** j.astype(float), 0.0)
    return float(rho[0]) if single else rho


def continuous_scale(E: AnisotropicEllipsoid, M: ExpansiveMatrix, x: ArrayLike) -> Union[float, np.ndarray]:
    """
    Continuous scale coordinate: the real t with ||A^-t x||_P = c.

    The integer shell brackets t in [j, j+1); a safeguarded Newton iteration
    then solves for the fractional part. Satisfies t(A^u x) = t(x) + u.

    Raises:
        ZeroVector: If any point is zero
        LogarithmUnavailable: If A has no real logarithm
    """
    X, single = _as_points(M, x)
    if M.B is None:
        raise LogarithmUnavailable("Continuous scale needs a real logarithm")
    j, nonzero = _shells(E, M, X)
    if not np.all(nonzero):
        raise ZeroVector("Continuous scale is undefined at x = 0")

    Y = _apply_integer_powers(M, -j, X)
    log_c = math.log(E.c)
    PB = E.P @ M.B
    lo = np.zeros(len(X))
    hi = np.ones(len(X))
    f_lo = np.log(p_norm(E, Y)) - log_c
    f_hi = np.log(p_norm(E, Y @ matrix_power(M, -1.0).T)) - log_c
    tau = np.clip(f_lo / np.where(f_lo - f_hi > 0, f_lo - f_hi, 1.0), 0.0, 1.0)

    for iteration in range(100):
        Z = np.einsum("nij,nj->ni", scipy.linalg.expm(-tau[:, None, None] * M.B[None]), Y)
        quad = np.einsum("ni,ij,nj->n", Z, E.P, Z)
        value = 0.5 * np.log(quad) - log_c
        slope = -np.einsum("ni,ij,nj->n", Z, PB, Z) / quad
        lo = np.where(value >= 0, tau, lo)
        hi = np.where(value < 0, tau, hi)
        if np.all(np.abs(value) < SCALE_TOL) or np.all(hi - lo < SCALE_TOL):
            logger.debug(f"Scale solve converged in {iteration + 1} iterations")
            break
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = tau - value / slope
        safe = (slope < 0) & (newton > lo) & (newton < hi)
        tau = np.where(np.abs(value) < SCALE_TOL, tau, np.where(safe, newton, 0.5 * (lo + hi)))

    t = j.astype(float) + tau
    return float(t[0]) if single else t


def _sobol(dim: int, count: int, seed: int) -> np.ndarray:
    sampler = qmc.Sobol(d=dim, scramble=True, seed=seed)
    return sampler.random_base2(m=int(math.ceil(math.log2(count))))


def _annulus_samples(M: ExpansiveMatrix, unit: np.ndarray, shell_u: np.ndarray, j_range: int) -> np.ndarray:
    box = 2.0 * unit - 1.0
    box[np.all(box == 0, axis=1)] = 0.5
    shells = np.floor(shell_u * (2 * j_range + 1)).astype(np.int64) - j_range
    return _apply_integer_powers(M, shells, box)


def _constants_from(E, M, u: np.ndarray) -> Dict[str, float]:
    d = M.dim
    x = _annulus_samples(M, u[:, :d], u[:, 2 * d], 3)
    y = _annulus_samples(M, u[:, d:2 * d], u[:, 2 * d + 1], 3)
    s = 6.0 * u[:, 2 * d + 2] - 3.0

    rho_x = quasi_norm(E, M, x)
    rho_y = quasi_norm(E, M, y)
    rho_sum = quasi_norm(E, M, x + y)
    c_triangle = max(1.0, float(np.max(rho_sum / (rho_x + rho_y))))

    powers = matrix_powers(M, s)
    As_x = np.einsum("nij,nj->ni", powers, x)
    norm_x = np.linalg.norm(x, axis=1)
    norm_As = np.linalg.norm(As_x, axis=1)
    lower = np.where(s >= 0, M.lambda_minus ** s, M.lambda_plus ** s) * norm_x / norm_As
    upper = norm_As / (np.where(s >= 0, M.lambda_plus ** s, M.lambda_minus ** s) * norm_x)
    c_power = float(max(np.max(lower), np.max(upper)))

    homog = quasi_norm(E, M, As_x) / (M.det_a ** s * rho_x)
    c_homog = float(max(np.max(homog), np.max(1.0 / homog)))
    return {"C_triangle": c_triangle, "C_power": c_power, "C_homog": c_homog}


def structural_constants(
    E: AnisotropicEllipsoid, M: ExpansiveMatrix, sample_count: int = 1024, seed: int = 0
) -> Dict[str, Any]:
    """
    Empirical suprema of the quasi-triangle, continuous-power and homogeneity ratios.

    Samples come from a scrambled Sobol sequence; the run is repeated with twice
    the samples (a superset) and the relative drift is reported.

    Args:
        E: Ellipsoid
        M: Expansive matrix
        sample_count: Number of samples (>= 1000)
        seed: Sobol scrambling seed

    Returns:
        Dictionary with C_triangle, C_power, C_homog, samples and per-constant drift

    Raises:
        ValueError: If sample_count < 1000
    """
    if sample_count < 1000:
        raise ValueError(f"sample_count must be >= 1000, got {sample_count}")
    dims = 2 * M.dim + 3
    u = _sobol(dims, 2 * sample_count, seed)
    half = u[: len(u) // 2]
    base = _constants_from(E, M, half)
    doubled = _constants_from(E, M, u)
    drift = {k: abs(doubled[k] - base[k]) / base[k] for k in base}
    logger.info(f"Structural constants: {doubled} (drift {max(drift.values()):.3%})")
    return {**doubled, "samples": len(u), "drift": drift}


def quasi_norm_bounds(
    E: AnisotropicEllipsoid, M: ExpansiveMatrix, sample_count: int = 2048, seed: int = 1
) -> Dict[str, Any]:
    """
    Fit one constant C with rho^zeta_minus / C <= |x| <= C rho^zeta_plus for rho >= 1
    and rho^zeta_plus / C <= |x| <= C rho^zeta_minus for rho <= 1.

    Shells j in [-6, 6] are sampled; the constant fitted on the first half of the
    samples is reported next to the full-sample constant.
    """
    d = M.dim
    u = _sobol(d + 1, sample_count, seed)
    x = _annulus_samples(M, u[:, :d], u[:, d], 6)
    rho = quasi_norm(E, M, x)
    norm = np.linalg.norm(x, axis=1)
    big = rho >= 1
    ratios = np.concatenate([
        norm[big] / rho[big] ** M.zeta_plus,
        rho[big] ** M.zeta_minus / norm[big],
        norm[~big] / rho[~big] ** M.zeta_minus,
        rho[~big] ** M.zeta_plus / norm[~big],
    ])
    half = len(x) // 2
    first = np.concatenate([
        norm[:half][big[:half]] / rho[:half][big[:half]] ** M.zeta_plus,
        rho[:half][big[:half]] ** M.zeta_minus / norm[:half][big[:half]],
        norm[:half][~big[:half]] / rho[:half][~big[:half]] ** M.zeta_minus,
        rho[:half][~big[:half]] ** M.zeta_plus / norm[:half][~big[:half]],
    ])
    C = float(np.max(ratios))
    C_half = float(np.max(first))
    return {"C": C, "C_half": C_half, "drift": abs(C - C_half) / C_half, "samples": len(x)}


def _certify(terms: np.ndarray) -> Dict[str, Any]:
    partial = np.cumsum(terms)
    ratios = terms[1:] / terms[:-1]
    tail_ratio = float(np.max(ratios[-5:])) if ratios.size else 0.0
    converged = bool(tail_ratio < 1.0 - 1e-9 and terms[-1] < 1e-6 * max(partial[-1], 1e-300))
    return {"partial_sums": partial.tolist(), "tail_ratio": tail_ratio, "cauchy": converged}


def integrability_partial_sums(
    M: ExpansiveMatrix, eps: float, shells: Optional[int] = None
) -> Dict[str, Any]:
    """
    Shell sums for int rho^{-1-eps} over {rho >= 1} and int rho^{eps-1} over Omega.

    rho is constant |det A|^j on shell j, whose volume is |det A|^j (|det A| - 1),
    so both integrals are exact geometric series in the shell index.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    a = M.det_a
    if shells is None:
        # enough shells for the geometric tail to drop below 1e-9
        shells = max(20, int(math.ceil(math.log(1e-9) / (-eps * math.log(a)))) + 5)
    outer_j = np.arange(shells, dtype=float)
    inner_j = -np.arange(1, shells + 1, dtype=float)
    outer = a ** (outer_j * (-1.0 - eps)) * a ** outer_j * (a - 1.0)
    inner = a ** (inner_j * (eps - 1.0)) * a ** inner_j * (a - 1.0)
    return {"eps": eps, "outer": _certify(outer), "inner": _certify(inner)}


def shell_volume_estimate(
    E: AnisotropicEllipsoid, M: ExpansiveMatrix, samples: int = 1 << 14, seed: int = 2
) -> Dict[str, float]:
    """Quasi-Monte Carlo volumes of Omega and of the shell A Omega minus Omega."""
    d = M.dim
    # bounding box of A Omega: |x_i| <= c * sqrt((A P^-1 A^T)_ii)
    P_inv = np.linalg.inv(E.P)
    half = E.c * np.sqrt(np.diag(M.A @ P_inv @ M.A.T))
    u = _sobol(d, samples, seed)
    x = (2.0 * u - 1.0) * half
    rho = quasi_norm(E, M, x)
    box = float(np.prod(2.0 * half))
    return {
        "omega": box * float(np.mean(rho < 1.0)),
        "shell": box * float(np.mean(rho == 1.0)),
        "expected_shell": M.det_a - 1.0,
    }


def quasi_norm_table(E: AnisotropicEllipsoid, M: ExpansiveMatrix, points: ArrayLike) -> List[Dict[str, Any]]:
    """Rows (x, rho_A(x), continuous scale, shell index) for the CLI table."""
    X = np.atleast_2d(np.asarray(points, dtype=float)).reshape(-1, M.dim)
    rho = quasi_norm(E, M, X)
    rows = []
    for x, r in zip(X, rho):
        if r == 0:
            rows.append({"x": x.tolist(), "rho": 0.0, "scale": None, "shell": None})
            continue
        t = continuous_scale(E, M, x) if M.B is not None else None
        rows.append({
            "x": x.tolist(),
            "rho": float(r),
            "scale": t,
            "shell": int(shell_index(E, M, x)),
        })
    return rows
