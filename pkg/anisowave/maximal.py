"""
Anisotropic maximal operators for anisowave.

Hardy-Littlewood averages over rho_A-balls y + A^j Omega, Peetre-type
maximal functions on scale slices, local maximal functions on G_A and the
maximal-function inequalities as executable checks. All spatial work is on
the periodic lattice of a GridSpec.
"""

import logging
import math
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.fft
from scipy import ndimage

from .anisotropy import build_ellipsoid, matrix_power, quasi_norm
from .errors import EmptyBallRange, GridMismatch
from .models import (
    Q_INFINITY_THRESHOLD,
    AnisotropicEllipsoid,
    ExpansiveMatrix,
    GridSpec,
    GroupField,
    MaximalConfig,
    QBox,
)
from .utils import interpolate, lattice_offsets, map_ordered, offset_indices, spatial_points

logger = logging.getLogger(__name__)

MAXIMAL_KINDS = ("hl", "peetre", "local")


def _ellipsoid(M: ExpansiveMatrix, E: Optional[AnisotropicEllipsoid]) -> AnisotropicEllipsoid:
    return E if E is not None else build_ellipsoid(M)


def offset_quasi_norms(grid: GridSpec, M: ExpansiveMatrix, E: Optional[AnisotropicEllipsoid] = None,
                       s: float = 0.0, frame: Optional[np.ndarray] = None) -> np.ndarray:
    """rho_A(A^s T z) for every periodic lattice offset z, in FFT order (spatial shape); T is the frame."""
    E = _ellipsoid(M, E)
    Z = lattice_offsets(grid)
    if frame is not None:
        Z = Z @ np.asarray(frame, dtype=float).T
    if s != 0:
        Z = Z @ matrix_power(M, s).T
    return np.asarray(quasi_norm(E, M, Z)).reshape(grid.spatial_shape)


def default_ball_range(
    grid: GridSpec, M: ExpansiveMatrix, E: Optional[AnisotropicEllipsoid] = None
) -> Tuple[int, int]:
    """
    Ball levels from the center-only ball to the ball holding every offset.

    The level-j ball A^j Omega holds the offsets with rho_A(z) <= |det A|^(j-1).
    """
    rho = offset_quasi_norms(grid, M, E).ravel()
    levels = np.round(np.log(rho[rho > 0]) / M.log_det).astype(int)
    return int(levels.min()), int(levels.max()) + 1


def ball_masks(grid: GridSpec, M: ExpansiveMatrix, E: Optional[AnisotropicEllipsoid] = None,
               cfg: Optional[MaximalConfig] = None) -> List[Tuple[int, np.ndarray]]:
    """Boolean offset masks (FFT order) of the balls A^j Omega for every level in range."""
    cfg = cfg or MaximalConfig()
    j_lo, j_hi = default_ball_range(grid, M, E)
    j_min = j_lo if cfg.j_min is None else cfg.j_min
    j_max = j_hi if cfg.j_max is None else cfg.j_max
    if j_min > j_max:
        raise EmptyBallRange(f"Ball range [{j_min}, {j_max}] is empty")
    rho = offset_quasi_norms(grid, M, E)
    zero = np.zeros(grid.spatial_shape, dtype=bool)
    zero[(0,) * grid.d] = True
    return [(j, (rho <= M.det_a ** (j - 1)) | zero) for j in range(j_min, j_max + 1)]


def _footprint(mask: np.ndarray, grid: GridSpec) -> np.ndarray:
    idx = offset_indices(grid)[mask.ravel()]
    reach = np.abs(idx).max(axis=0) if idx.size else np.zeros(grid.d, dtype=int)
    fp = np.zeros(tuple(2 * reach + 1), dtype=bool)
    fp[tuple((idx + reach).T)] = True
    return fp


def _ball_average(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    kernel = scipy.fft.fftn(mask.astype(float))
    avg = scipy.fft.ifftn(scipy.fft.fftn(values) * np.conj(kernel)).real
    return avg / np.count_nonzero(mask)


def hl_maximal(
    f: np.ndarray,
    grid: GridSpec,
    M: ExpansiveMatrix,
    E: Optional[AnisotropicEllipsoid] = None,
    cfg: Optional[MaximalConfig] = None,
) -> np.ndarray:
    """
    Anisotropic Hardy-Littlewood maximal function on the periodic lattice.

    Mf(x) is the largest average of |f| over lattice balls y + A^j Omega that
    contain x (or are centered at x when cfg.centered).

    Args:
        f: Samples, spatial shape
        grid: Spatial grid
        M: Expansive matrix
        E: Ellipsoid of A (built if omitted)
        cfg: Ball range and centering

    Returns:
        Array of Mf, spatial shape

    Raises:
        EmptyBallRange: If the configured range is empty
    """
    cfg = cfg or MaximalConfig()
    E = _ellipsoid(M, E)
    values = np.abs(np.asarray(f)).reshape(grid.spatial_shape)
    masks = ball_masks(grid, M, E, cfg)

    def level(item: Tuple[int, np.ndarray]) -> np.ndarray:
        _, mask = item
        avg = _ball_average(values, mask)
        if cfg.centered:
            return avg
        # balls containing x are centered at x - z for z in the (symmetric) ball
        return ndimage.maximum_filter(avg, footprint=_footprint(mask, grid), mode="wrap")

    result = np.maximum.reduce(map_ordered(level, masks))
    return np.maximum(result, values)


def dilation_commutation_defect(
    f: Callable[[np.ndarray], np.ndarray],
    j: int,
    grid: GridSpec,
    M: ExpansiveMatrix,
    E: Optional[AnisotropicEllipsoid] = None,
    cfg: Optional[MaximalConfig] = None,
) -> float:
    """
    Relative sup defect of M[f o A^j] = [Mf] o A^j.

    Both maximal functions are computed on the grid; [Mf] is evaluated at
    A^j x by interpolation, and only points with A^j x in the inner half of
    the box are compared.

    Args:
        f: Function of points (N, d) -> (N,)
        j: Integer dilation exponent
    """
    if j == 0:
        return 0.0
    E = _ellipsoid(M, E)
    X = spatial_points(grid)
    Aj = matrix_power(M, float(j))
    lhs = hl_maximal(f(X @ Aj.T).reshape(grid.spatial_shape), grid, M, E, cfg).ravel()
    Mf = hl_maximal(f(X).reshape(grid.spatial_shape), grid, M, E, cfg)
    moved = X @ Aj.T
    inner = np.all(np.abs(moved) <= 0.5 * grid.X, axis=1)
    coords = ((moved[inner] + grid.X) / grid.step).T
    rhs = interpolate(Mf, coords, order=1)
    scale = np.abs(lhs[inner]).max() if np.any(inner) else 0.0
    if scale == 0:
        return 0.0
    defect = float(np.max(np.abs(lhs[inner] - rhs)) / scale)
    logger.debug(f"Dilation commutation defect for j={j}: {defect:.3e}")
    return defect


def peetre_maximal(
    slice_values: np.ndarray,
    grid: GridSpec,
    s: float,
    beta: float,
    M: ExpansiveMatrix,
    E: Optional[AnisotropicEllipsoid] = None,
    pruned: bool = False,
    prune_ratio: float = 1e-6,
    frame: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Peetre-type maximal function max_z |F(x + z)| / (1 + rho_A(A^s z))^beta.

    Offsets are visited by decreasing weight; the scan stops once no
    remaining offset can raise the running minimum, so the result is the
    exact maximum over all periodic lattice offsets. In pruned mode offsets
    with weight below prune_ratio are skipped as well.

    Args:
        slice_values: One scale slice of f * phi_s, spatial shape
        grid: Spatial grid
        s: Dilation exponent in the weight
        beta: Peetre exponent (> 0)
        M: Expansive matrix
        E: Ellipsoid of A
        frame: Linear map taking lattice offsets to physical offsets

    Returns:
        Array of the maximal function, spatial shape
    """
    if beta <= 0:
        raise ValueError(f"Peetre exponent must be positive, got {beta}")
    values = np.abs(np.asarray(slice_values)).reshape(grid.spatial_shape)
    weights = (1.0 + offset_quasi_norms(grid, M, E, s, frame)).ravel() ** (-beta)
    shifts = offset_indices(grid)
    order = np.argsort(-weights, kind="stable")
    peak = values.max()
    result = values.copy()
    axes = tuple(range(grid.d))
    for k in order:
        w = weights[k]
        if pruned and w < prune_ratio:
            break
        if w * peak <= result.min():
            break
        if not np.any(shifts[k]):
            continue
        np.maximum(result, w * np.roll(values, tuple(-shifts[k]), axis=axes), out=result)
    return result


def peetre_inequality_constant(
    slice_values: np.ndarray,
    grid: GridSpec,
    s: float,
    beta: float,
    M: ExpansiveMatrix,
    E: Optional[AnisotropicEllipsoid] = None,
    cfg: Optional[MaximalConfig] = None,
) -> float:
    """Fitted C in phi** f <= C [M |f * phi_s|^(1/beta)]^beta over the grid."""
    cfg = cfg or MaximalConfig()
    E = _ellipsoid(M, E)
    values = np.abs(np.asarray(slice_values)).reshape(grid.spatial_shape)
    star = peetre_maximal(values, grid, s, beta, M, E, pruned=cfg.pruned, prune_ratio=cfg.prune_ratio)
    majorant = hl_maximal(values ** (1.0 / beta), grid, M, E, cfg) ** beta
    positive = majorant > 0
    if not np.any(positive):
        return 0.0
    return float(np.max(star[positive] / majorant[positive]))


def _box_samples(half_width: float, step: float) -> np.ndarray:
    if half_width <= 0 or step <= 0:
        return np.zeros(1)
    count = int(math.floor(half_width / step + 1e-9))
    return step * np.arange(-count, count + 1)


def _scale_shifts(box: QBox, grid: GridSpec) -> np.ndarray:
    """Scale offsets of the box as integer multiples of the grid's scale step."""
    if grid.m == 1 or box.half_width <= 0:
        return np.zeros(1, dtype=int)
    ratio = max(1, int(round(box.scale_step / grid.scale_step)))
    reach = int(math.floor(box.half_width / grid.scale_step + 1e-9))
    return np.arange(-(reach // ratio) * ratio, reach + 1, ratio)


def local_maximal(F: GroupField, M: ExpansiveMatrix, box: Optional[QBox] = None, side: str = "two") -> GroupField:
    """
    Local maximal function on G_A.

    Two-sided: M_Q F(g) = max over u, v in Q of |F(u g v)|; left: max over
    u in Q of |F(g u)|. With u = (b, tau), g = (x, s), v = (y, sigma),
    u g v = (b + A^tau (x + A^s y), s + tau + sigma). The max over b is an
    exact lattice max-filter; the remaining points are interpolated.

    Args:
        F: Field on the standard lattice
        M: Expansive matrix
        box: Neighborhood Q (default [-1, 1]^d x [-1, 1])
        side: "two" or "left"

    Returns:
        GroupField of the maximal function
    """
    if side not in ("two", "left"):
        raise ValueError(f"Unknown side: {side}")
    box = box or QBox()
    grid = F.grid
    magnitude = np.abs(F.values)
    points = spatial_points(grid)
    ds = grid.scale_step
    offsets_1d = _box_samples(box.half_width, box.spatial_step)
    Y = np.array(np.meshgrid(*([offsets_1d] * grid.d), indexing="ij")).reshape(grid.d, -1).T
    shifts = _scale_shifts(box, grid)

    if side == "two":
        reach = int(math.floor(box.half_width / grid.step + 1e-9))
        footprint = np.ones((2 * reach + 1,) * grid.d, dtype=bool)
        filtered = np.stack([ndimage.maximum_filter(mag, footprint=footprint, mode="constant", cval=0.0)
                             for mag in magnitude])
        taus = shifts
    else:
        filtered = magnitude
        taus = np.zeros(1, dtype=int)

    def output_slice(j: int) -> np.ndarray:
        s = grid.scales[j]
        out = magnitude[j].copy()
        for tau in taus:
            A_tau = matrix_power(M, tau * ds)
            for sigma in shifts:
                k = j + tau + sigma
                if k < 0 or k >= grid.m:
                    continue
                for y in Y @ matrix_power(M, s).T:
                    moved = (points + y) @ A_tau.T
                    coords = ((moved + grid.X) / grid.step).T
                    vals = interpolate(filtered[k], coords, order=1).reshape(grid.spatial_shape)
                    np.maximum(out, vals, out=out)
        return out

    values = np.stack(map_ordered(output_slice, range(grid.m)))
    logger.debug(f"Local maximal function ({side}-sided) on {grid.shape}")
    return GroupField(grid=grid, values=values, interpolated=True)


def maximal_field(
    F: GroupField,
    kind: str,
    M: ExpansiveMatrix,
    cfg: Optional[MaximalConfig] = None,
    E: Optional[AnisotropicEllipsoid] = None,
) -> GroupField:
    """
    Apply one maximal operator to a field on G_A.

    Kinds:
        hl: Hardy-Littlewood maximal function of every slice over cfg's ball range
        peetre: Peetre-type maximal function of every slice with exponent
            cfg.beta and weight (1 + rho_A(A^-s z))^-beta, honoring cfg.pruned
        local: two-sided local maximal function over the box cfg.box

    Args:
        F: Field on the standard lattice
        kind: One of MAXIMAL_KINDS
        M: Expansive matrix
        cfg: Operator settings (defaults to MaximalConfig())
        E: Ellipsoid of A

    Returns:
        GroupField of the maximal function on F's grid

    Raises:
        ValueError: For an unknown kind
        GridMismatch: If F is not on its grid's own lattice
    """
    if kind not in MAXIMAL_KINDS:
        raise ValueError(f"Unknown maximal operator {kind!r}; expected one of {', '.join(MAXIMAL_KINDS)}")
    if not F.is_standard:
        raise GridMismatch("Maximal operators need a field on the standard lattice")
    cfg = cfg or MaximalConfig()
    if kind == "local":
        return local_maximal(F, M, cfg.box)

    E = _ellipsoid(M, E)
    grid = F.grid
    slices = []
    for values, s in zip(F.values, F.scales):
        if kind == "hl":
            slices.append(hl_maximal(values, grid, M, E, cfg))
        else:
            slices.append(peetre_maximal(values, grid, -s, cfg.beta, M, E,
                                         pruned=cfg.pruned, prune_ratio=cfg.prune_ratio))
    logger.debug(f"{kind} maximal function on {grid.shape}")
    return GroupField(grid=grid, values=np.stack(slices), interpolated=F.interpolated)


def local_envelope_constant(F: GroupField, M: ExpansiveMatrix, box: Optional[QBox] = None,
                            floor: float = 1e-12) -> float:
    """Fitted C in M_Q F <= C F over samples where F is above floor * max F."""
    maximal = local_maximal(F, M, box)
    base = np.abs(F.values)
    keep = base > floor * base.max()
    return float(np.max(maximal.values.real[keep] / base[keep])) if np.any(keep) else 0.0


def majorant_check(
    f: np.ndarray,
    g: np.ndarray,
    theta: np.ndarray,
    grid: GridSpec,
    M: ExpansiveMatrix,
    E: Optional[AnisotropicEllipsoid] = None,
    cfg: Optional[MaximalConfig] = None,
) -> Dict[str, float]:
    """
    Check |f * g| <= ||Theta||_1 Mf for |g| <= Theta radially decreasing in rho_A.

    g and Theta are sampled on the grid's lattice (origin at index n/2).

    Returns:
        Dictionary with the largest excess and the excess relative to ||f||_inf
    """
    f = np.asarray(f).reshape(grid.spatial_shape)
    kernel = scipy.fft.ifftshift(np.asarray(g).reshape(grid.spatial_shape))
    conv = grid.cell_volume * scipy.fft.ifftn(scipy.fft.fftn(f) * scipy.fft.fftn(kernel))
    theta_l1 = float(np.sum(np.abs(theta)) * grid.cell_volume)
    bound = theta_l1 * hl_maximal(f, grid, M, E, cfg)
    excess = float(np.max(np.abs(conv) - bound))
    sup = float(np.abs(f).max())
    return {
        "excess": excess,
        "relative": excess / sup if sup > 0 else 0.0,
        "theta_l1": theta_l1,
    }


def _vector_norm(family: Sequence[np.ndarray], p: float, q: float, cell: float) -> float:
    stack = np.abs(np.stack([np.asarray(f).ravel() for f in family]))
    if math.isinf(q) or q >= Q_INFINITY_THRESHOLD:
        inner = stack.max(axis=0)
    else:
        inner = np.sum(stack ** q, axis=0) ** (1.0 / q)
    return float(np.sum(inner ** p * cell) ** (1.0 / p))


def fefferman_stein_monitor(
    family: Sequence[np.ndarray],
    p: float,
    q: float,
    grid: GridSpec,
    M: ExpansiveMatrix,
    E: Optional[AnisotropicEllipsoid] = None,
    cfg: Optional[MaximalConfig] = None,
) -> float:
    """
    Ratio ||(sum (M f_i)^q)^(1/q)||_p / ||(sum |f_i|^q)^(1/q)||_p.

    Raises:
        ValueError: Unless 1 < p < inf and 1 < q <= inf
    """
    if not (1 < p < math.inf) or not q > 1:
        raise ValueError(f"Fefferman-Stein needs 1 < p < inf and 1 < q <= inf, got p={p}, q={q}")
    E = _ellipsoid(M, E)
    maximal = map_ordered(lambda f: hl_maximal(f, grid, M, E, cfg), family)
    bottom = _vector_norm(family, p, q, grid.cell_volume)
    if bottom == 0:
        return 0.0
    ratio = _vector_norm(maximal, p, q, grid.cell_volume) / bottom
    logger.info(f"Fefferman-Stein ratio (p={p}, q={q}, {len(family)} functions): {ratio:.4f}")
    return ratio


def pointwise_indicator_check(
    M: ExpansiveMatrix,
    ell: int,
    z: np.ndarray,
    beta: float,
    grid: GridSpec,
    E: Optional[AnisotropicEllipsoid] = None,
    nodes: int = 8,
) -> Dict[str, float]:
    """
    Fitted C in (1 + rho(A^l x - z))^-beta <= C (1_K * |det A|^l (1 + rho(A^l .))^-beta)(x).

    K = A^-l([0, 1)^d + z); after substituting u = A^l y the right side is the
    cube average of (1 + rho(A^l x - u))^-beta over u in [0, 1)^d + z,
    evaluated with a midpoint rule.
    """
    E = _ellipsoid(M, E)
    z = np.asarray(z, dtype=float)
    X = spatial_points(grid) @ matrix_power(M, float(ell)).T
    mids = (np.arange(nodes) + 0.5) / nodes
    cube = np.array(np.meshgrid(*([mids] * grid.d), indexing="ij")).reshape(grid.d, -1).T + z
    lhs = (1.0 + quasi_norm(E, M, X - z)) ** (-beta)
    rhs = np.zeros(X.shape[0])
    for u in cube:
        rhs += (1.0 + quasi_norm(E, M, X - u)) ** (-beta)
    rhs /= len(cube)
    C = float(np.max(lhs / rhs))
    return {"C": C, "ell": ell, "beta": beta}


def group_maximal_check(
    F: GroupField,
    beta: float,
    M: ExpansiveMatrix,
    E: Optional[AnisotropicEllipsoid] = None,
    samples: int = 64,
    seed: int = 0,
) -> Dict[str, Any]:
    """
    Fitted C in |F(x + w, s)| <= C (F**)_beta(x, s) (1 + rho(A^-s w))^beta.

    (F**)_beta(x, s) = max_z |F(x + z, s)| / (1 + rho(A^-s z))^beta on the
    lattice; the inequality is checked for a seeded sample of offsets w.
    """
    E = _ellipsoid(M, E)
    grid = F.grid
    rng = np.random.default_rng(seed)
    shifts = offset_indices(grid)
    picks = rng.choice(len(shifts), size=min(samples, len(shifts)), replace=False)
    axes = tuple(range(grid.d))
    worst = 0.0
    for j, s in enumerate(F.scales):
        values = np.abs(F.values[j])
        star = peetre_maximal(values, grid, -s, beta, M, E)
        weights = (1.0 + offset_quasi_norms(grid, M, E, -s)).ravel() ** beta
        positive = star > 0
        for k in picks:
            moved = np.roll(values, tuple(-shifts[k]), axis=axes)
            ratio = moved[positive] / (star[positive] * weights[k])
            if ratio.size:
                worst = max(worst, float(ratio.max()))
    return {"C": worst, "offsets": int(len(picks)), "beta": beta}
