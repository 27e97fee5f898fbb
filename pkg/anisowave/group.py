"""
The affine group G_A = R^d x_A R for anisowave.

Group law (x, s)(y, t) = (x + A^s y, s + t), left Haar measure
|det A|^-s ds dx, modular function |det A|^-s, left/right translations and
Haar-weighted convolution of sampled fields, plus the GAF1 binary format.
"""

import csv
import logging
import struct
from typing import List, Optional, Union

import numpy as np
import scipy.fft

from .anisotropy import matrix_power
from .errors import GridMismatch
from .models import ExpansiveMatrix, GridSpec, GroupElement, GroupField
from .utils import interpolate, lattice_offsets, map_ordered, spatial_points

logger = logging.getLogger(__name__)

GAF_MAGIC = b"GAF1"
_GAF_HEADER = struct.Struct("<4sqqdqdd")


def identity(d: int) -> GroupElement:
    return GroupElement(np.zeros(d), 0.0)


def multiply(g: GroupElement, h: GroupElement, M: ExpansiveMatrix) -> GroupElement:
    """
    Group product (x, s)(y, t) = (x + A^s y, s + t).

    Example:
        >>> M = make_expansive([[2, 0], [0, 4]])
        >>> multiply(GroupElement([0, 0], 1), GroupElement([1, 1], 0), M).x
        array([2., 4.])
    """
    return GroupElement(g.x + matrix_power(M, g.s) @ h.x, g.s + h.s)


def invert(g: GroupElement, M: ExpansiveMatrix) -> GroupElement:
    """Inverse (x, s)^-1 = (-A^-s x, -s)."""
    return GroupElement(-(matrix_power(M, -g.s) @ g.x), -g.s)


def modular(g: GroupElement, M: ExpansiveMatrix) -> float:
    """Modular function Delta(x, s) = |det A|^-s."""
    return M.det_a ** (-g.s)


def scale_weights(grid: GridSpec, M: ExpansiveMatrix, offset: float = 0.0) -> np.ndarray:
    """
    Exact integrals of |det A|^-s ds over the cell of each scale sample.

    Cells are bounded by midpoints between samples and by the scale box ends,
    so the weights sum to the integral of |det A|^-s over [s_min, s_max].
    """
    s = grid.scales + offset
    log_a = M.log_det
    if grid.m == 1:
        return np.array([M.det_a ** (-s[0]) * grid.scale_step])
    edges = np.concatenate(([s[0]], 0.5 * (s[1:] + s[:-1]), [s[-1]]))
    return (np.exp(-log_a * edges[:-1]) - np.exp(-log_a * edges[1:])) / log_a


def spatial_weight(F: GroupField) -> float:
    """Lebesgue mass of one spatial cell of the field's lattice."""
    return F.grid.cell_volume * abs(float(np.linalg.det(F.spatial_frame)))


def haar_weights(F: GroupField, M: ExpansiveMatrix) -> np.ndarray:
    """Full quadrature weights broadcastable against F.values."""
    w = scale_weights(F.grid, M, F.scale_offset) * spatial_weight(F)
    return w.reshape((-1,) + (1,) * F.grid.d)


def haar_integral(F: GroupField, M: ExpansiveMatrix) -> complex:
    """Riemann sum of F against the left Haar measure."""
    return complex(np.sum(F.values * haar_weights(F, M)))


def zeros_field(grid: GridSpec) -> GroupField:
    return GroupField(grid=grid, values=np.zeros(grid.shape, dtype=complex))


def field_from_function(grid: GridSpec, fn) -> GroupField:
    """Sample fn(X, s) on the grid; X has shape (n^d, d) and s is a scalar."""
    X = spatial_points(grid)
    values = np.stack([np.asarray(fn(X, s)).reshape(grid.spatial_shape) for s in grid.scales])
    return GroupField(grid=grid, values=values)


def field_points(F: GroupField) -> np.ndarray:
    """Physical spatial coordinates of the field's lattice, shape (n^d, d)."""
    return spatial_points(F.grid) @ F.spatial_frame.T + F.spatial_origin


def evaluate_field(F: GroupField, X: np.ndarray, s: Union[float, np.ndarray], order: int = 1) -> np.ndarray:
    """
    Multilinear interpolation of F at points (X_i, s_i); zero outside the box.

    Args:
        F: Sampled field
        X: Spatial points, shape (N, d)
        s: Scale (scalar or shape (N,))
        order: Spline order along space (1 is multilinear)

    Returns:
        Complex values, shape (N,)
    """
    grid = F.grid
    X = np.atleast_2d(X)
    local = np.linalg.solve(F.spatial_frame, (X - F.spatial_origin).T)
    spatial_idx = (local + grid.X) / grid.step
    s = np.broadcast_to(np.asarray(s, dtype=float) - F.scale_offset, (X.shape[0],))
    if grid.m == 1:
        scale_idx = np.where(np.abs(s - grid.s_min) < 1e-12, 0.0, -2.0)
    else:
        scale_idx = (s - grid.s_min) / grid.scale_step
    coords = np.vstack([scale_idx[None, :], spatial_idx])
    if grid.m == 1:
        values = interpolate(F.values[0], spatial_idx, order=order)
        return np.where(scale_idx == 0.0, values, 0.0)
    if order == 1:
        return interpolate(F.values, coords, order=1)
    # higher spatial order: interpolate each bracketing slice, then linearly in scale
    lower = np.floor(scale_idx).astype(int)
    frac = scale_idx - lower
    out = np.zeros(X.shape[0], dtype=complex)
    for offset, weight in ((0, 1.0 - frac), (1, frac)):
        index = lower + offset
        for j in np.unique(index):
            if j < 0 or j >= grid.m:
                continue
            sel = index == j
            out[sel] += weight[sel] * interpolate(F.values[j], spatial_idx[:, sel], order=order)
    return out


def _require_same_grid(F: GroupField, G: GroupField) -> None:
    if F.grid != G.grid:
        raise GridMismatch(f"Grids differ: {F.grid} vs {G.grid}")
    if not (F.is_standard and G.is_standard):
        raise GridMismatch("Convolution needs fields on the grid's own lattice")


def group_convolve(F: GroupField, G: GroupField, M: ExpansiveMatrix, order: int = 1) -> GroupField:
    """
    Haar-weighted group convolution (F * G)(g) = int F(h) G(h^-1 g) dmu(h).

    For h = (y, u) and g = (x, s), h^-1 g = (A^-u (x - y), s - u), so every
    pair of scales contributes one periodic spatial convolution whose kernel
    G(A^-u z, s - u) is interpolated off the lattice (zero outside the box).
    Output scale slices are computed in parallel.

    Args:
        F: Left factor
        G: Right factor on the same grid
        M: Expansive matrix
        order: Spatial interpolation order for G

    Returns:
        GroupField on the shared grid

    Raises:
        GridMismatch: If the grids differ
    """
    _require_same_grid(F, G)
    grid = F.grid
    axes = list(range(-grid.d, 0))
    scales = grid.scales
    weights = scale_weights(grid, M)
    offsets = lattice_offsets(grid)
    F_hat = scipy.fft.fftn(F.values, axes=axes)
    dilated = [offsets @ matrix_power(M, -u).T for u in scales]
    reach = grid.scale_step if grid.m > 1 else 0.0

    def output_slice(j: int) -> np.ndarray:
        acc = np.zeros(grid.spatial_shape, dtype=complex)
        for i, u in enumerate(scales):
            s_rel = scales[j] - u
            if s_rel < grid.s_min - reach or s_rel > grid.s_max + reach:
                continue
            if not np.any(F.values[i]):
                continue
            kernel = evaluate_field(G, dilated[i], s_rel, order=order).reshape(grid.spatial_shape)
            if not np.any(kernel):
                continue
            acc += weights[i] * F_hat[i] * scipy.fft.fftn(kernel)
        return grid.cell_volume * scipy.fft.ifftn(acc)

    values = np.stack(map_ordered(output_slice, range(grid.m)))
    return GroupField(grid=grid, values=values)


def _lattice_shift(grid: GridSpec, y: np.ndarray) -> Optional[np.ndarray]:
    shift = y / grid.step
    rounded = np.round(shift)
    if np.all(np.abs(shift - rounded) < 1e-9):
        return rounded.astype(int)
    return None


def translate_left(F: GroupField, g: GroupElement, M: ExpansiveMatrix, reindex: bool = False) -> GroupField:
    """
    Left translation (L_g F)(h) = F(g^-1 h).

    With ``reindex=True`` the samples are kept and the lattice is moved to
    g . lattice, which is exact for every g. Otherwise the result lives on F's
    grid: lattice shifts at s = 0 are exact periodic rolls, anything else is
    interpolated and flagged.
    """
    y, t = g.x, g.s
    if reindex:
        return GroupField(
            grid=F.grid,
            values=F.values.copy(),
            frame=matrix_power(M, t) @ F.spatial_frame,
            origin=y + matrix_power(M, t) @ F.spatial_origin,
            scale_offset=F.scale_offset + t,
            interpolated=F.interpolated,
        )

    shift = _lattice_shift(F.grid, y)
    if t == 0 and shift is not None and F.is_standard:
        axes = tuple(range(1, F.grid.d + 1))
        return GroupField(grid=F.grid, values=np.roll(F.values, tuple(shift), axis=axes))

    logger.debug(f"Left translation by (x={y}, s={t}) is off-lattice; interpolating")
    X = field_points(F)
    back = (X - y) @ matrix_power(M, -t).T
    values = np.stack([
        evaluate_field(F, back, s - t).reshape(F.grid.spatial_shape) for s in F.scales
    ])
    return GroupField(grid=F.grid, values=values, frame=F.frame, origin=F.origin,
                      scale_offset=F.scale_offset, interpolated=True)


def translate_right(F: GroupField, g: GroupElement, M: ExpansiveMatrix) -> GroupField:
    """
    Right translation (R_g F)(x, s) = F(x + A^s y, s + t) on F's own grid.

    Pure scale shifts by multiples of the scale step are exact re-indexing;
    everything else is interpolated and flagged.
    """
    y, t = g.x, g.s
    grid = F.grid
    steps = t / grid.scale_step
    if not np.any(y) and abs(steps - round(steps)) < 1e-9:
        k = int(round(steps))
        values = np.zeros_like(F.values)
        if 0 <= k < grid.m:
            values[: grid.m - k] = F.values[k:]
        elif -grid.m < k < 0:
            values[-k:] = F.values[: grid.m + k]
        return GroupField(grid=grid, values=values, frame=F.frame, origin=F.origin,
                          scale_offset=F.scale_offset, interpolated=F.interpolated)

    logger.debug(f"Right translation by (x={y}, s={t}) is off-lattice; interpolating")
    X = field_points(F)
    slices = []
    for s in F.scales:
        moved = X + matrix_power(M, s) @ y
        slices.append(evaluate_field(F, moved, s + t).reshape(grid.spatial_shape))
    return GroupField(grid=grid, values=np.stack(slices), frame=F.frame, origin=F.origin,
                      scale_offset=F.scale_offset, interpolated=True)


def reflect(F: GroupField, M: ExpansiveMatrix) -> GroupField:
    """Involution F_check(g) = F(g^-1) = F(-A^-s x, -s), resampled on F's grid."""
    X = field_points(F)
    slices = []
    for s in F.scales:
        back = -(X @ matrix_power(M, -s).T)
        slices.append(evaluate_field(F, back, -s).reshape(F.grid.spatial_shape))
    return GroupField(grid=F.grid, values=np.stack(slices), interpolated=True)


def save_field(F: GroupField, path: str) -> None:
    """
    Write a field in the GAF1 binary format.

    Layout: magic "GAF1", then d, n, X, m, s_min, s_max as 64-bit little-endian
    (integers int64, reals float64), then row-major complex128 values.

    Raises:
        GridMismatch: If the field is not on its grid's own lattice
    """
    if not F.is_standard:
        raise GridMismatch("Only fields on the standard lattice can be stored")
    grid = F.grid
    with open(path, "wb") as fh:
        fh.write(_GAF_HEADER.pack(GAF_MAGIC, grid.d, grid.n, grid.X, grid.m, grid.s_min, grid.s_max))
        fh.write(np.ascontiguousarray(F.values, dtype="<c16").tobytes())
    logger.info(f"Wrote field {grid.shape} to {path}")


def load_field(path: str) -> GroupField:
    """Read a GAF1 field written by save_field."""
    with open(path, "rb") as fh:
        header = fh.read(_GAF_HEADER.size)
        if len(header) != _GAF_HEADER.size:
            raise ValueError(f"Truncated GAF1 header in {path}")
        magic, d, n, X, m, s_min, s_max = _GAF_HEADER.unpack(header)
        if magic != GAF_MAGIC:
            raise ValueError(f"Not a GAF1 file: {path}")
        grid = GridSpec(d=d, n=n, X=X, m=m, s_min=s_min, s_max=s_max)
        raw = np.frombuffer(fh.read(), dtype="<c16")
    expected = int(np.prod(grid.shape))
    if raw.size != expected:
        raise ValueError(f"GAF1 payload has {raw.size} values, expected {expected}")
    return GroupField(grid=grid, values=raw.reshape(grid.shape).astype(complex))


def slice_rows(F: GroupField, scale_index: int) -> List[List[float]]:
    """Rows (x_1..x_d, real, imag, abs) of one scale slice in lattice order."""
    X = field_points(F)
    values = F.values[scale_index].ravel()
    return [list(map(float, x)) + [float(v.real), float(v.imag), float(abs(v))]
            for x, v in zip(X, values)]


def export_slice_csv(F: GroupField, scale_index: int, path: str) -> None:
    """Write one scale slice as CSV with a commented header."""
    d = F.grid.d
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# scale slice s={F.scales[scale_index]:.12g}; columns: x1..x{d}, real, imag, abs\n")
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(d)] + ["real", "imag", "abs"])
        writer.writerows(slice_rows(F, scale_index))
