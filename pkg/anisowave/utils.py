"""
Utility functions for anisowave.

Grid coordinates, Fourier conventions, interpolation, regression fits,
thread pools and parsing helpers shared by all modules.

Fourier convention: f_hat(xi) = int f(x) exp(-2 pi i x.xi) dx, sampled on the
FFT frequency grid of the spatial lattice.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Optional, Sequence, TypeVar

import numpy as np
import scipy.fft
from scipy import ndimage

from .models import GridSpec, TLParams

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "ANISOWAVE_THREADS"


def spatial_points(grid: GridSpec) -> np.ndarray:
    """
    Lattice points of the grid as an (n^d, d) array in C order.

    Args:
        grid: Grid description

    Returns:
        Array of shape (n**d, d)

    Example:
        >>> spatial_points(GridSpec(d=1, n=4, X=1.0, m=1, s_min=0, s_max=0)).ravel()
        array([-1. , -0.5,  0. ,  0.5])
    """
    mesh = np.meshgrid(*([grid.axis] * grid.d), indexing="ij")
    return np.stack([axis.ravel() for axis in mesh], axis=-1)


def lattice_offsets(grid: GridSpec) -> np.ndarray:
    """Periodic offsets in [-X, X)^d in FFT order, shape (n^d, d); row k is the shift by index k."""
    idx = np.arange(grid.n)
    signed = np.where(idx < grid.n // 2, idx, idx - grid.n) * grid.step
    mesh = np.meshgrid(*([signed] * grid.d), indexing="ij")
    return np.stack([axis.ravel() for axis in mesh], axis=-1)


def offset_indices(grid: GridSpec) -> np.ndarray:
    """Signed integer shifts matching lattice_offsets, shape (n^d, d)."""
    idx = np.arange(grid.n)
    signed = np.where(idx < grid.n // 2, idx, idx - grid.n)
    mesh = np.meshgrid(*([signed] * grid.d), indexing="ij")
    return np.stack([axis.ravel() for axis in mesh], axis=-1)


def frequency_points(grid: GridSpec) -> np.ndarray:
    """FFT frequency grid as an (n^d, d) array."""
    freqs = scipy.fft.fftfreq(grid.n, d=grid.step)
    mesh = np.meshgrid(*([freqs] * grid.d), indexing="ij")
    return np.stack([axis.ravel() for axis in mesh], axis=-1)


def nyquist_ring(grid: GridSpec) -> np.ndarray:
    """Boolean mask (spatial shape) of frequencies on the edge of the Nyquist box."""
    idx = np.arange(grid.n)
    edge = (idx == grid.n // 2) | (idx == grid.n // 2 + 1) | (idx == grid.n // 2 - 1)
    mask = np.zeros(grid.spatial_shape, dtype=bool)
    for axis in range(grid.d):
        shape = [1] * grid.d
        shape[axis] = grid.n
        mask |= edge.reshape(shape)
    return mask


def _phase(grid: GridSpec) -> np.ndarray:
    xi = frequency_points(grid)
    origin = -grid.X * np.ones(grid.d)
    return np.exp(-2j * np.pi * (xi @ origin)).reshape(grid.spatial_shape)


def _axes(grid: GridSpec) -> List[int]:
    return list(range(-grid.d, 0))


def to_fourier(samples: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Continuous Fourier transform samples of a function given on the lattice."""
    return grid.cell_volume * _phase(grid) * scipy.fft.fftn(samples, axes=_axes(grid))


def from_fourier(fhat: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Inverse of to_fourier: lattice samples of the function with the given spectrum."""
    return scipy.fft.ifftn(fhat / _phase(grid), axes=_axes(grid)) / grid.cell_volume


def interpolate(values: np.ndarray, coords: np.ndarray, order: int = 1) -> np.ndarray:
    """
    Evaluate a sampled array at fractional index coordinates.

    Points outside the array evaluate to zero. Complex arrays are
    interpolated part by part.

    Args:
        values: Sampled array
        coords: Index coordinates, shape (values.ndim, npoints)
        order: Spline order (1 is multilinear)

    Returns:
        Interpolated values, shape (npoints,)
    """
    kwargs = dict(order=order, mode="constant", cval=0.0, prefilter=order > 1)
    if np.iscomplexobj(values):
        real = ndimage.map_coordinates(values.real, coords, **kwargs)
        imag = ndimage.map_coordinates(values.imag, coords, **kwargs)
        return real + 1j * imag
    return ndimage.map_coordinates(values, coords, **kwargs)


def worker_count() -> int:
    """Worker cap from ANISOWAVE_THREADS (default: CPU count)."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logger.warning(f"Ignoring invalid {THREADS_ENV}={raw!r}")
    return os.cpu_count() or 1


def map_ordered(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Map over items with a thread pool; results come back in input order."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def linear_fit(x: Sequence[float], y: Sequence[float]) -> Dict[str, float]:
    """
    Least-squares line through (x, y).

    Returns:
        Dictionary with slope, intercept and r2 (r2 = 1 for exact or constant data)
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        return {"slope": 0.0, "intercept": float(y[0]) if y.size else 0.0, "r2": 1.0}
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    total = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 if total == 0 else float(1.0 - np.sum(residual ** 2) / total)
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2}


def quasi_triangle_defect(norm_a: float, norm_b: float, norm_sum: float, r: float) -> float:
    """||a+b||^r - ||a||^r - ||b||^r, nonpositive for an r-norm."""
    return norm_sum ** r - norm_a ** r - norm_b ** r


def parse_matrix(text: str) -> np.ndarray:
    """
    Parse a matrix flag such as "2,0;0,4" (rows separated by ';').

    Example:
        >>> parse_matrix("2,0;0,4")
        array([[2., 0.],
               [0., 4.]])
    """
    rows = [row for row in text.replace(" ", "").split(";") if row]
    try:
        matrix = np.array([[float(v) for v in row.split(",")] for row in rows])
    except ValueError:
        raise ValueError(f"Invalid matrix literal: {text!r}")
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"Matrix must be square: {text!r}")
    return matrix


def parse_params(text: str) -> TLParams:
    """Parse "p=2,q=2,alpha=0,beta=1.1" into TLParams; q may be 'inf'."""
    values: Dict[str, float] = {}
    for item in text.split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise ValueError(f"Invalid parameter entry: {item!r}")
        key, raw = item.split("=", 1)
        values[key.strip()] = math.inf if raw.strip() == "inf" else float(raw)
    return TLParams(
        p=values.get("p", 2.0),
        q=values.get("q", 2.0),
        alpha=values.get("alpha", 0.0),
        beta=values.get("beta", 1.1),
    )


def parse_scales(text: str) -> tuple:
    """Parse "smin:smax:m" into (s_min, s_max, m)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"Scale range must be smin:smax:m, got {text!r}")
    return float(parts[0]), float(parts[1]), int(parts[2])


def seeded_rng(seed: Optional[int]) -> np.random.Generator:
    return np.random.default_rng(seed)
