"""
Data models for anisowave.

Defines the core data structures used throughout the package: dilation
matrices, ellipsoids, group elements, sampled fields, spectral windows,
exponent bundles and experiment configuration.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .errors import ConfigError

# q at or above this value is evaluated as q = infinity
Q_INFINITY_THRESHOLD = 64.0


@dataclass(eq=False)
class ExpansiveMatrix:
    """Dilation matrix A with its logarithm, determinant and spectral bounds."""
    A: np.ndarray
    B: Optional[np.ndarray]  # principal logarithm, None in integer-only mode
    det_a: float  # |det A|
    lambda_minus: float  # 1 < lambda_minus < min |sigma(A)|
    lambda_plus: float  # lambda_plus > max |sigma(A)|
    integer_only: bool = False

    @property
    def dim(self) -> int:
        return int(self.A.shape[0])

    @property
    def log_det(self) -> float:
        return math.log(self.det_a)

    @property
    def zeta_minus(self) -> float:
        return math.log(self.lambda_minus) / self.log_det

    @property
    def zeta_plus(self) -> float:
        return math.log(self.lambda_plus) / self.log_det


@dataclass(eq=False)
class AnisotropicEllipsoid:
    """Unit-volume ellipsoid {x : ||x||_P < c} with contraction factor r."""
    P: np.ndarray  # SPD form, normalized to det P = 1
    c: float  # P-norm radius
    r: float  # certified factor: ||A^-1 x||_P <= ||x||_P / r
    volume: float  # c^d * omega_d / sqrt(det P)
    terms: int = 0  # series terms used to build P
    monotone: bool = True  # s -> ||A^-s x||_P strictly decreasing for every x


@dataclass(eq=False)
class GroupElement:
    """A point (x, s) of the group R^d x_A R."""
    x: np.ndarray
    s: float

    def __post_init__(self):
        self.x = np.atleast_1d(np.asarray(self.x, dtype=float))
        self.s = float(self.s)


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic spatial grid [-X, X)^d with n points per axis and m scales."""
    d: int
    n: int
    X: float
    m: int
    s_min: float
    s_max: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"Grid dimension must be >= 1, got {self.d}")
        if self.n < 2 or self.n % 2:
            raise ValueError(f"Points per axis must be even and >= 2, got {self.n}")
        if self.X <= 0:
            raise ValueError(f"Spatial extent must be positive, got {self.X}")
        if self.m < 1:
            raise ValueError(f"Scale count must be >= 1, got {self.m}")
        if self.s_max < self.s_min or (self.m > 1 and self.s_max == self.s_min):
            raise ValueError(f"Invalid scale range [{self.s_min}, {self.s_max}] for m={self.m}")

    @property
    def step(self) -> float:
        return 2.0 * self.X / self.n

    @property
    def cell_volume(self) -> float:
        return self.step ** self.d

    @property
    def scale_step(self) -> float:
        # a single slice carries unit scale mass
        if self.m == 1:
            return 1.0
        return (self.s_max - self.s_min) / (self.m - 1)

    @property
    def scales(self) -> np.ndarray:
        if self.m == 1:
            return np.array([self.s_min])
        return np.linspace(self.s_min, self.s_max, self.m)

    @property
    def axis(self) -> np.ndarray:
        return -self.X + self.step * np.arange(self.n)

    @property
    def spatial_shape(self) -> Tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.m,) + self.spatial_shape

    def with_scales(self, s_min: float, s_max: float, m: int) -> "GridSpec":
        return GridSpec(d=self.d, n=self.n, X=self.X, m=m, s_min=s_min, s_max=s_max)

    def to_dict(self) -> Dict[str, Any]:
        return {"d": self.d, "n": self.n, "X": self.X, "m": self.m,
                "s_min": self.s_min, "s_max": self.s_max}


@dataclass(eq=False)
class GroupField:
    """Complex samples of a function on the group, values[j, k...] at (x_k, s_j)."""
    grid: GridSpec
    values: np.ndarray
    frame: Optional[np.ndarray] = None  # spatial points are origin + frame @ x_k
    origin: Optional[np.ndarray] = None
    scale_offset: float = 0.0  # scales are grid.scales + scale_offset
    interpolated: bool = False  # True when produced by off-grid resampling

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"Field values have shape {self.values.shape}, grid expects {self.grid.shape}"
            )

    @property
    def is_standard(self) -> bool:
        """True when the samples sit on the grid's own lattice."""
        return (
            self.frame is None
            and (self.origin is None or not np.any(self.origin))
            and self.scale_offset == 0.0
        )

    @property
    def spatial_frame(self) -> np.ndarray:
        return np.eye(self.grid.d) if self.frame is None else self.frame

    @property
    def spatial_origin(self) -> np.ndarray:
        return np.zeros(self.grid.d) if self.origin is None else self.origin

    @property
    def scales(self) -> np.ndarray:
        return self.grid.scales + self.scale_offset


@dataclass
class ScaleProfile:
    """Smooth compactly supported profile w on the continuous scale axis."""
    kind: str = "plateau-bump"  # bump | plateau-bump | cosine
    center: float = 0.5
    halfwidth: float = 1.5
    plateau_halfwidth: float = 1.0  # plateau-bump only

    @property
    def support(self) -> Tuple[float, float]:
        return (self.center - self.halfwidth, self.center + self.halfwidth)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "center": self.center,
            "halfwidth": self.halfwidth,
            "plateauHalfwidth": self.plateau_halfwidth,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScaleProfile":
        return cls(
            kind=data.get("kind", "plateau-bump"),
            center=float(data.get("center", 0.5)),
            halfwidth=float(data.get("halfwidth", 1.5)),
            plateau_halfwidth=float(data.get("plateauHalfwidth", data.get("plateau_halfwidth", 1.0))),
        )


@dataclass(eq=False)
class SpectralWindow:
    """Fourier-domain window psi_hat(xi) = profile value at the A*-scale of xi."""
    matrix: ExpansiveMatrix  # A
    adjoint: ExpansiveMatrix  # A*, drives frequency dilations
    ellipsoid: AnisotropicEllipsoid  # ellipsoid of A*
    profile: ScaleProfile
    role: str  # admissible | analyzing | dual
    profile_norm: float  # ||w||_{L2(R)}
    min_coverage: float = 1.0  # min_t sum_j w(t + j)^2
    cache: Dict[Any, np.ndarray] = field(default_factory=dict, repr=False)


@dataclass
class CalderonPair:
    """Analyzing window phi and its dual psi with sum_j phi_hat psi_hat = 1."""
    analyzing: SpectralWindow
    dual: SpectralWindow
    tight: bool = False


@dataclass(eq=False)
class TestSignal:
    """Sampled test function on the spatial grid with cached Fourier samples."""
    __test__ = False  # keep pytest from collecting this class

    grid: GridSpec
    samples: np.ndarray
    kind: str
    fourier: np.ndarray  # continuous-FT samples on the FFT frequency grid
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.grid.cell_volume)


@dataclass(frozen=True)
class TLParams:
    """Exponent bundle (p, q, alpha, beta) for Triebel-Lizorkin type norms."""
    p: float
    q: float
    alpha: float = 0.0
    beta: float = 1.1

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError(f"p must be positive, got {self.p}")
        if not self.q > 0:
            raise ValueError(f"q must be positive, got {self.q}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    @property
    def q_is_infinite(self) -> bool:
        return self.q >= Q_INFINITY_THRESHOLD

    @property
    def inv_q(self) -> float:
        return 0.0 if self.q_is_infinite else 1.0 / self.q

    @property
    def r(self) -> float:
        return min(1.0, self.p, self.q)

    @property
    def alpha_prime(self) -> float:
        return self.alpha + 0.5 - self.inv_q

    @property
    def gamma(self) -> float:
        return self.alpha + 1.0 / self.p - self.inv_q

    def satisfies_equivalence(self) -> bool:
        """Check beta > max(1/p, 1/q), the hypothesis of the norm equivalences."""
        return self.beta > max(1.0 / self.p, self.inv_q)

    def with_alpha(self, alpha: float) -> "TLParams":
        return TLParams(p=self.p, q=self.q, alpha=alpha, beta=self.beta)

    def to_dict(self) -> Dict[str, float]:
        return {"p": self.p, "q": self.q, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class QBox:
    """Sampled neighborhood [-N, N]^d x [-N, N] of the identity in G_A."""
    half_width: float = 1.0
    spatial_step: float = 0.5
    scale_step: float = 0.5


@dataclass
class MaximalConfig:
    """Configuration for the anisotropic maximal operators."""
    j_min: Optional[int] = None  # None: smallest ball holding only the center cell
    j_max: Optional[int] = None  # None: smallest ball covering the whole grid
    beta: float = 1.5
    centered: bool = False  # restrict to balls centered at the evaluation point
    pruned: bool = False  # Peetre: skip offsets whose weight is below prune_ratio
    prune_ratio: float = 1e-6
    box: QBox = field(default_factory=QBox)


@dataclass
class Envelope:
    """Standard envelope Xi_{sigma, L}(x, s) = theta_sigma(s) * eta_L(x, s)."""
    sigma: Tuple[float, float]
    L: float


@dataclass
class ControlWeightSpec:
    """Exponents of the control weight w ~ Xi_{sigma,0} + Xi_{kappa,-beta}."""
    params: TLParams
    det_a: float
    sigma: Tuple[float, float]
    kappa: Tuple[float, float]
    branch: str  # "upper" when alpha >= -(1/r + beta - 2/q)/2, else "lower"

    @property
    def gamma(self) -> float:
        return self.params.gamma

    @property
    def delta(self) -> float:
        return self.params.alpha - self.params.inv_q


@dataclass
class CheckResult:
    """Outcome of one verification suite."""
    name: str
    passed: bool
    metrics: Dict[str, Any] = field(default_factory=dict)
    rows: List[Dict[str, Any]] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)


@dataclass
class ExperimentConfig:
    """Configuration for a verification campaign."""
    matrix: List[List[float]]
    grid: GridSpec
    window: ScaleProfile = field(default_factory=ScaleProfile)
    params: List[TLParams] = field(default_factory=list)
    seed: int = 0x5EED
    output_dir: str = "reports"
    battery_size: int = 10
    suites: Optional[List[str]] = None  # None runs every suite

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """Build a config from parsed JSON, raising ConfigError with field names."""
        if not isinstance(data, dict):
            raise ConfigError("Config root must be a JSON object")

        matrix = data.get("matrix")
        if matrix is None:
            raise ConfigError("Missing matrix", field="matrix")
        try:
            rows = [[float(v) for v in row] for row in matrix]
        except (TypeError, ValueError):
            raise ConfigError("Matrix must be a row-major array of numbers", field="matrix")
        if not rows or any(len(row) != len(rows) for row in rows):
            raise ConfigError(f"Matrix must be square, got {matrix}", field="matrix")

        grid_data = data.get("grid")
        if not isinstance(grid_data, dict):
            raise ConfigError("Missing grid object", field="grid")
        try:
            grid = GridSpec(
                d=int(grid_data.get("d", len(rows))),
                n=int(grid_data["n"]),
                X=float(grid_data["X"]),
                m=int(grid_data["m"]),
                s_min=float(grid_data["s_min"]),
                s_max=float(grid_data["s_max"]),
            )
        except KeyError as e:
            raise ConfigError(f"Missing grid entry {e}", field=f"grid.{e.args[0]}")
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid grid: {e}", field="grid")
        if grid.d != len(rows):
            raise ConfigError(
                f"Grid dimension {grid.d} does not match matrix size {len(rows)}", field="grid.d"
            )

        window = ScaleProfile.from_dict(data.get("window", {}))

        params_data = data.get("params")
        if not params_data:
            raise ConfigError("Params list must not be empty", field="params")
        params: List[TLParams] = []
        for i, entry in enumerate(params_data):
            try:
                q = entry.get("q", 2.0)
                params.append(TLParams(
                    p=float(entry["p"]),
                    q=math.inf if q in ("inf", None) else float(q),
                    alpha=float(entry.get("alpha", 0.0)),
                    beta=float(entry.get("beta", 1.1)),
                ))
            except (KeyError, TypeError, ValueError, AttributeError) as e:
                raise ConfigError(f"Invalid params entry: {e}", field=f"params[{i}]")

        suites = data.get("suites")
        if suites is not None and not isinstance(suites, list):
            raise ConfigError("Suites must be a list of names", field="suites")

        seed = data.get("seed", 0x5EED)
        if isinstance(seed, str):
            try:
                seed = int(seed, 0)
            except ValueError:
                raise ConfigError(f"Invalid seed {seed!r}", field="seed")

        return cls(
            matrix=rows,
            grid=grid,
            window=window,
            params=params,
            seed=int(seed),
            output_dir=str(data.get("output_dir", "reports")),
            battery_size=int(data.get("battery_size", 10)),
            suites=suites,
        )

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        """Load a config from a JSON file."""
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Invalid JSON: {e.msg}", line=e.lineno)
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "matrix": self.matrix,
            "grid": self.grid.to_dict(),
            "window": self.window.to_dict(),
            "params": [p.to_dict() for p in self.params],
            "seed": self.seed,
            "output_dir": self.output_dir,
            "battery_size": self.battery_size,
            "suites": self.suites,
        }
