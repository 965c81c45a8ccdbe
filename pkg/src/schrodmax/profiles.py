"""Frequency-side data profiles and their L2 / Sobolev norms.

Profiles are symbolic descriptors: a smooth 1d bump, a radial plateau
bump, tensor products, a translated comb along a frequency lattice, and
modulations of any of these.  Evaluation is pointwise on demand; norms
are computed by adaptive quadrature over the support cells, so nothing
here ever commits to a global sampling grid.
"""

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .quadrature import QuadratureError, gauss_legendre, integrate_1d, integrate_box

TWO_PI = 2.0 * math.pi

# enough cells to cover the comb at the largest ladder scale, with margin
_MAX_NORM_CELLS = 1 << 15


# ---------------------------------------------------------------------------
# the mollifier and its cached masses


def _mollifier_raw(u):
    """exp(-1/(1-u^2)) on (-1, 1), zero elsewhere; vectorized."""
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ui * ui))
    return out


@functools.lru_cache(maxsize=1)
def mollifier_mass() -> float:
    """Integral of exp(-1/(1-u^2)) over (-1, 1), fixed once at high order."""
    x, w = gauss_legendre(256)
    return float(np.dot(_mollifier_raw(x), w))


@functools.lru_cache(maxsize=1)
def mollifier_sq_mass() -> float:
    """Integral of exp(-2/(1-u^2)) over (-1, 1)."""
    x, w = gauss_legendre(256)
    v = _mollifier_raw(x)
    return float(np.dot(v * v, w))


def smoothstep(v):
    """C-infinity monotone ramp: 0 for v <= -1, 1 for v >= 1."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape)
    out[v >= 1.0] = 1.0
    mid = (v > -1.0) & (v < 1.0)
    if np.any(mid):
        vm = v[mid]
        x, w = gauss_legendre(96)
        half = 0.5 * (vm + 1.0)
        nodes = -1.0 + half[:, None] * (x[None, :] + 1.0)
        out[mid] = (_mollifier_raw(nodes) @ w) * half / mollifier_mass()
    return out


# ---------------------------------------------------------------------------
# bump building blocks


@dataclass(frozen=True)
class Bump1D:
    """Smooth bump supported on (center - width, center + width).

    normalization=None picks the unit-integral constant 1/(width * mass).
    """

    center: float = 0.0
    width: float = 1.0
    normalization: float | None = None

    def __post_init__(self):
        if not self.width > 0.0:
            raise ValueError("width must be positive")
        if self.normalization is None:
            object.__setattr__(
                self, "normalization", 1.0 / (self.width * mollifier_mass()))
        elif not self.normalization > 0.0:
            raise ValueError("normalization must be positive")


def bump_eval(b: Bump1D, x):
    """Evaluate the bump; returns a float for scalar x, an array otherwise."""
    u = (np.asarray(x, dtype=float) - b.center) / b.width
    out = b.normalization * _mollifier_raw(u)
    if out.ndim == 0:
        return float(out)
    return out


def bump_sq_integral(b: Bump1D) -> float:
    """Exact integral of the squared bump over its support."""
    return b.normalization ** 2 * b.width * mollifier_sq_mass()


@dataclass(frozen=True)
class RadialBump:
    """Radial plateau profile: 1 on 1/2 <= r <= 2, 0 outside inner <= r <= outer."""

    inner: float = 1.0 / 3.0
    outer: float = 3.0

    def __post_init__(self):
        if not 0.0 < self.inner < 0.5:
            raise ValueError("inner edge must sit strictly below the plateau")
        if not self.outer > 2.0:
            raise ValueError("outer edge must sit strictly above the plateau")


def radial_profile(phi: RadialBump, r):
    """Plateau profile as a function of the radius; vectorized."""
    r = np.asarray(r, dtype=float)
    lo, hi = phi.inner, 0.5
    up = smoothstep((r - 0.5 * (lo + hi)) / (0.5 * (hi - lo)))
    lo2, hi2 = 2.0, phi.outer
    down = smoothstep(-(r - 0.5 * (lo2 + hi2)) / (0.5 * (hi2 - lo2)))
    out = up * down
    return out


def radial_bump_eval(phi: RadialBump, xi):
    """Evaluate at a frequency point or an (..., d) array of points."""
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 0:
        raise ValueError("xi must be a vector or an array of vectors")
    r = np.sqrt(np.sum(xi * xi, axis=-1))
    out = radial_profile(phi, r)
    if out.ndim == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# model parameters


@dataclass(frozen=True)
class ModelParams:
    """Dimension, dissipation exponent, frequency scale, Sobolev regularity."""

    d: int
    gamma: float
    R: float
    s: float = 0.0

    def __post_init__(self):
        if not (isinstance(self.d, int) and self.d >= 1):
            raise ValueError("d must be an integer >= 1")
        if not self.gamma > 0.0:
            raise ValueError("gamma must be positive")
        if not self.R >= 1.0:
            raise ValueError("R must be >= 1")
        if self.s < 0.0:
            raise ValueError("s must be nonnegative")


@dataclass(frozen=True)
class CounterexampleParams:
    """Scales and small constants for the lattice-comb construction.

    D is the comb spacing, Q the modulus budget; both are derived from
    the model and satisfy Q^{d/(d-1)} = R^{gamma/2} / D.
    """

    model: ModelParams
    c0: float
    c1: float
    c2: float
    c3: float
    c4: float
    mu0: float
    delta0: float
    eps0: float

    @property
    def D(self) -> float:
        m = self.model
        return m.R ** ((m.d + m.gamma) / (2.0 * (m.d + 1)))

    @property
    def Q(self) -> float:
        m = self.model
        return m.R ** ((m.gamma - 1.0) * (m.d - 1) / (2.0 * (m.d + 1)))

    def __post_init__(self):
        m = self.model
        if m.d < 2:
            raise ValueError("the comb construction needs d >= 2")
        if not 1.0 < m.gamma <= 2.0:
            raise ValueError("construction scales are defined for 1 < gamma <= 2")
        if not 0.0 < self.c0 < 2.0 ** -(m.d + 1):
            raise ValueError("c0 out of range")
        if not (self.c2 < self.c1 / 2.0 < self.c0 / 4.0):
            raise ValueError("need c2 < c1/2 < c0/4")
        if not 0.0 < self.c3 < min(self.c2 / 4.0, 1.0 / TWO_PI):
            raise ValueError("c3 out of range")
        if not 0.0 < self.c4 < 0.5:
            raise ValueError("c4 out of range")
        if not self.mu0 > 0.0:
            raise ValueError("mu0 must be positive")
        if not 0.0 < self.delta0 < (m.gamma - 1.0) / (4.0 * (m.d + 1)):
            raise ValueError("delta0 out of range")
        if not self.eps0 > 0.0:
            raise ValueError("eps0 must be positive")
        if self.c2 <= 0.0:
            raise ValueError("c2 must be positive")
        if not self.D > 2.0:
            raise ValueError("comb spacing D must exceed the bump diameter")
        rel = abs(self.Q ** (m.d / (m.d - 1)) * self.D / m.R ** (m.gamma / 2.0) - 1.0)
        if rel > 1e-12:
            raise ValueError(f"scale identity violated, relative error {rel:g}")

    @classmethod
    def with_defaults(cls, model: ModelParams, **overrides) -> "CounterexampleParams":
        d = model.d
        c0 = overrides.pop("c0", 2.0 ** -(d + 2))
        c1 = overrides.pop("c1", c0 / 4.0)
        c2 = overrides.pop("c2", c1 / 4.0)
        c3 = overrides.pop("c3", min(c2 / 4.0, 1.0 / TWO_PI) / 2.0)
        c4 = overrides.pop("c4", 0.125)
        mu0 = overrides.pop("mu0", (4.0 * math.pi) ** -d)
        delta0 = overrides.pop("delta0", (model.gamma - 1.0) / (8.0 * (d + 1)))
        eps0 = overrides.pop("eps0", 0.01)
        if overrides:
            raise TypeError(f"unknown overrides: {sorted(overrides)}")
        return cls(model, c0, c1, c2, c3, c4, mu0, delta0, eps0)

    @classmethod
    def for_experiments(cls, model: ModelParams, **overrides) -> "CounterexampleParams":
        """Defaults with a phase-drift constant small enough for tight budgets."""
        overrides.setdefault("c4", 1e-6)
        return cls.with_defaults(model, **overrides)


def comb_range(cp: CounterexampleParams) -> tuple[int, int]:
    """Half-open lattice index range [start, stop) of the frequency comb."""
    m = cp.model
    n = m.R ** (m.gamma / 2.0) / cp.D
    return int(math.ceil(n)), int(math.ceil(2.0 * n))


# ---------------------------------------------------------------------------
# spectrum descriptors


class SpectrumDescriptor:
    """Base for symbolic frequency profiles.

    Subclasses provide a kind string, the problem dimension, a band
    scale, support radii, and either a separable axis decomposition or a
    radial profile.
    """

    kind: str = ""

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def band_scale(self) -> float:
        """The frequency magnitude the support concentrates around."""
        raise NotImplementedError

    def support_radii(self) -> tuple[float, float]:
        """Annulus radii (inner, outer) containing the support."""
        raise NotImplementedError

    def serialize(self) -> str:
        raise NotImplementedError

    # separable kinds override these two
    def axis_cells(self) -> list[list[tuple[float, float]]] | None:
        return None

    def axis_factor(self, axis: int, xi):
        raise NotImplementedError(f"{self.kind} has no separable axis factors")


@dataclass(frozen=True)
class PlaneWaveSurrogate(SpectrumDescriptor):
    """Narrow bump at frequency xi0 with mass (2 pi)^d amplitude.

    The mass convention makes the free evolution tend to the plane wave
    amplitude * e^{i(x.xi0 + t|xi0|^2)} as width -> 0.
    """

    xi0: tuple[float, ...]
    width: float
    amplitude: complex = 1.0 + 0.0j
    kind: str = field(default="plane-wave-surrogate", init=False)

    def __post_init__(self):
        if not self.width > 0.0:
            raise ValueError("width must be positive")
        if len(self.xi0) < 1:
            raise ValueError("xi0 must be a nonempty vector")

    @property
    def dim(self) -> int:
        return len(self.xi0)

    @property
    def band_scale(self) -> float:
        return max(float(np.linalg.norm(self.xi0)), 1.0)

    def support_radii(self) -> tuple[float, float]:
        r0 = float(np.linalg.norm(self.xi0))
        spread = self.width * math.sqrt(self.dim)
        return max(r0 - spread, 0.0), r0 + spread

    def serialize(self) -> str:
        coords = ",".join(f"{v:.17g}" for v in self.xi0)
        return (f"plane-wave-surrogate d={self.dim} xi0={coords} "
                f"width={self.width:.17g} amplitude={self.amplitude:.17g}")

    def axis_cells(self):
        return [[(c - self.width, c + self.width)] for c in self.xi0]

    def axis_factor(self, axis, xi):
        b = Bump1D(center=float(self.xi0[axis]), width=self.width)
        out = bump_eval(b, xi)
        if axis == 0:
            return out * (self.amplitude * TWO_PI ** self.dim)
        return out


@dataclass(frozen=True)
class Case1Product(SpectrumDescriptor):
    """Tensor product of unit-mass bumps at scale R: prod_j R^{-1} phi(xi_j / R)."""

    model: ModelParams
    kind: str = field(default="case1-product", init=False)

    @property
    def dim(self) -> int:
        return self.model.d

    @property
    def band_scale(self) -> float:
        return self.model.R

    def support_radii(self) -> tuple[float, float]:
        return 0.0, self.model.R * math.sqrt(self.dim)

    def serialize(self) -> str:
        return f"case1-product d={self.dim} R={self.model.R:.17g}"

    def axis_cells(self):
        r = self.model.R
        return [[(-r, r)] for _ in range(self.dim)]

    def axis_factor(self, axis, xi):
        return bump_eval(Bump1D(center=0.0, width=self.model.R), xi)


@dataclass(frozen=True)
class Case3Counterexample(SpectrumDescriptor):
    """Window at xi_1 ~ R^{gamma/2} times a comb of unit bumps on each other axis."""

    params: CounterexampleParams
    kind: str = field(default="case3-counterexample", init=False)

    @property
    def dim(self) -> int:
        return self.params.model.d

    @property
    def band_scale(self) -> float:
        m = self.params.model
        return m.R ** (m.gamma / 2.0)

    def _window(self) -> tuple[float, float]:
        m = self.params.model
        return m.R ** (m.gamma / 2.0), math.sqrt(m.R)

    def support_radii(self) -> tuple[float, float]:
        center, halfw = self._window()
        start, stop = comb_range(self.params)
        d_spacing = self.params.D
        lo_sq = (center - halfw) ** 2 + (self.dim - 1) * (d_spacing * start - 1.0) ** 2
        hi_sq = (center + halfw) ** 2 + (self.dim - 1) * (d_spacing * (stop - 1) + 1.0) ** 2
        return math.sqrt(lo_sq), math.sqrt(hi_sq)

    def serialize(self) -> str:
        m = self.params.model
        return (f"case3-counterexample d={self.dim} gamma={m.gamma:.17g} "
                f"R={m.R:.17g} D={self.params.D:.17g} Q={self.params.Q:.17g}")

    def axis_cells(self):
        center, halfw = self._window()
        cells = [[(center - halfw, center + halfw)]]
        start, stop = comb_range(self.params)
        d_spacing = self.params.D
        comb = [(d_spacing * k - 1.0, d_spacing * k + 1.0) for k in range(start, stop)]
        for _ in range(1, self.dim):
            cells.append(list(comb))
        return cells

    def axis_factor(self, axis, xi):
        xi = np.asarray(xi, dtype=float)
        if axis == 0:
            center, halfw = self._window()
            u = (xi - center) / halfw
            return _mollifier_raw(u) / (mollifier_mass() * halfw)
        start, stop = comb_range(self.params)
        d_spacing = self.params.D
        k = np.round(xi / d_spacing)
        valid = (k >= start) & (k < stop)
        u = xi - d_spacing * k
        vals = _mollifier_raw(u) / mollifier_mass()
        return np.where(valid, vals, 0.0)


@dataclass(frozen=True)
class AnnulusBump(SpectrumDescriptor):
    """Radial plateau bump at scale R: phi(|xi| / R)."""

    d: int
    R: float
    profile: RadialBump = field(default_factory=RadialBump)
    kind: str = field(default="annulus-bump", init=False)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not self.R >= 1.0:
            raise ValueError("R must be >= 1")

    @property
    def dim(self) -> int:
        return self.d

    @property
    def band_scale(self) -> float:
        return self.R

    def support_radii(self) -> tuple[float, float]:
        return self.R * self.profile.inner, self.R * self.profile.outer

    def serialize(self) -> str:
        return f"annulus-bump d={self.d} R={self.R:.17g}"


@dataclass(frozen=True)
class Modulated(SpectrumDescriptor):
    """Phase twist e^{i xi . l / R} applied to a base profile."""

    base: SpectrumDescriptor
    l: tuple[float, ...]
    R: float
    kind: str = field(default="modulated", init=False)

    def __post_init__(self):
        if len(self.l) != self.base.dim:
            raise ValueError("modulation vector dimension mismatch")
        if not self.R > 0.0:
            raise ValueError("R must be positive")

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def band_scale(self) -> float:
        return self.base.band_scale

    @property
    def shift(self) -> np.ndarray:
        """Spatial translation the modulation produces."""
        return np.asarray(self.l, dtype=float) / self.R

    def support_radii(self) -> tuple[float, float]:
        return self.base.support_radii()

    def serialize(self) -> str:
        coords = ",".join(f"{v:.17g}" for v in self.l)
        return f"modulated l={coords} R={self.R:.17g} base=({self.base.serialize()})"


def spectrum_eval(f: SpectrumDescriptor, xi):
    """Amplitude of the profile at xi (a d-vector or an (..., d) array)."""
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 0 or xi.shape[-1] != f.dim:
        raise ValueError(f"xi must have trailing dimension {f.dim}")
    if isinstance(f, Modulated):
        phase = np.exp(1j * (xi @ (np.asarray(f.l, dtype=float) / f.R)))
        return phase * spectrum_eval(f.base, xi)
    if isinstance(f, AnnulusBump):
        vals = radial_profile(f.profile, np.sqrt(np.sum(xi * xi, axis=-1)) / f.R)
        out = vals.astype(complex)
    elif f.axis_cells() is not None:
        out = np.ones(xi.shape[:-1], dtype=complex)
        for axis in range(f.dim):
            out = out * f.axis_factor(axis, xi[..., axis])
    else:
        raise ValueError(f"descriptor kind {f.kind!r} is not evaluable")
    if out.ndim == 0:
        return complex(out)
    return out


# ---------------------------------------------------------------------------
# norms


def _sphere_area(d: int) -> float:
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def _weighted_sq_integral(f: SpectrumDescriptor, s: float, rtol: float) -> float:
    """(2 pi)^{-d} integral of (1 + |xi|^2)^s |f(xi)|^2 over the support."""
    d = f.dim
    norm_const = TWO_PI ** -d
    if isinstance(f, Modulated):
        return _weighted_sq_integral(f.base, s, rtol)
    if isinstance(f, AnnulusBump):
        lo, hi = f.support_radii()

        def radial_fn(r):
            prof = radial_profile(f.profile, r / f.R)
            w = (1.0 + r * r) ** s if s != 0.0 else 1.0
            return prof * prof * w * r ** (d - 1)

        val = integrate_1d(radial_fn, lo, hi, rtol=rtol)
        return norm_const * _sphere_area(d) * val.real
    cells = f.axis_cells()
    if cells is None:
        raise ValueError(f"descriptor kind {f.kind!r} has no norm rule")
    if s == 0.0:
        total = norm_const
        for axis in range(d):
            axis_sum = 0.0
            for lo, hi in cells[axis]:
                def sq(x, _axis=axis):
                    v = f.axis_factor(_axis, x)
                    return np.abs(v) ** 2
                axis_sum += integrate_1d(sq, lo, hi, rtol=rtol).real
            total *= axis_sum
        return total
    n_boxes = int(np.prod([len(c) for c in cells]))
    if n_boxes > _MAX_NORM_CELLS:
        raise QuadratureError(
            f"{n_boxes} support cells exceed the Sobolev quadrature budget")
    import itertools

    def weighted_sq(pts):
        v = spectrum_eval(f, pts)
        w = (1.0 + np.sum(pts * pts, axis=-1)) ** s
        return np.abs(v) ** 2 * w

    total = 0.0
    for combo in itertools.product(*cells):
        lows = [c[0] for c in combo]
        highs = [c[1] for c in combo]
        total += integrate_box(weighted_sq, lows, highs, rtol=rtol).real
    return norm_const * total


def l2_norm(f: SpectrumDescriptor, *, rtol: float = 1e-10) -> float:
    """((2 pi)^{-d} integral |f|^2)^{1/2} by adaptive quadrature."""
    return math.sqrt(max(_weighted_sq_integral(f, 0.0, rtol), 0.0))


def sobolev_norm(f: SpectrumDescriptor, s: float, *, rtol: float = 1e-10) -> float:
    """((2 pi)^{-d} integral (1+|xi|^2)^s |f|^2)^{1/2}; s=0 reduces to l2_norm."""
    if s < 0.0:
        raise ValueError("s must be nonnegative")
    return math.sqrt(max(_weighted_sq_integral(f, s, rtol), 0.0))


def l1_fourier_mass(f: SpectrumDescriptor, *, rtol: float = 1e-10) -> float:
    """Integral of |f| over the support; the trivial sup bound on evolutions."""
    if isinstance(f, Modulated):
        return l1_fourier_mass(f.base, rtol=rtol)
    if isinstance(f, AnnulusBump):
        lo, hi = f.support_radii()
        d = f.dim

        def radial_fn(r):
            return np.abs(radial_profile(f.profile, r / f.R)) * r ** (d - 1)

        return _sphere_area(d) * integrate_1d(radial_fn, lo, hi, rtol=rtol).real
    cells = f.axis_cells()
    if cells is None:
        raise ValueError(f"descriptor kind {f.kind!r} has no mass rule")
    total = 1.0
    for axis in range(f.dim):
        axis_sum = 0.0
        for lo, hi in cells[axis]:
            def absfactor(x, _axis=axis):
                return np.abs(f.axis_factor(_axis, x))
            axis_sum += integrate_1d(absfactor, lo, hi, rtol=rtol).real
        total *= axis_sum
    return total
