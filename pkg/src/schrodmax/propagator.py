"""Field evaluation for the free and dissipative Schrodinger evolutions.

Direct quadrature covers separable and radial profiles with
oscillation-aware node budgets.  The lattice-comb data additionally has
a factorized product evaluator whose cost scales with the comb length
instead of the full frequency box, and a summation-by-parts split of
each comb factor into a dominant term plus a bounded remainder.
"""

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import jv

from .profiles import (
    AnnulusBump,
    CounterexampleParams,
    Modulated,
    RadialBump,
    SpectrumDescriptor,
    _mollifier_raw,
    comb_range,
    mollifier_mass,
    radial_profile,
)
from .quadrature import (
    MAX_NODES,
    QuadratureError,
    integrate_1d,
    panel_nodes,
    panels_for_rate,
)

TWO_PI = 2.0 * math.pi

# e^{-x} below double-precision relevance; used to truncate dissipation
_DECAY_CUTOFF = 46.0


@dataclass(frozen=True)
class SpaceTimePoint:
    """Position and nonnegative time."""

    x: tuple[float, ...]
    t: float

    def __post_init__(self):
        if self.t < 0.0:
            raise ValueError("t must be nonnegative")
        if not all(math.isfinite(v) for v in self.x):
            raise ValueError("x must be finite")


@dataclass(frozen=True)
class FactorizedEvaluation:
    """Window factor, per-axis comb factors, and their modulus product."""

    i1: complex
    ij: tuple[complex, ...]
    product_modulus: float


@dataclass(frozen=True)
class TorusCoefficient:
    """One Fourier coefficient of the dissipated bump on the torus."""

    l: tuple[int, ...]
    t: float
    value: complex


# ---------------------------------------------------------------------------
# direct quadrature evaluation


def _truncate_cell(lo: float, hi: float, decay: float) -> tuple[float, float]:
    """Clip a cell to where exp(-decay xi^2) is above 1e-20."""
    if decay <= 0.0:
        return lo, hi
    xi_eff = math.sqrt(_DECAY_CUTOFF / decay)
    return max(lo, -xi_eff), min(hi, xi_eff)


def _axis_integral(f: SpectrumDescriptor, axis: int, x_j: float, t: float,
                   decay: float, rtol: float, max_nodes: int) -> complex:
    total = 0.0 + 0.0j
    for lo, hi in f.axis_cells()[axis]:
        lo, hi = _truncate_cell(lo, hi, decay)
        if hi <= lo:
            continue
        rate = abs(x_j) + 2.0 * t * max(abs(lo), abs(hi))

        def integrand(xi, _axis=axis):
            phase = x_j * xi + t * xi * xi
            damp = np.exp(-decay * xi * xi) if decay > 0.0 else 1.0
            return f.axis_factor(_axis, xi) * np.exp(1j * phase) * damp

        total += integrate_1d(integrand, lo, hi, rtol=rtol,
                              min_panels=panels_for_rate(lo, hi, rate),
                              max_nodes=max_nodes)
    return total


def _radial_integral(f: AnnulusBump, x: np.ndarray, t: float, decay: float,
                     rtol: float, max_nodes: int) -> complex:
    d = f.dim
    lo, hi = f.support_radii()
    if decay > 0.0:
        hi = min(hi, math.sqrt(_DECAY_CUTOFF / decay))
    if hi <= lo:
        return 0.0 + 0.0j
    x_norm = float(np.linalg.norm(x))
    rate = x_norm + 2.0 * t * hi
    lead = 1j * t - decay

    if x_norm == 0.0:
        area = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)

        def integrand(r):
            return (radial_profile(f.profile, r / f.R) * np.exp(lead * r * r)
                    * area * r ** (d - 1))
    else:
        nu = d / 2.0 - 1.0
        front = TWO_PI ** (d / 2.0) * x_norm ** (1.0 - d / 2.0)

        def integrand(r):
            return (radial_profile(f.profile, r / f.R) * np.exp(lead * r * r)
                    * front * jv(nu, r * x_norm) * r ** (d / 2.0))

    val = integrate_1d(integrand, lo, hi, rtol=rtol,
                       min_panels=panels_for_rate(lo, hi, rate),
                       max_nodes=max_nodes)
    return TWO_PI ** -d * val


def _evaluate(f: SpectrumDescriptor, x: np.ndarray, t: float, decay: float,
              rtol: float) -> complex:
    if isinstance(f, Modulated):
        return _evaluate(f.base, x + f.shift, t, decay, rtol)
    if isinstance(f, AnnulusBump):
        return _radial_integral(f, x, t, decay, rtol, MAX_NODES)
    cells = f.axis_cells()
    if cells is None:
        raise ValueError(f"descriptor kind {f.kind!r} is not evaluable")
    n_cells = sum(len(c) for c in cells)
    budget = max(MAX_NODES // max(n_cells, 1), 1 << 12)
    out = TWO_PI ** -f.dim + 0.0j
    for axis in range(f.dim):
        axis_val = _axis_integral(f, axis, float(x[axis]), t, decay, rtol, budget)
        if axis_val == 0.0:
            return 0.0 + 0.0j
        out *= axis_val
    return out


def evaluate_free(f: SpectrumDescriptor, p: SpaceTimePoint, *,
                  rtol: float = 1e-10) -> complex:
    """Free evolution (2 pi)^{-d} integral of e^{i(x.xi + t|xi|^2)} f(xi)."""
    x = np.asarray(p.x, dtype=float)
    if x.size != f.dim:
        raise ValueError(f"point dimension {x.size} does not match profile {f.dim}")
    return _evaluate(f, x, p.t, 0.0, rtol)


def evaluate_p_gamma(f: SpectrumDescriptor, gamma: float, p: SpaceTimePoint, *,
                     rtol: float = 1e-10) -> complex:
    """Dissipative evolution: the free phase damped by e^{-t^gamma |xi|^2}."""
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    x = np.asarray(p.x, dtype=float)
    if x.size != f.dim:
        raise ValueError(f"point dimension {x.size} does not match profile {f.dim}")
    decay = p.t ** gamma if p.t > 0.0 else 0.0
    return _evaluate(f, x, p.t, decay, rtol)


# ---------------------------------------------------------------------------
# the dissipative tail bound


def _ball_probe_points(d: int) -> list[np.ndarray]:
    pts = [np.zeros(d)]
    for axis in range(d):
        for sign in (1.0, -1.0):
            v = np.zeros(d)
            v[axis] = 0.6 * sign
            pts.append(v)
    for corner in range(1 << d):
        v = np.array([0.4 if corner >> a & 1 else -0.4 for a in range(d)])
        pts.append(v)
    return pts


def dissipative_tail_bound(f: SpectrumDescriptor, gamma: float, eps: float, *,
                           n_times: int = 64, rtol: float = 1e-6) -> float:
    """Bound e^{-R^eps} R^{d/2} ||f||_2 on the evolution past the time split.

    Also samples |evolution| on a (t, x) probe grid over
    t in (R^{-2/gamma+eps}, 1) and x in the unit ball, and checks the
    samples stay below ten times the bound.
    """
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    from .profiles import l2_norm

    R = f.band_scale
    bound = math.exp(-R ** eps) * R ** (f.dim / 2.0) * l2_norm(f)
    t_lo = R ** (-2.0 / gamma + eps)
    if t_lo >= 1.0:
        raise ValueError("time window is empty; R too small for this gamma, eps")
    times = np.geomspace(t_lo, 1.0, n_times + 2)[1:-1]
    worst = 0.0
    for t in times:
        for x in _ball_probe_points(f.dim):
            v = abs(evaluate_p_gamma(f, gamma, SpaceTimePoint(tuple(x), float(t)),
                                     rtol=rtol))
            worst = max(worst, v)
    if worst > 10.0 * bound:
        raise ArithmeticError(
            f"sampled evolution {worst:g} exceeds ten times the bound {bound:g}")
    return bound


# ---------------------------------------------------------------------------
# torus Fourier coefficients


def _torus_grid_size(d: int) -> int:
    return 512 if d <= 2 else 128


@functools.lru_cache(maxsize=8)
def _torus_table(t: float, R: float, gamma: float, d: int, n_grid: int):
    """Midpoint-grid samples of phi(|xi|) e^{-t^gamma R^2 |xi|^2} on [-pi, pi]^d.

    The grid is symmetric under xi -> -xi, which hands conjugate
    symmetry of the coefficients to the contraction for free.
    """
    step = TWO_PI / n_grid
    xi = -math.pi + (np.arange(n_grid) + 0.5) * step
    grids = np.meshgrid(*([xi] * d), indexing="ij")
    r = np.sqrt(sum(g * g for g in grids))
    table = radial_profile(RadialBump(), r) * np.exp(-(t ** gamma) * R * R * r * r)
    table *= (step / TWO_PI) ** d
    return xi, table


def torus_coefficient(l, t: float, R: float, gamma: float, *,
                      eps: float = 0.1) -> TorusCoefficient:
    """Fourier coefficient of the dissipated annulus bump on the torus."""
    l = tuple(int(v) for v in np.atleast_1d(l))
    d = len(l)
    if d < 1:
        raise ValueError("l must be a nonempty integer vector")
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    t_hi = R ** (-2.0 / gamma + eps)
    if not 0.0 < t <= t_hi * (1.0 + 1e-12):
        raise ValueError(f"t must lie in (0, {t_hi:g}] for R={R:g}")
    xi, table = _torus_table(float(t), float(R), float(gamma), d,
                             _torus_grid_size(d))
    vecs = [np.exp(-1j * xi * l_a) for l_a in l]
    value = np.einsum(table, list(range(d)),
                      *[arg for a, v in enumerate(vecs) for arg in (v, [a])], [])
    return TorusCoefficient(l=l, t=float(t), value=complex(value))


def torus_decay_slope(t: float, R: float, gamma: float, *, d: int = 2,
                      n_max: int = 64, floor: float = 1e-13) -> float:
    """Fitted slope of log|C_l| against log(1+|l|) along the first axis."""
    ns, mags = [], []
    for n in range(1, n_max + 1):
        l = (n,) + (0,) * (d - 1)
        c = abs(torus_coefficient(l, t, R, gamma).value)
        if c >= floor:
            ns.append(1.0 + n)
            mags.append(c)
    if len(ns) < 4:
        raise ValueError("too few coefficients above the floor to fit a slope")
    slope = np.polyfit(np.log(ns), np.log(mags), 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# factorized evaluation of the lattice-comb data


def _unit_bump(u):
    return _mollifier_raw(u) / mollifier_mass()


def _box_bounds(cp: CounterexampleParams):
    m = cp.model
    x1_lo = -cp.c1 * m.R ** (m.gamma / 2.0 - 1.0)
    return x1_lo, x1_lo / 2.0


def _check_in_box(cp: CounterexampleParams, x: np.ndarray):
    m = cp.model
    x1_lo, x1_hi = _box_bounds(cp)
    slack = 1e-9
    ok = (x[..., 0] >= x1_lo * (1.0 + slack)) & (x[..., 0] <= x1_hi * (1.0 - slack))
    for j in range(1, m.d):
        ok = ok & (np.abs(x[..., j]) <= cp.c1 * (1.0 + slack))
    if not np.all(ok):
        raise ValueError("point outside the admissible spatial box")


def _window_factor(cp: CounterexampleParams, x1: float, t: float,
                   rtol: float, gamma_eval: float | None = None) -> complex:
    m = cp.model
    ge = m.gamma if gamma_eval is None else gamma_eval
    root_r = math.sqrt(m.R)
    band = m.R ** (m.gamma / 2.0)
    lin = root_r * (x1 + 2.0 * band * t)
    decay = t ** ge if t > 0.0 else 0.0

    def integrand(u):
        phase = lin * u + m.R * u * u * t
        co = band + u * root_r
        return _unit_bump(u) * np.exp(1j * phase - decay * co * co)

    rate = abs(lin) + 2.0 * m.R * t
    return integrate_1d(integrand, -1.0, 1.0, rtol=rtol,
                        min_panels=panels_for_rate(-1.0, 1.0, rate))


def _comb_g(cp: CounterexampleParams, x_j: float, t: float, ells: np.ndarray,
            rtol: float, gamma_eval: float | None = None) -> np.ndarray:
    """Per-translate inner integrals of one comb factor."""
    m = cp.model
    ge = m.gamma if gamma_eval is None else gamma_eval
    decay = t ** ge if t > 0.0 else 0.0
    out = np.empty(ells.size, dtype=complex)
    for i, ell in enumerate(ells):
        drift = x_j + 2.0 * cp.D * t * ell

        def integrand(xi, _drift=drift, _ell=ell):
            co = xi + cp.D * _ell
            return (_unit_bump(xi)
                    * np.exp(1j * (_drift * xi + t * xi * xi) - decay * co * co))

        rate = abs(drift) + 2.0 * t
        out[i] = integrate_1d(integrand, -1.0, 1.0, rtol=rtol,
                              min_panels=panels_for_rate(-1.0, 1.0, rate))
    return out


def _lattice_phases(cp: CounterexampleParams, x_j: float, t: float,
                    ells: np.ndarray) -> np.ndarray:
    return np.exp(1j * (cp.D * ells * x_j + cp.D ** 2 * ells * ells * t))


def factorized_evaluate(cp: CounterexampleParams, p: SpaceTimePoint, *,
                        rtol: float = 1e-10,
                        gamma_eval: float | None = None) -> FactorizedEvaluation:
    """Product-form evaluation of the comb data's evolution.

    The product of the factor moduli equals (2 pi)^d times the modulus
    of the direct evolution; a global phase on the first axis is
    dropped.
    """
    m = cp.model
    x = np.asarray(p.x, dtype=float)
    if x.size != m.d:
        raise ValueError(f"point dimension {x.size} does not match d={m.d}")
    _check_in_box(cp, x)
    i1 = _window_factor(cp, float(x[0]), p.t, rtol, gamma_eval)
    start, stop = comb_range(cp)
    ells = np.arange(start, stop, dtype=float)
    ij = []
    for j in range(1, m.d):
        g = _comb_g(cp, float(x[j]), p.t, ells, rtol, gamma_eval)
        ij.append(complex(np.sum(_lattice_phases(cp, float(x[j]), p.t, ells) * g)))
    modulus = abs(i1) * float(np.prod([abs(v) for v in ij])) if ij else abs(i1)
    return FactorizedEvaluation(i1=i1, ij=tuple(ij), product_modulus=modulus)


def abel_main_plus_error(cp: CounterexampleParams, p: SpaceTimePoint, j: int, *,
                         rtol: float = 1e-10) -> tuple[complex, float]:
    """Dominant term and remainder bound for one comb factor.

    j is the 0-based spatial axis; axes 1 .. d-1 carry comb factors.
    Returns (main, e1_bound) with main the full lattice sum times the
    inner integral at the top translate, and e1_bound an a-priori bound
    on |factor - main| via summation by parts.
    """
    m = cp.model
    if not 1 <= j < m.d:
        raise ValueError(f"axis j must be in [1, {m.d - 1}]")
    x = np.asarray(p.x, dtype=float)
    _check_in_box(cp, x)
    x_j, t = float(x[j]), p.t
    start, stop = comb_range(cp)
    ells = np.arange(start, stop, dtype=float)
    phases = _lattice_phases(cp, x_j, t, ells)
    partial = np.cumsum(phases)
    sup_s = float(np.max(np.abs(partial)))
    top = float(stop - 1)
    g_top = _comb_g(cp, x_j, t, np.array([top]), rtol)[0]
    main = complex(partial[-1] * g_top)
    band = m.R ** (m.gamma / 2.0)
    e1_bound = 4.0 * (band * t + (t * m.R) ** m.gamma) * sup_s
    return main, e1_bound


# ---------------------------------------------------------------------------
# batched factorized evaluation (vectorized across sample points)


def _batch_window(cp: CounterexampleParams, x1: np.ndarray, t: np.ndarray,
                  panels: int, order: int,
                  gamma_eval: float | None = None) -> np.ndarray:
    m = cp.model
    ge = m.gamma if gamma_eval is None else gamma_eval
    root_r = math.sqrt(m.R)
    band = m.R ** (m.gamma / 2.0)
    u, w = panel_nodes(-1.0, 1.0, panels, order)
    lin = root_r * (x1 + 2.0 * band * t)
    phase = lin[:, None] * u[None, :] + (m.R * t)[:, None] * (u * u)[None, :]
    co = band + u * root_r
    decay = (t ** ge)[:, None] * (co * co)[None, :]
    vals = _unit_bump(u)[None, :] * np.exp(1j * phase - decay)
    return vals @ w


def _batch_comb(cp: CounterexampleParams, xj: np.ndarray, t: np.ndarray,
                ells: np.ndarray, panels: int, order: int,
                gamma_eval: float | None = None) -> np.ndarray:
    m = cp.model
    ge = m.gamma if gamma_eval is None else gamma_eval
    xi, w = panel_nodes(-1.0, 1.0, panels, order)
    drift = xj[:, None] + 2.0 * cp.D * t[:, None] * ells[None, :]
    phase = (drift[:, :, None] * xi[None, None, :]
             + t[:, None, None] * (xi * xi)[None, None, :])
    co = xi[None, None, :] + cp.D * ells[None, :, None]
    decay = (t ** ge)[:, None, None] * (co * co)
    g = (_unit_bump(xi)[None, None, :] * np.exp(1j * phase - decay)) @ w
    lattice = np.exp(1j * (cp.D * np.outer(xj, ells)
                           + cp.D ** 2 * np.outer(t, ells * ells)))
    return np.sum(lattice * g, axis=1)


def _factorized_batch(cp: CounterexampleParams, x: np.ndarray, t: np.ndarray, *,
                      order: int = 64, rtol: float = 1e-9,
                      gamma_eval: float | None = None):
    """Factor arrays for many points: (i1, ij matrix, modulus product).

    Panel counts start from the worst-case phase rate over the batch
    and double until the factor values stabilize.
    """
    m = cp.model
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if x.ndim != 2 or x.shape[1] != m.d or t.shape != (x.shape[0],):
        raise ValueError("x must be (n, d) and t (n,)")
    _check_in_box(cp, x)
    if np.any(t < 0.0):
        raise ValueError("t must be nonnegative")
    n = x.shape[0]
    start, stop = comb_range(cp)
    ells = np.arange(start, stop, dtype=float)
    band = m.R ** (m.gamma / 2.0)
    root_r = math.sqrt(m.R)
    t_max = float(np.max(t, initial=0.0))

    rate1 = float(np.max(np.abs(root_r * (x[:, 0] + 2.0 * band * t)), initial=0.0)
                  ) + 2.0 * m.R * t_max
    panels1 = panels_for_rate(-1.0, 1.0, rate1, order)
    i1 = _batch_window(cp, x[:, 0], t, panels1, order, gamma_eval)
    while True:
        panels1 *= 2
        if panels1 * order > MAX_NODES:
            raise QuadratureError("window factor batch did not stabilize")
        refined = _batch_window(cp, x[:, 0], t, panels1, order, gamma_eval)
        if np.max(np.abs(refined - i1)) <= rtol * max(np.max(np.abs(refined)), 1e-300):
            i1 = refined
            break
        i1 = refined

    ij = np.empty((n, m.d - 1), dtype=complex)
    chunk = max(1, (1 << 22) // max(ells.size * order, 1))
    for j in range(1, m.d):
        rate_j = (float(np.max(np.abs(x[:, j]))) + 2.0 * cp.D * t_max * float(stop)
                  + 2.0 * t_max)
        panels_j = panels_for_rate(-1.0, 1.0, rate_j, order)
        for lo in range(0, n, chunk):
            hi = min(lo + chunk, n)
            pj = panels_j
            val = _batch_comb(cp, x[lo:hi, j], t[lo:hi], ells, pj, order, gamma_eval)
            while True:
                pj *= 2
                if pj * order > MAX_NODES // max(ells.size, 1):
                    raise QuadratureError("comb factor batch did not stabilize")
                refined = _batch_comb(cp, x[lo:hi, j], t[lo:hi], ells, pj, order,
                                      gamma_eval)
                scale = max(float(np.max(np.abs(refined))), 1e-300)
                if np.max(np.abs(refined - val)) <= rtol * scale * ells.size:
                    val = refined
                    break
                val = refined
            ij[lo:hi, j - 1] = val
    modulus = np.abs(i1) * np.prod(np.abs(ij), axis=1)
    return i1, ij, modulus
