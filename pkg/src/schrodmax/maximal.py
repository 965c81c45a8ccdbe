"""Time-suprema, ball norms, and scaling-exponent sweeps.

The field is sampled on hybrid time grids and midpoint space grids,
refined by golden-section passes around each grid argmax, and reduced
to log-log slopes against the predicted exponents.  Separable profiles
evaluate as outer products of per-axis vector integrals; radial ones
through their one-dimensional oscillatory transforms.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import jv

from .profiles import (
    AnnulusBump,
    Modulated,
    SpectrumDescriptor,
    l2_norm,
    radial_profile,
)
from .quadrature import MAX_NODES, QuadratureError, panel_nodes, panels_for_rate

TWO_PI = 2.0 * math.pi
_DECAY_CUTOFF = 46.0
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing sample times in (0, 1], with a rule label."""

    points: tuple[float, ...]
    rule: str = "explicit"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size < 1:
            raise ValueError("grid needs at least one time")
        if np.any(np.diff(pts) <= 0.0):
            raise ValueError("times must be strictly increasing")
        if pts[0] < 0.0 or pts[-1] > 1.0:
            raise ValueError("times must lie in [0, 1]")

    @property
    def count(self) -> int:
        return len(self.points)

    @property
    def t_min(self) -> float:
        return self.points[0]

    @property
    def t_max(self) -> float:
        return self.points[-1]

    @classmethod
    def hybrid(cls, R: float, *, t_max: float = 1.0, geometric: int = 64,
               cap: int = 1 << 14) -> "TimeGrid":
        """Geometric points in (0, R^-2] then uniform spacing R^-2/4 up to t_max.

        The uniform part is thinned to keep the total at or below cap.
        """
        if R < 1.0 or not 0.0 < t_max <= 1.0:
            raise ValueError("need R >= 1 and t_max in (0, 1]")
        knee = min(R ** -2.0, t_max)
        geo = knee * 2.0 ** -np.arange(geometric - 1, -1, -1, dtype=float)
        n_uni = int(math.floor((t_max - knee) / (knee / 4.0)))
        n_uni = min(n_uni, max(cap - geometric, 0))
        uni = knee + (t_max - knee) * (np.arange(1, n_uni + 1) / max(n_uni, 1))
        pts = np.unique(np.concatenate([geo, uni]))
        return cls(points=tuple(float(t) for t in pts),
                   rule=f"hybrid geometric={geometric} knee={knee:g}")


@dataclass(frozen=True)
class SpaceGrid:
    """Midpoint grid on [-radius, radius]^d restricted to the ball."""

    radius: float = 1.0
    per_axis: int = 128

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")
        if self.per_axis < 1:
            raise ValueError("per_axis must be >= 1")

    def axis_points(self) -> np.ndarray:
        step = 2.0 * self.radius / self.per_axis
        return -self.radius + (np.arange(self.per_axis) + 0.5) * step

    def cell_volume(self, d: int) -> float:
        return (2.0 * self.radius / self.per_axis) ** d


# ---------------------------------------------------------------------------
# batched field evaluation


def _bucket_indices(t: np.ndarray) -> list[np.ndarray]:
    """Group sample indices by the octave of t (t = 0 in its own group)."""
    out = []
    zero = np.nonzero(t == 0.0)[0]
    if zero.size:
        out.append(zero)
    live = np.nonzero(t > 0.0)[0]
    if live.size:
        octv = np.floor(np.log2(t[live])).astype(int)
        for o in np.unique(octv):
            out.append(live[octv == o])
    return out


def _batch_cell_integral(factor_fn, xv: np.ndarray, tv: np.ndarray,
                         decay: np.ndarray, lo: float, hi: float,
                         rate: float, rtol: float) -> np.ndarray:
    """Integrals of factor(xi) e^{i(x xi + t xi^2) - decay xi^2} over [lo, hi]."""
    panels = panels_for_rate(lo, hi, rate)
    prev = None
    while panels * 32 <= MAX_NODES:
        xi, w = panel_nodes(lo, hi, panels)
        phase = xv[:, None] * xi[None, :] + tv[:, None] * (xi * xi)[None, :]
        damp = decay[:, None] * (xi * xi)[None, :]
        vals = (factor_fn(xi)[None, :] * np.exp(1j * phase - damp)) @ w
        if prev is not None:
            scale = max(float(np.max(np.abs(vals))), 1e-300)
            if float(np.max(np.abs(vals - prev))) <= rtol * scale:
                return vals
        prev = vals
        panels *= 2
    raise QuadratureError(f"axis integral on [{lo:g}, {hi:g}] did not stabilize")


def _axis_values(f: SpectrumDescriptor, axis: int, xv: np.ndarray,
                 tv: np.ndarray, gamma: float, rtol: float) -> np.ndarray:
    """Per-axis factor integrals at paired (x_axis, t) samples."""
    out = np.zeros(xv.size, dtype=complex)
    decay_full = np.where(tv > 0.0, tv, 1.0) ** gamma * (tv > 0.0)
    cells = f.axis_cells()[axis]
    chunk_cap = 1 << 22
    for rows in _bucket_indices(tv):
        d_min = float(np.min(decay_full[rows]))
        t_hi = float(np.max(tv[rows]))
        x_hi = float(np.max(np.abs(xv[rows])))
        for lo, hi in cells:
            if d_min > 0.0:
                reach = math.sqrt(_DECAY_CUTOFF / d_min)
                lo_c, hi_c = max(lo, -reach), min(hi, reach)
            else:
                lo_c, hi_c = lo, hi
            if hi_c <= lo_c:
                continue
            rate = x_hi + 2.0 * t_hi * max(abs(lo_c), abs(hi_c))
            est_nodes = panels_for_rate(lo_c, hi_c, rate) * 32
            step = max(1, chunk_cap // max(est_nodes, 1))
            for at in range(0, rows.size, step):
                sub = rows[at:at + step]
                out[sub] += _batch_cell_integral(
                    lambda xi, _a=axis: np.asarray(f.axis_factor(_a, xi)),
                    xv[sub], tv[sub], decay_full[sub], lo_c, hi_c, rate, rtol)
    return out


def _radial_values(f: AnnulusBump, radii: np.ndarray, tv: np.ndarray,
                   gamma: float, rtol: float) -> np.ndarray:
    """|x|-dependent field values at paired (|x|, t) samples."""
    d = f.dim
    lo, hi = f.support_radii()
    out = np.zeros(radii.size, dtype=complex)
    decay_full = np.where(tv > 0.0, tv, 1.0) ** gamma * (tv > 0.0)
    nu = d / 2.0 - 1.0
    area = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
    for rows in _bucket_indices(tv):
        d_min = float(np.min(decay_full[rows]))
        hi_c = min(hi, math.sqrt(_DECAY_CUTOFF / d_min)) if d_min > 0.0 else hi
        if hi_c <= lo:
            continue
        t_hi = float(np.max(tv[rows]))
        x_hi = float(np.max(radii[rows]))
        rate = x_hi + 2.0 * t_hi * hi_c
        panels = panels_for_rate(lo, hi_c, rate)
        prev = None
        while panels * 32 <= MAX_NODES:
            rho, w = panel_nodes(lo, hi_c, panels)
            prof = radial_profile(f.profile, rho / f.R)
            lead = (1j * tv[rows, None] - decay_full[rows, None]) * (rho * rho)[None, :]
            rx = radii[rows, None] * rho[None, :]
            small = radii[rows] < 1e-300
            kern = np.where(
                small[:, None],
                area * (rho ** (d - 1))[None, :],
                TWO_PI ** (d / 2.0)
                * np.where(small, 1.0, radii[rows])[:, None] ** (1.0 - d / 2.0)
                * jv(nu, rx) * (rho ** (d / 2.0))[None, :])
            vals = (prof[None, :] * np.exp(lead) * kern) @ w * TWO_PI ** -d
            if prev is not None:
                scale = max(float(np.max(np.abs(vals))), 1e-300)
                if float(np.max(np.abs(vals - prev))) <= rtol * scale:
                    break
            prev = vals
            panels *= 2
        else:
            raise QuadratureError("radial integral did not stabilize")
        out[rows] = vals
    return out


def _field_points(f: SpectrumDescriptor, gamma: float, x: np.ndarray,
                  t: np.ndarray, rtol: float) -> np.ndarray:
    """Field values at paired samples: x is (n, d), t is (n,)."""
    if isinstance(f, Modulated):
        return _field_points(f.base, gamma, x + f.shift[None, :], t, rtol)
    if isinstance(f, AnnulusBump):
        return _radial_values(f, np.linalg.norm(x, axis=1), t, gamma, rtol)
    if f.axis_cells() is None:
        raise ValueError(f"descriptor kind {f.kind!r} is not evaluable")
    out = np.full(x.shape[0], TWO_PI ** -f.dim, dtype=complex)
    for axis in range(f.dim):
        out *= _axis_values(f, axis, x[:, axis], t, gamma, rtol)
    return out


# ---------------------------------------------------------------------------
# suprema


def _golden_refine(eval_fn, a: np.ndarray, b: np.ndarray, iters: int) -> np.ndarray:
    """Vectorized golden-section maximization of eval_fn on [a, b] per row."""
    a = np.asarray(a, dtype=float).copy()
    b = np.asarray(b, dtype=float).copy()
    x1 = a + _INVPHI2 * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1 = eval_fn(x1)
    f2 = eval_fn(x2)
    for _ in range(iters):
        take = f1 > f2
        b = np.where(take, x2, b)
        a = np.where(take, a, x1)
        h = b - a
        cand1 = a + _INVPHI2 * h
        cand2 = a + _INVPHI * h
        probe = np.where(take, cand1, cand2)
        fp = eval_fn(probe)
        x1, x2, f1, f2 = (np.where(take, cand1, x2),
                          np.where(take, x1, cand2),
                          np.where(take, fp, f2),
                          np.where(take, f1, fp))
    return np.maximum(f1, f2)


def sup_over_time(f: SpectrumDescriptor, gamma: float, x, tg: TimeGrid, *,
                  rtol: float = 1e-8, golden_iters: int = 30) -> float:
    """Grid maximum of the evolved field modulus, golden-refined in time."""
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    xv = np.asarray(x, dtype=float).reshape(1, -1)
    if xv.shape[1] != f.dim:
        raise ValueError("x dimension mismatch")
    ts = np.asarray(tg.points, dtype=float)
    vals = np.abs(_field_points(f, gamma, np.repeat(xv, ts.size, axis=0), ts, rtol))
    best = int(np.argmax(vals))
    if ts.size == 1:
        return float(vals[0])
    a = ts[max(best - 1, 0)]
    b = ts[min(best + 1, ts.size - 1)]

    def eval_fn(tq):
        return np.abs(_field_points(f, gamma, xv.repeat(tq.size, axis=0), tq, rtol))

    refined = _golden_refine(eval_fn, np.array([a]), np.array([b]), golden_iters)
    return float(max(vals[best], refined[0]))


def l2_ball_norm(values, grid: SpaceGrid) -> float:
    """Midpoint-rule L2 norm over the ball from complete grid samples."""
    values = np.asarray(values)
    d = values.ndim
    if values.shape != (grid.per_axis,) * d:
        raise ValueError("incomplete field: sample shape does not match the grid")
    if not np.all(np.isfinite(values)):
        raise ValueError("incomplete field: non-finite samples")
    pts = grid.axis_points()
    mesh = np.meshgrid(*([pts] * d), indexing="ij")
    inside = sum(g * g for g in mesh) <= grid.radius ** 2
    total = float(np.sum(np.abs(values[inside]) ** 2)) * grid.cell_volume(d)
    return math.sqrt(total)


def _sup_field_separable(f, gamma, tg, sg, rtol, golden_iters):
    pts = sg.axis_points()
    d = f.dim
    sup = np.zeros((sg.per_axis,) * d)
    arg = np.zeros((sg.per_axis,) * d, dtype=np.int64)
    const = TWO_PI ** -d
    lo_support = f.support_radii()[0]
    for k, t in enumerate(tg.points):
        decay = t ** gamma if t > 0.0 else 0.0
        if decay > 0.0 and _DECAY_CUTOFF / decay < lo_support ** 2:
            continue
        tv = np.full(pts.size, t)
        axis_mods = []
        for axis in range(d):
            axis_mods.append(np.abs(_axis_values(f, axis, pts, tv, gamma, rtol)))
        field = const * _outer_product(axis_mods)
        better = field > sup
        sup = np.where(better, field, sup)
        arg = np.where(better, k, arg)
    ts = np.asarray(tg.points)
    flat_arg = arg.ravel()
    a = ts[np.maximum(flat_arg - 1, 0)]
    b = ts[np.minimum(flat_arg + 1, ts.size - 1)]
    mesh = np.meshgrid(*([pts] * d), indexing="ij")
    coords = np.stack([g.ravel() for g in mesh], axis=-1)

    def eval_fn(tq):
        return np.abs(_field_points(f, gamma, coords, tq, rtol))

    refined = _golden_refine(eval_fn, a, b, golden_iters)
    return np.maximum(sup, refined.reshape(sup.shape))


def _outer_product(vectors: list[np.ndarray]) -> np.ndarray:
    out = vectors[0]
    for v in vectors[1:]:
        out = np.multiply.outer(out, v)
    return out


def _sup_field_radial(f, gamma, tg, sg, rtol, golden_iters, shift=None):
    pts = sg.axis_points()
    d = f.dim
    mesh = np.meshgrid(*([pts] * d), indexing="ij")
    if shift is not None:
        mesh = [g + s for g, s in zip(mesh, shift)]
    r_grid = np.sqrt(sum(g * g for g in mesh))
    radii, inverse = np.unique(np.round(r_grid.ravel(), 14), return_inverse=True)
    sup_r = np.zeros(radii.size)
    arg_r = np.zeros(radii.size, dtype=np.int64)
    lo_support = f.support_radii()[0]
    for k, t in enumerate(tg.points):
        decay = t ** gamma if t > 0.0 else 0.0
        if decay > 0.0 and _DECAY_CUTOFF / decay < lo_support ** 2:
            continue
        tv = np.full(radii.size, t)
        vals = np.abs(_radial_values(f, radii, tv, gamma, rtol))
        better = vals > sup_r
        sup_r = np.where(better, vals, sup_r)
        arg_r = np.where(better, k, arg_r)
    ts = np.asarray(tg.points)
    a = ts[np.maximum(arg_r - 1, 0)]
    b = ts[np.minimum(arg_r + 1, ts.size - 1)]

    def eval_fn(tq):
        return np.abs(_radial_values(f, radii, tq, gamma, rtol))

    refined = _golden_refine(eval_fn, a, b, golden_iters)
    sup_r = np.maximum(sup_r, refined)
    return sup_r[inverse].reshape(r_grid.shape)


def maximal_ratio(f: SpectrumDescriptor, gamma: float, grids, *,
                  rtol: float = 1e-8, golden_iters: int = 30) -> float:
    """Ball L2 norm of the time-sup field divided by the data L2 norm."""
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    tg, sg = grids
    denom = l2_norm(f)
    if denom <= 0.0:
        raise ValueError("profile has zero norm")
    base = f
    shift = np.zeros(f.dim)
    while isinstance(base, Modulated):
        shift = shift + base.shift
        base = base.base
    if isinstance(base, AnnulusBump):
        moved = shift if np.any(shift != 0.0) else None
        sup_field = _sup_field_radial(base, gamma, tg, sg, rtol, golden_iters,
                                      shift=moved)
    elif base.axis_cells() is not None:
        if np.any(shift != 0.0):
            sup_field = _sup_field_separable_shifted(base, shift, gamma, tg, sg,
                                                     rtol, golden_iters)
        else:
            sup_field = _sup_field_separable(base, gamma, tg, sg, rtol,
                                             golden_iters)
    else:
        raise ValueError(f"descriptor kind {base.kind!r} is not evaluable")
    return l2_ball_norm(sup_field, sg) / denom


def _sup_field_separable_shifted(g, shift, gamma, tg, sg, rtol, golden_iters):
    pts = sg.axis_points()
    d = g.dim
    sup = np.zeros((sg.per_axis,) * d)
    arg = np.zeros((sg.per_axis,) * d, dtype=np.int64)
    const = TWO_PI ** -d
    for k, t in enumerate(tg.points):
        tv = np.full(pts.size, t)
        axis_mods = [np.abs(_axis_values(g, axis, pts + shift[axis], tv, gamma, rtol))
                     for axis in range(d)]
        field = const * _outer_product(axis_mods)
        better = field > sup
        sup = np.where(better, field, sup)
        arg = np.where(better, k, arg)
    ts = np.asarray(tg.points)
    flat_arg = arg.ravel()
    a = ts[np.maximum(flat_arg - 1, 0)]
    b = ts[np.minimum(flat_arg + 1, ts.size - 1)]
    mesh = np.meshgrid(*([pts] * d), indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=-1) + shift[None, :]

    def eval_fn(tq):
        return np.abs(_field_points(g, gamma, coords, tq, rtol))

    refined = _golden_refine(eval_fn, a, b, golden_iters)
    return np.maximum(sup, refined.reshape(sup.shape))


# ---------------------------------------------------------------------------
# exponents and sweeps


def theoretical_exponent(d: int, gamma: float) -> float:
    """Predicted growth exponent of the maximal ratio in R."""
    if not (isinstance(d, int) and d >= 1):
        raise ValueError("d must be an integer >= 1")
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    return min(d / (2.0 * (d + 1)), (d / (d + 1)) * max(1.0 - 1.0 / gamma, 0.0))


def lemma1_bound(R: float, J_len: float, eps: float, d: int = 2) -> float:
    """Sup-count bound for a time interval of length J_len at scale R."""
    if R < 1.0:
        raise ValueError("R must be >= 1")
    if not 0.0 < J_len <= 1.0:
        raise ValueError("J_len must lie in (0, 1]")
    if J_len <= 1.0 / R:
        return 1.0 + R ** (d / (d + 1.0) + eps) * J_len ** (d / (2.0 * (d + 1)))
    return R ** (d / (2.0 * (d + 1)) + eps)


@dataclass(frozen=True)
class ScalingReport:
    """Ladder entries and the fitted log-log slope against a target."""

    entries: tuple[tuple[float, float, str], ...]
    fitted_slope: float
    slope_stderr: float
    target: float
    verdict: bool


class SweepError(RuntimeError):
    """A ladder entry failed; carries the partial report."""

    def __init__(self, message: str, partial: ScalingReport):
        super().__init__(message)
        self.partial = partial


def fit_loglog(xs, ys) -> tuple[float, float]:
    """Least-squares slope and its standard error in log-log coordinates."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    if lx.size < 2:
        raise ValueError("need at least two points to fit")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    denom = float(np.sum((lx - lx.mean()) ** 2))
    dof = max(lx.size - 2, 1)
    stderr = math.sqrt(float(np.sum(resid ** 2)) / dof / denom)
    return float(slope), stderr


def _partial_report(entries, target: float) -> ScalingReport:
    return ScalingReport(entries=tuple(entries), fitted_slope=math.nan,
                         slope_stderr=math.nan, target=target, verdict=False)


def _sweep_task(task):
    """Evaluate one sweep entry; returns a tagged result so pools can run it."""
    f, gamma, g, ratio_fn, rtol = task
    try:
        ratio = float(ratio_fn(f, gamma, g) if ratio_fn is not None
                      else maximal_ratio(f, gamma, g, rtol=rtol))
    except Exception as exc:
        return "err", f"{type(exc).__name__}: {exc}"
    return "ok", ratio


def exponent_sweep(family, gamma: float, ladder, grids, *, ratio_fn=None,
                   extremal: bool = False, rtol: float = 1e-8,
                   map_fn=map) -> ScalingReport:
    """Fit the maximal-ratio growth exponent over a geometric R ladder.

    family maps R to a descriptor; grids is a (TimeGrid, SpaceGrid) pair
    or a callable R -> pair; ratio_fn overrides maximal_ratio for
    families evaluated by another pipeline.  extremal families must
    reach the target from above (slope >= target - 0.1), the rest stay
    below (slope <= target + 0.1).  map_fn may be a pool's map; results
    merge in ladder order either way.
    """
    ladder = sorted(float(R) for R in ladder)
    if len(ladder) < 4:
        raise ValueError("ladder needs at least 4 entries")
    steps = np.diff(np.log(ladder))
    if np.max(np.abs(steps - steps[0])) > 1e-6 * abs(steps[0]):
        raise ValueError("ladder must be geometric")
    probe = family(ladder[0])
    target = theoretical_exponent(probe.dim, gamma)
    tasks, metas = [], []
    for R in ladder:
        f = family(R)
        g = grids(R) if callable(grids) else grids
        if ratio_fn is not None:
            metas.append("external-ratio")
        else:
            tg, sg = g
            metas.append(f"time={tg.count} space={sg.per_axis}^{f.dim}")
        tasks.append((f, gamma, g, ratio_fn, rtol))
    entries = []
    for R, meta, (status, payload) in zip(ladder, metas,
                                          map_fn(_sweep_task, tasks)):
        if status == "err":
            raise SweepError(f"ladder entry R={R:g} failed: {payload}",
                             _partial_report(entries, target))
        if not payload > 0.0:
            raise SweepError(f"ladder entry R={R:g} returned ratio {payload:g}",
                             _partial_report(entries, target))
        entries.append((R, payload, meta))
    slope, stderr = fit_loglog([e[0] for e in entries], [e[1] for e in entries])
    verdict = slope >= target - 0.1 if extremal else slope <= target + 0.1
    return ScalingReport(entries=tuple(entries), fitted_slope=slope,
                         slope_stderr=stderr, target=target, verdict=verdict)
