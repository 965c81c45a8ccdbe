from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from schrodmax.counterexample import (
    ExperimentError,
    OmegaCell,
    OmegaStarSample,
    RationalAnchor,
    anchors_in_window,
    calibration_constants,
    enumerate_anchors,
    error_budget,
    lattice_sum_S,
    lattice_sum_S_tilde,
    lower_bound_experiment,
    omega_cells,
    omega_measure_lower,
    omega_multiplicity,
    omega_star_chain_bound,
    omega_star_measure,
    sample_omega_star,
    select_time,
    v2_measure_lower,
)
from schrodmax.numbertheory import PreconditionError
from schrodmax.profiles import CounterexampleParams, ModelParams, comb_range
from schrodmax.propagator import SpaceTimePoint, factorized_evaluate

TWO_PI = 2.0 * math.pi


def _exp_params(R=2.0**16, d=2, gamma=2.0):
    return CounterexampleParams.for_experiments(
        ModelParams(d=d, gamma=gamma, R=float(R)))


def _def_params(R=2.0**16, d=2, gamma=2.0):
    return CounterexampleParams.with_defaults(
        ModelParams(d=d, gamma=gamma, R=float(R)))


def test_rational_anchor_validation():
    RationalAnchor(q=8, a1=3, a_rest=(2,))
    with pytest.raises(ValueError):
        RationalAnchor(q=6, a1=1, a_rest=(2,))
    with pytest.raises(ValueError):
        RationalAnchor(q=8, a1=2, a_rest=(2,))
    with pytest.raises(ValueError):
        RationalAnchor(q=8, a1=3, a_rest=(3,))
    with pytest.raises(ValueError):
        RationalAnchor(q=8, a1=3, a_rest=(6,))
    with pytest.raises(ValueError):
        RationalAnchor(q=8, a1=0, a_rest=(2,))


def test_omega_cell_validation_and_volume():
    a = RationalAnchor(q=8, a1=3, a_rest=(2,))
    cell = OmegaCell(anchor=a, center=(0.1, 0.2), half_widths=(0.01, 0.02))
    assert cell.volume == pytest.approx(4 * 0.01 * 0.02)
    with pytest.raises(ValueError):
        OmegaCell(anchor=a, center=(0.1,), half_widths=(0.01, 0.02))
    with pytest.raises(ValueError):
        OmegaCell(anchor=a, center=(0.1, 0.2), half_widths=(0.01, 0.0))


def test_anchor_enumeration_counts():
    assert len(enumerate_anchors(_exp_params(2.0**16))) == 142
    assert len(enumerate_anchors(_exp_params(2.0**24))) == 1922


def test_anchor_enumeration_subsample():
    cp = _exp_params()
    full = enumerate_anchors(cp)
    sub = enumerate_anchors(cp, limit=20, seed=4)
    assert len(sub) == 20
    assert set(sub) <= set(full)
    assert sub == enumerate_anchors(cp, limit=20, seed=4)
    assert sub != enumerate_anchors(cp, limit=20, seed=5)


def test_window_filter_matches_enumerated_window():
    cp = _exp_params()
    kept = anchors_in_window(cp, enumerate_anchors(cp))
    assert len(kept) == 11
    assert sorted({(a.q, a.a1) for a in kept}) == [(20, 1), (24, 1)]


def test_cells_sit_at_rational_points():
    cp = _exp_params()
    anchors = enumerate_anchors(cp, limit=5, seed=0)
    cells = omega_cells(cp, anchors)
    for a, cell in zip(anchors, cells):
        assert cell.center[0] == pytest.approx(TWO_PI * a.a1 / a.q)
        assert cell.center[1] == pytest.approx(TWO_PI * a.a_rest[0] / a.q)
        assert cell.half_widths[0] != cell.half_widths[1]


def test_measure_lower_bounds_frozen():
    cp = _def_params()
    assert v2_measure_lower(cp) == pytest.approx(1.0 / 96.0)
    assert omega_measure_lower(cp) == pytest.approx(2.5165295374888564e-06)
    assert omega_star_chain_bound(cp) == pytest.approx(3.890651724384701e-12)


def test_multiplicity_counts_cells():
    cp = _exp_params()
    cells = omega_cells(cp, enumerate_anchors(cp))
    centers = np.array([c.center for c in cells[:40]])
    assert np.all(omega_multiplicity(cp, centers) >= 1)
    assert omega_multiplicity(cp, [(1.2345, 2.3456)])[0] == 0
    with pytest.raises(ValueError):
        omega_multiplicity(cp, [(0.1, 0.2, 0.3)])


def test_sampler_needs_one_lattice_period():
    with pytest.raises(PreconditionError):
        sample_omega_star(_def_params(2.0**10), 16, seed=0)


def test_sampled_points_satisfy_congruences():
    cp = _exp_params()
    samples = sample_omega_star(cp, 500, seed=2)
    assert len(samples) == 500
    mp = cp.model
    M1 = cp.D**2 / (2.0 * mp.R ** (mp.gamma / 2.0))
    saw_valid = 0
    for smp in samples:
        assert smp.weight >= 0.0
        if smp.x is None:
            assert smp.weight == 0.0
            continue
        saw_valid += 1
        r1 = (-M1 * smp.x[0] - smp.y[0]) % TWO_PI
        rj = (cp.D * smp.x[1] - smp.y[1]) % TWO_PI
        assert min(r1, TWO_PI - r1) <= 1e-9
        assert min(rj, TWO_PI - rj) <= 1e-9
        assert -cp.c1 <= smp.x[1] <= cp.c1
    assert saw_valid > 0


def test_measure_estimate_statistics():
    mean, err = omega_star_measure(
        [OmegaStarSample(anchor=RationalAnchor(q=8, a1=3, a_rest=(2,)),
                         y=(0.0, 0.0), x=None, weight=w)
         for w in (0.0, 1.0, 2.0, 3.0)])
    assert mean == pytest.approx(1.5)
    assert err == pytest.approx(np.std([0, 1, 2, 3], ddof=1) / 2.0)
    with pytest.raises(ValueError):
        omega_star_measure([])


def test_selected_time_is_resonant():
    cp = _exp_params()
    valid = [s for s in sample_omega_star(cp, 400, seed=3) if s.x is not None]
    assert valid
    for smp in valid[:50]:
        t = select_time(cp, smp)
        assert t > 0.0
        gap = (cp.D**2 * t - TWO_PI * smp.anchor.a1 / smp.anchor.q) % TWO_PI
        assert min(gap, TWO_PI - gap) <= 1e-6
    with pytest.raises(ValueError):
        select_time(cp, OmegaStarSample(anchor=valid[0].anchor,
                                        y=valid[0].y, x=None, weight=0.0))


def _full_translate_u(cp):
    return 2.0 * cp.model.R ** (cp.model.gamma / 2.0) / cp.D


def test_lattice_sum_brute_force_oracle():
    cp = _exp_params()
    start, stop = comb_range(cp)
    x_rest = (0.0123,)
    t = 3.7e-9
    u = start + 7.5
    per_axis, prod = lattice_sum_S(cp, x_rest, t, u)
    want = sum(cmath.exp(1j * (cp.D * x_rest[0] * l + cp.D**2 * t * l * l))
               for l in range(start, start + 8))
    assert per_axis[0] == pytest.approx(want, rel=1e-9)
    assert prod == pytest.approx(want, rel=1e-9)


def test_lattice_sum_range_handling():
    cp = _exp_params()
    start, stop = comb_range(cp)
    lo_real = cp.model.R ** (cp.model.gamma / 2.0) / cp.D
    per_axis, prod = lattice_sum_S(cp, (0.0,), 0.0, start + 0.0)
    assert per_axis == (0j,) and prod == 0j
    with pytest.raises(ValueError):
        lattice_sum_S(cp, (0.0,), 0.0, lo_real - 0.05)
    with pytest.raises(ValueError):
        lattice_sum_S(cp, (0.0,), 0.0, stop + 1.0)
    with pytest.raises(ValueError):
        lattice_sum_S(cp, (0.0, 0.0), 0.0, start + 2.0)


def test_lattice_sum_counts_at_zero_phase():
    cp = _exp_params()
    start, stop = comb_range(cp)
    per_axis, prod = lattice_sum_S(cp, (0.0,), 0.0, float(stop))
    assert per_axis[0] == pytest.approx(stop - start)
    assert prod == pytest.approx(stop - start)


def test_rational_twin_matches_generic_sum_at_anchor():
    cp = _exp_params()
    a = RationalAnchor(q=20, a1=1, a_rest=(2,))
    t = TWO_PI * a.a1 / (a.q * cp.D**2)
    x_rest = (TWO_PI * a.a_rest[0] / (a.q * cp.D),)
    u = _full_translate_u(cp)
    _, s_prod = lattice_sum_S(cp, x_rest, t, u)
    _, twin_prod = lattice_sum_S_tilde(cp, a, TWO_PI * a.a1 / a.q, u)
    assert s_prod == pytest.approx(twin_prod, rel=1e-8)
    with pytest.raises(ValueError):
        lattice_sum_S_tilde(cp, RationalAnchor(q=8, a1=3, a_rest=(2, 2)),
                            0.1, u)


def test_calibration_constants_frozen():
    cal = calibration_constants(2, 2.0)
    assert cal["c_gauss"] == pytest.approx(0.3365303166018033, rel=1e-12)
    assert cal["c_delta0"] == pytest.approx(0.2944772402556042, rel=1e-12)
    assert cal["cases"] == 202
    assert calibration_constants(2, 2.0) is cal


def test_error_budget_flag_matches_threshold():
    cp = _exp_params()
    valid = [s for s in sample_omega_star(cp, 300, seed=5) if s.x is not None]
    mp = cp.model
    scale = mp.R ** (mp.gamma / 2.0) / (cp.D * math.sqrt(cp.Q))
    threshold = 2.0 ** (-(mp.d + 5) / 2.0) * scale ** (mp.d - 1)
    for smp in valid[:20]:
        t = select_time(cp, smp)
        e1, e2, ok = error_budget(cp, smp, t)
        assert e1 > 0.0 and e2 > 0.0
        assert ok == (e1 <= threshold and e2 <= threshold)


def test_tail_product_dominates_budgeted_main_term():
    cp = _exp_params(2.0**19)
    mp = cp.model
    d = mp.d
    band = mp.R ** (mp.gamma / 2.0)
    scale = band / (cp.D * math.sqrt(cp.Q))
    floor = (2.0 ** ((1 - d) / 2.0) * (1.0 - cp.c0) ** (d - 1)
             - 2.0 ** (-(d + 3) / 2.0)) * scale ** (d - 1)
    assert floor > 0.0
    checked = admissible = 0
    for smp in sample_omega_star(cp, 800, seed=7):
        if smp.x is None:
            continue
        try:
            t = select_time(cp, smp)
        except PreconditionError:
            continue
        fac = factorized_evaluate(cp, SpaceTimePoint(x=smp.x, t=t))
        tail = float(np.prod(np.abs(fac.ij)))
        e1, e2, ok = error_budget(cp, smp, t)
        main = ((1.0 - cp.c0) * math.sqrt(2.0) * band
                / (cp.D * math.sqrt(smp.anchor.q))) ** (d - 1)
        assert tail >= main - e1 - e2 - 1e-9 * main
        checked += 1
        if ok:
            assert main - e1 - e2 >= floor * (1.0 - 1e-12)
            admissible += 1
        if checked >= 25:
            break
    assert checked == 25 and admissible >= 3


def _exp_ladder(lo_k, hi_k):
    return [_exp_params(2.0**k) for k in range(lo_k, hi_k + 1)]


def test_experiment_ladder_validation():
    ladder = _exp_ladder(16, 19)
    with pytest.raises(ValueError):
        lower_bound_experiment(ladder[:3], 100, 0)
    with pytest.raises(ValueError):
        lower_bound_experiment(list(reversed(ladder)), 100, 0)
    with pytest.raises(ValueError):
        lower_bound_experiment(
            [_exp_params(R) for R in (2.0**16, 2.0**17, 2.0**18, 2.0**20)],
            100, 0)
    with pytest.raises(ValueError):
        lower_bound_experiment(ladder, 1, 0)
    with pytest.raises(ValueError):
        lower_bound_experiment(ladder, 100, 0, gamma_eval=1.5)
    mixed = ladder[:3] + [_exp_params(2.0**19, gamma=1.5)]
    with pytest.raises(ValueError):
        lower_bound_experiment(mixed, 100, 0)


def test_experiment_reports_all_aborts():
    ladder = [_def_params(2.0**k) for k in range(8, 12)]
    with pytest.raises(ExperimentError) as info:
        lower_bound_experiment(ladder, 50, 0)
    assert len(info.value.aborted) == 4
    for R, why in info.value.aborted:
        assert R in {2.0**k for k in range(8, 12)}
        assert why


def test_experiment_deterministic_and_pool_invariant():
    ladder = _exp_ladder(16, 19)
    rep1 = lower_bound_experiment(ladder, 300, 7)
    rep2 = lower_bound_experiment(ladder, 300, 7)
    assert rep1 == rep2
    with ThreadPoolExecutor(max_workers=3) as pool:
        rep3 = lower_bound_experiment(ladder, 300, 7, map_fn=pool.map)
    assert rep3 == rep1
    assert lower_bound_experiment(ladder, 300, 8) != rep1


def test_experiment_record_contents():
    rep = lower_bound_experiment(_exp_ladder(16, 19), 300, 7)
    assert rep.point_target == pytest.approx(0.25)
    assert rep.ratio_target == pytest.approx(1.0 / 3.0)
    assert rep.c_gauss == pytest.approx(0.3365303166018033)
    assert len(rep.records) == 4
    for rec in rep.records:
        assert rec.n_valid <= rec.n_samples == 300
        assert rec.measure_estimate > 0.0
        assert rec.mean_sq_modulus > 0.0
        assert rec.sobolev > 0.0
        assert rec.ratio_estimate == pytest.approx(
            math.sqrt(rec.measure_estimate * rec.mean_sq_modulus)
            / rec.sobolev)
        assert 0.0 <= rec.admissible_fraction <= 1.0
        assert rec.anchors_in_window <= rec.anchors_total


def test_experiment_sobolev_weight_lowers_ratio():
    ladder = _exp_ladder(16, 19)
    flat = lower_bound_experiment(ladder, 200, 3)
    weighted = lower_bound_experiment(ladder, 200, 3, s=1.0 / 3.0)
    assert weighted.ratio_target == pytest.approx(0.0)
    for a, b in zip(flat.records, weighted.records):
        assert b.sobolev > a.sobolev
        assert b.ratio_estimate < a.ratio_estimate
        assert b.mean_sq_modulus == a.mean_sq_modulus
