import numpy as np
import pytest

from funnelkit.conservation import Field, SchemeConfig, l1_distance, solve
from funnelkit.errors import NotTubular, PreconditionError
from funnelkit.estimates import (contraction_check, data_envelope, domain_of_dependence,
                                 kruzkov_ball, perturbation_test, support_envelope)
from funnelkit.fluxes import burgers, linear_advection, shear_flux
from funnelkit.geometry import (Grid, box_set, dilate, hausdorff_distance, point_set,
                                support_of_field)
from funnelkit.inclusion import envelope_constant, envelope_exponential, envelope_perturbed

G = Grid.box((-2,), (3,), 512)
H = G.spacing


def indicator(grid, lo, hi):
    return Field.from_function(grid, lambda P: ((P[..., 0] >= lo) & (P[..., 0] <= hi)).astype(float))


def extent(S):
    p = S.points()[:, 0]
    return p.min(), p.max()


# --- contraction --------------------------------------------------------------

def test_contraction_identical_data():
    u0 = indicator(G, -1, 0)
    rep = contraction_check(burgers(), u0, u0, box_set(G, (0.4,), (0.6,)), 0.0, 0.5)
    assert rep.lhs == 0 and rep.rhs == 0


def test_contraction_regression_pair():
    rep = contraction_check(burgers(), indicator(G, -1, 0), indicator(G, -1, 0.1),
                            box_set(G, (0.4,), (0.6,)), 0.0, 0.5)
    assert rep.slack >= -2 * H
    assert rep.lhs >= 0 and rep.rhs >= 0
    assert set(rep.to_dict()) >= {"lhs", "rhs", "slack"}


def test_contraction_mass_form():
    # with zero comparison data the inequality bounds the mass in K
    u0 = indicator(G, -1, 0)
    zero = Field(G, 0.0, np.zeros(G.shape))
    K = box_set(G, (0.0,), (0.5,))
    rep = contraction_check(burgers(), u0, zero, K, 0.0, 0.5)
    u = solve(burgers(), u0, 0.5, SchemeConfig(store=1)).final
    assert rep.lhs == pytest.approx(float(u.values[K.mask].sum() * H))
    assert rep.slack >= -2 * H


def test_contraction_intermediate_time_and_heterogeneous():
    flux = shear_flux(0.5, 2.0)
    rep = contraction_check(flux, indicator(G, -0.5, 0.3), indicator(G, -0.4, 0.5),
                            box_set(G, (0.0,), (0.4,)), 0.2, 0.5)
    assert rep.slack >= -2 * H
    assert rep.tau0 == 0.2


def test_contraction_requires_tubular_K():
    u0 = indicator(G, -1, 0)
    with pytest.raises(NotTubular):
        contraction_check(burgers(), u0, u0, point_set(G, (0.5,)), 0.0, 0.5)
    with pytest.raises(ValueError):
        contraction_check(burgers(), u0, u0, box_set(G, (0.4,), (0.6,)), 0.5, 0.2)


# --- domain of dependence -----------------------------------------------------

def test_dod_linear_advection():
    x = G.centers()[G.index((0.5,))][0]
    est = domain_of_dependence(linear_advection(0.8), 0, 1, [x], 1.0, G)
    lo, hi = extent(est.set)
    assert abs(lo - (x - 0.8)) <= 2 * H and abs(hi - (x - 0.8)) <= 2 * H


def test_dod_burgers_interval():
    x, t = 0.5, 0.8
    est = domain_of_dependence(burgers(), 0, 1, [x], t, G)
    lo, hi = extent(est.set)
    c = G.centers()[G.index((x,))][0]
    assert lo <= c - t + H and hi >= c - H
    assert est.set.issubset(dilate(point_set(G, (x,)), 1.0 * t + H))
    assert est.to_dict()["cells"] == est.set.count


@pytest.mark.parametrize("flux", [burgers(), shear_flux(0.5, 2.0)])
def test_dod_inside_kruzkov_ball(flux):
    t = 0.6
    env = envelope_exponential(-0.5, 1, flux.L1)
    est = domain_of_dependence(flux, -0.5, 1, [0.3], t, G, env=env)
    lo, hi = env.interval(0, t)
    cmax = flux.speed_bound(G, lo, hi, 0, t)
    assert est.set.issubset(dilate(kruzkov_ball(G, [0.3], t, cmax), H))


def test_dod_shrinks_with_tighter_envelope():
    small = domain_of_dependence(burgers(), 0, 0.5, [0.3], 0.6, G)
    big = domain_of_dependence(burgers(), -0.5, 1, [0.3], 0.6, G)
    assert small.set.issubset(big.set)


def test_dod_errors():
    with pytest.raises(ValueError):
        domain_of_dependence(burgers(), 0, 1, [0.0], 0.0, G)
    with pytest.raises(ValueError):
        domain_of_dependence(burgers(), 1, 0, [0.0], 0.5, G)


# --- perturbation -------------------------------------------------------------

GP = Grid.box((-2,), (3,), 1024)


def perturbation_setup(flux, distance, side, eps=0.1, x=0.5, t=0.5):
    u0 = indicator(GP, -1, 0)
    env = envelope_perturbed(0, 1, flux.L1, 1, eps)
    est = domain_of_dependence(flux, 0, 0, [x], t, GP, env=env, radius=5 * GP.spacing)
    lo, hi = extent(est.set)
    if side > 0:
        w = indicator(GP, hi + distance, hi + distance + 0.2)
    else:
        w = indicator(GP, lo - distance - 0.2, lo - distance)
    return u0, w


def test_perturbation_zero_w():
    u0 = indicator(GP, -1, 0)
    rep = perturbation_test(burgers(), u0, Field(GP, 0.0, np.zeros(GP.shape)), [0.5], 0.5)
    assert rep.difference == 0 and rep.distance == np.inf


def test_perturbation_advection_ahead():
    flux = linear_advection(1.0)
    u0, w = perturbation_setup(flux, 0.3, +1)
    assert perturbation_test(flux, u0, w, [0.5], 0.5).difference <= 1e-12


@pytest.mark.parametrize("side", [-1, 1])
def test_perturbation_burgers_sweep(side):
    diffs = []
    for d in (0.3, 0.4, 0.5):
        u0, w = perturbation_setup(burgers(), d, side)
        rep = perturbation_test(burgers(), u0, w, [0.5], 0.5)
        assert rep.distance >= d - 2 * GP.spacing
        diffs.append(rep.difference)
    assert max(diffs) <= 1e-6
    assert all(b <= a for a, b in zip(diffs, diffs[1:]))


def test_perturbation_eps_sweep():
    ests = []
    for eps in (0.2, 0.1, 0.05, 0.0):
        u0, w = perturbation_setup(burgers(), 0.3, +1, eps=0.2)
        rep = perturbation_test(burgers(), u0, w, [0.5], 0.5, eps=eps)
        assert rep.difference <= 1e-6
        ests.append(rep.estimate.set)
    dist = [hausdorff_distance(s, ests[-1]) for s in ests[:-1]]
    assert all(b <= a + 1e-12 for a, b in zip(dist, dist[1:]))


def test_perturbation_preconditions():
    u0 = indicator(GP, -1, 0)
    w = indicator(GP, 0.4, 0.6)
    with pytest.raises(PreconditionError):
        perturbation_test(burgers(), u0, w, [0.5], 0.5)
    with pytest.raises(PreconditionError):
        perturbation_test(burgers(), u0, w.copy(values=2 * w.values), [0.5], 0.5)


# --- support ------------------------------------------------------------------

def test_support_box_burgers():
    u0 = indicator(G, -1, 1)
    fn, traj, rep = support_envelope(burgers(), u0, 1.0, SchemeConfig(store=10, scheme="godunov"))
    assert rep.passed and rep.worst_protrusion <= 2
    lo, hi = extent(fn.slice_at(1.0))
    assert abs(lo + 1) <= 2 * H and abs(hi - 2) <= 2 * H
    for f in traj.fields:
        S = support_of_field(f.raster(), 1e-12)
        slo, shi = extent(S)
        assert slo >= -1 - 2 * H and shi <= 1 + f.time + 2 * H


def test_support_zero_data():
    fn, traj, rep = support_envelope(burgers(), Field(G, 0.0, np.zeros(G.shape)), 0.5)
    assert fn is None and rep.passed and rep.worst_protrusion == 0


def test_support_rejects_negative_data():
    with pytest.raises(PreconditionError):
        support_envelope(burgers(), indicator(G, -1, 1).copy(values=-indicator(G, -1, 1).values), 0.5)


def test_data_envelope():
    env = data_envelope(burgers(), indicator(G, -1, 0), Field(G, 0.0, np.full(G.shape, -0.2)))
    assert (env.a(0), env.b(0)) == (-0.2, 1.0)
    assert data_envelope(burgers(), indicator(G, 0, 1), eps=0.1).kind == "perturbed"
    assert envelope_constant(0, 1).kind == "constant"
