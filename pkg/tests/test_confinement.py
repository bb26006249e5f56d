import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import ndimage
from scipy.integrate import solve_ivp

from funnelkit.confinement import (ConfinementScenario, ControlledField, GTerm, ScenarioError,
                                   check_condition, condition_lhs, controlled_velocity_set,
                                   make_psi, psi_constant, psi_powerlaw, psi_table,
                                   rotating_control, simulate_confinement)
from funnelkit.errors import PreconditionError
from funnelkit.geometry import GridSet, ball, dilate, hausdorff_distance, point_set
from funnelkit.inclusion import propagate_funnel


def scenario(k=1.0, c=0.5, kind="linear", Rminus=1.0, Rplus=1.5, **kw):
    G = GTerm(kind if c > 0 else "zero", c)
    return ConfinementScenario(2, psi_constant(-k), G, R=kw.pop("R", 1.0), Rminus=Rminus,
                               Rplus=Rplus, **kw)


# --- integral condition -------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4])
def test_condition_zero_psi(n):
    assert condition_lhs(psi_constant(0.0), n, 1.0, 0.7) == 0


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("Rstar", [0.5, 1.0, 2.0])
def test_condition_constant_closed_form(n, k, Rstar):
    for R in (0.3, 1.0, 2.5):
        assert condition_lhs(psi_constant(-k), n, R, Rstar) == pytest.approx(-k * Rstar, abs=1e-9)


@given(st.floats(-3, 3), st.floats(0.1, 3), st.floats(0.1, 3), st.sampled_from([2, 3, 5]))
def test_condition_linear_in_psi(lam, R, Rstar, n):
    psi = psi_powerlaw(-0.7, 1.5, 0.2)
    scaled = psi_powerlaw(-0.7 * lam, 1.5, 0.2 * lam)
    assert condition_lhs(scaled, n, R, Rstar) == pytest.approx(lam * condition_lhs(psi, n, R, Rstar),
                                                               rel=1e-9, abs=1e-12)


@given(st.floats(0.1, 3), st.floats(0.1, 3), st.sampled_from([2, 3]))
def test_quadrature_converged(R, Rstar, n):
    psi = make_psi({"kind": "powerlaw", "params": {"coef": -1.0, "power": 2.0, "offset": 0.5}})
    a = condition_lhs(psi, n, R, Rstar, nodes=64)
    b = condition_lhs(psi, n, R, Rstar, nodes=128)
    assert a == pytest.approx(b, abs=1e-10)


def test_condition_vectorised_and_errors():
    vals = condition_lhs(psi_constant(-1.0), 2, 1.0, np.array([0.5, 1.0]))
    assert np.allclose(vals, [-0.5, -1.0])
    with pytest.raises(ValueError):
        condition_lhs(psi_constant(-1.0), 1, 1.0, 1.0)
    with pytest.raises(ValueError):
        condition_lhs(psi_table([0, 1], [0, 0]), 2, 1.0, 1.0)  # table too short


def test_check_condition_examples():
    for k, expected in ((0.4, False), (0.6, True), (1.0, True)):
        assert check_condition(scenario(k=k, c=0.5)).verdict is expected
    rep = check_condition(scenario(k=1.0, c=0.5))
    assert rep.margin == pytest.approx(0.5, abs=1e-9)
    assert rep.worst_Rstar == pytest.approx(1.0)
    assert rep.samples >= 101
    assert not check_condition(ConfinementScenario(2, psi_constant(0.0), GTerm("zero", 0.0), 1, 1, 2)).verdict
    assert not check_condition(scenario(k=1.0, c=10.0, Rminus=5.0, Rplus=5.0)).verdict


def test_profiles_and_scenario_validation(tmp_path):
    tab = psi_table([0, 1, 2], [0, -1, -2])
    assert float(tab(1.5)) == pytest.approx(-1.5)
    with pytest.raises(ValueError):
        tab(3.0)
    with pytest.raises(ScenarioError) as err:
        make_psi({"kind": "spline"})
    assert err.value.key == "psi"
    with pytest.raises(ScenarioError):
        scenario(Rminus=2.0, Rplus=1.0)
    with pytest.raises(ValueError):
        GTerm("linear", -1.0)
    desc = {"n": 2, "psi": {"kind": "constant", "params": {"value": -1}},
            "G": {"kind": "linear", "params": {}, "c": 0.5}, "R": 1, "Rminus": 1, "Rplus": 1.5,
            "control": {"kind": "rotating", "omega": 2.0}, "T": 2, "grid": {"cells": 64}}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(desc))
    sc = ConfinementScenario.from_json(path)
    assert sc.omega == 2.0 and sc.c == 0.5 and sc.cells == 64
    assert sc.default_omega() == pytest.approx(6 * math.pi)


# --- controlled sets and controls ---------------------------------------------

def test_controlled_velocity_set_examples():
    sc0 = scenario(c=0.0)
    F = controlled_velocity_set(sc0, (1, 0), 0.0, (2, 0))
    assert np.allclose(F.vertices, [[-1, 0]])
    sc = scenario(c=0.5)
    F = controlled_velocity_set(sc, (1, 0), 0.0, (1, 0))
    assert np.allclose(F.vertices.mean(axis=0), 0, atol=1e-12)
    F = controlled_velocity_set(sc, (1, 0), 0.0, (2, 0))
    assert np.allclose(F.vertices.mean(axis=0), [-1, 0], atol=1e-12)
    radii = np.linalg.norm(F.vertices - [-1, 0], axis=1)
    assert np.all(radii >= 0.5) and np.all(radii <= 0.5 / math.cos(math.pi / 32) + 1e-12)
    with pytest.raises(PreconditionError):
        controlled_velocity_set(sc, (0.5, 0), 0.0, (2, 0))


def test_rotating_control():
    assert np.allclose(rotating_control(2.0, 0.0)(3.7), [2, 0])
    om = 1.3
    assert np.allclose(rotating_control(2.0, om)(math.pi / om), [-2, 0])
    ts = np.linspace(0, 10, 101)
    assert np.allclose(np.linalg.norm(rotating_control(2.0, om)(ts), axis=-1), 2.0)
    with pytest.raises(ValueError):
        rotating_control(0.0, 1.0)


def test_fast_velocities_match_generic_origin_test():
    sc = scenario(k=1.0, c=0.5)
    field_ = ControlledField(sc, rotating_control(1.0, 2.0))
    X = sc.grid().centers()[::7, ::7]
    vel, speed, smax = field_.velocities(0.1, 0.12, X)
    from funnelkit.inclusion import _augment
    generic = _augment(field_.candidates(0.1, 0.12, X))
    assert np.allclose(vel, generic, atol=1e-12)
    assert speed >= np.linalg.norm(generic, axis=-1).max() - 1e-12
    assert smax >= np.abs(generic).sum(axis=-1).max() - 1e-12


# --- simulation ---------------------------------------------------------------

def image_of(grid, K, control, t):
    pts = K.points()
    sol = solve_ivp(lambda s, y: -(y.reshape(-1, 2) - control(s)).ravel(), (0, t), pts.ravel(),
                    t_eval=[t], rtol=1e-9, atol=1e-12)
    mask = np.zeros(grid.shape, bool)
    idx = np.array([grid.index(p) for p in sol.y[:, 0].reshape(-1, 2)])
    mask[tuple(idx.T)] = True
    return GridSet(grid, ndimage.binary_fill_holes(ndimage.binary_closing(mask, iterations=2)))


@pytest.mark.parametrize("omega", [0.0, 1.0])
def test_zero_c_matches_characteristics(omega):
    sc = ConfinementScenario(2, psi_constant(-1.0), GTerm("zero", 0.0), R=1.0, Rminus=0.5,
                             Rplus=1.5, cells=120)
    g = sc.grid()
    control = rotating_control(1.0, omega)
    K0 = ball(g, (0, 0), 0.4)
    fn = propagate_funnel(ControlledField(sc, control), K0, 0, 1.5, 0.5 * g.spacing / 3.5)
    for t in (0.5, 1.0, 1.5):
        sl = fn.slices[int(np.argmin(np.abs(fn.times - t)))]
        assert hausdorff_distance(sl, image_of(g, K0, control, t)) <= 2 * g.spacing


def test_simulation_confined():
    sc = scenario(k=1.0, c=0.5, cells=120, T=5.0)
    fn, rep = simulate_confinement(sc)
    assert rep.condition.margin >= 0.2 * sc.c
    assert rep.verdict and rep.max_radius <= rep.limit
    assert fn.times[-1] == pytest.approx(5.0)


def test_zero_psi_grows_like_a_ball():
    sc = ConfinementScenario(2, psi_constant(0.0), GTerm("linear", 0.5), R=1.0, Rminus=1.0,
                             Rplus=1.2, cells=96, half_width=2.5)
    g = sc.grid()
    with pytest.warns(RuntimeWarning):
        fn, rep = simulate_confinement(sc, T=3.0, stored=3)
    K0 = point_set(g, (0, 0))
    for t, S in zip(fn.times, fn.slices):
        assert hausdorff_distance(S, dilate(K0, 0.5 * t)) <= 2 * g.spacing
    assert not rep.verdict


def test_simulation_rejects_large_K0():
    sc = scenario(cells=64)
    with pytest.raises(PreconditionError):
        simulate_confinement(sc, K0=ball(sc.grid(), (0, 0), 1.4), T=0.1)
