import numpy as np
import pytest

from envforge import expr as E
from envforge.catalog import catalog, describe, names
from envforge.errors import DegenerateCurve, FamilyError, UnknownCatalogEntry, VanishingCurvature
from envforge.family import (
    HyperplaneFamily,
    SampleGrid,
    clairaut_family,
    osculating_plane_family,
    rotate_family,
    support,
    tangent_line_family,
)
from envforge.sphere import frame_basis, normal_coordinates

t = E.Var("t")


def test_sample_grid_validation():
    g = SampleGrid.uniform(["t"], [(-1.0, 1.0)], 5)
    assert g.shape == (5,) and g.steps == (0.5,) and g.is_uniform
    with pytest.raises(ValueError):
        SampleGrid(("t",), (np.array([0.0]),))
    with pytest.raises(ValueError):
        SampleGrid(("t",), (np.array([0.0, 0.0, 1.0]),))


def test_support_of_cubic_at_origin():
    fam = catalog("ex1-3", theta0=0.0)
    g, dg = support(fam, {"t": 0.0})
    assert g == 0.0 and dg[0] == 0.0


def test_support_identity_family():
    fam = HyperplaneFamily(1, ("th",), ((-3.0, 3.0),), (E.cos(E.Var("th")), E.sin(E.Var("th"))), (E.cos(E.Var("th")), E.sin(E.Var("th"))))
    s = fam.evaluate(fam.grid(51))
    np.testing.assert_allclose(s.gamma, 1.0, atol=1e-15)


def test_support_constant_clairaut_has_zero_gradient():
    s = clairaut_family(2, c=1.5, samples=21).evaluate(clairaut_family(2, c=1.5, samples=21).grid())
    np.testing.assert_allclose(s.gamma, 1.5, atol=1e-14)
    assert np.max(np.abs(s.dgamma)) <= 1e-14


def test_tangent_lines_of_circle():
    s_ = E.Var("s")
    fam = tangent_line_family((E.cos(s_), E.sin(s_)), "s", (-3.0, 3.0), 61)
    smp = fam.evaluate(fam.grid())
    th = fam.grid().axes[0]
    np.testing.assert_allclose(smp.nu, -np.stack([np.cos(th), np.sin(th)], -1), atol=1e-15)
    np.testing.assert_allclose(smp.gamma, -1.0, atol=1e-15)


def test_tangent_lines_of_cubic():
    fam = tangent_line_family((t, t**3), "t", (-2.0, 2.0), 41)
    smp = fam.evaluate(fam.grid())
    x = fam.grid().axes[0]
    expect = np.stack([-3 * x**2, np.ones_like(x)], -1) / np.sqrt(1 + 9 * x**4)[:, None]
    np.testing.assert_allclose(smp.nu, expect, atol=1e-15)


def test_tangent_lines_of_straight_line():
    fam = tangent_line_family((t, E.Num(0.0)), "t", (-1.0, 1.0), 11)
    smp = fam.evaluate(fam.grid())
    np.testing.assert_allclose(smp.nu, [[0.0, 1.0]] * 11)
    np.testing.assert_allclose(smp.gamma, 0.0)


def test_degenerate_curve_rejected():
    with pytest.raises(DegenerateCurve):
        tangent_line_family((t**2, t**3), "t", (-1.0, 1.0), 21)


def test_gamma_prime_identity_for_tangent_lines():
    # gamma' = -(r.t) Theta' for unit-speed curves
    s_ = E.Var("s")
    fam = tangent_line_family((2 * E.cos(s_ / 2), 2 * E.sin(s_ / 2)), "s", (-3.0, 3.0), 61)
    smp = fam.evaluate(fam.grid())
    tau = frame_basis(smp.nu)[:, 0, :]
    theta_p = np.einsum("kd,kd->k", tau, smp.dnu[:, 0, :])
    r_dot_t = np.einsum("kd,kd->k", smp.phi, smp.dphi[:, 0, :])
    np.testing.assert_allclose(smp.dgamma[:, 0], -r_dot_t * theta_p, atol=1e-9)


def test_helix_binormal():
    fam = catalog("helix-osculating", samples=21)
    smp = fam.evaluate(fam.grid())
    s = fam.grid().mesh()["s"]
    k = 1 / np.sqrt(2)
    b = np.stack([np.sin(k * s), -np.cos(k * s), np.ones_like(s)], -1) * k
    np.testing.assert_allclose(smp.nu, b, atol=1e-14)
    # nu does not depend on the dummy parameter u
    assert np.max(np.abs(smp.dnu[..., 1, :])) == 0.0
    theta = np.array([normal_coordinates(smp.nu[i, j], smp.nu[i, :]) for i in range(3) for j in range(3)])
    assert np.max(np.abs(np.diff(theta, axis=1))) <= 1e-15


def test_planar_curve_in_space_has_fixed_binormal():
    s_ = E.Var("s")
    fam = osculating_plane_family((E.cos(s_), E.sin(s_), E.Num(0.5)), ("s", "u"), [(-2.0, 2.0), (0.0, 1.0)], 11)
    smp = fam.evaluate(fam.grid())
    np.testing.assert_allclose(np.abs(smp.nu[..., 2]), 1.0, atol=1e-15)
    np.testing.assert_allclose(np.abs(smp.gamma), 0.5, atol=1e-15)


def test_vanishing_curvature_rejected():
    s_ = E.Var("s")
    with pytest.raises(VanishingCurvature):
        osculating_plane_family((s_, 2 * s_, E.Num(0.0)), ("s", "u"), [(-1.0, 1.0), (0.0, 1.0)], 11)


def test_rotate_family_examples():
    fam = catalog("ex1-1", theta0=0.0, alpha="t")
    rot = rotate_family(fam, np.pi / 2).evaluate(fam.grid(11))
    np.testing.assert_allclose(rot.nu, [[-1.0, 0.0]] * 11, atol=1e-15)
    same = rotate_family(fam, 0.0).evaluate(fam.grid(11))
    np.testing.assert_allclose(same.nu, fam.evaluate(fam.grid(11)).nu, atol=0)
    base = catalog("ex1-3").evaluate(catalog("ex1-3").grid(21))
    flip = rotate_family(catalog("ex1-3"), np.pi).evaluate(catalog("ex1-3").grid(21))
    np.testing.assert_allclose(flip.nu, -base.nu, atol=1e-15)
    np.testing.assert_allclose(flip.gamma, -base.gamma, atol=1e-15)


def test_rotation_round_trip():
    fam = catalog("ex1-4")
    back = rotate_family(rotate_family(fam, 0.83), -0.83)
    g = fam.grid(41)
    np.testing.assert_allclose(back.evaluate(g).nu, fam.evaluate(g).nu, atol=1e-15)


def test_clairaut_examples():
    fam = clairaut_family(1, c=1.0)
    s0 = fam.evaluate({"p": 0.0})
    np.testing.assert_allclose(s0.nu, [0.0, -1.0])
    np.testing.assert_allclose(s0.phi, [0.0, -1.0])  # the line Y = -1
    fam2 = clairaut_family(2, c=1.0, samples=11)
    smp = fam2.evaluate(fam2.grid())
    mesh = fam2.grid().mesh()
    np.testing.assert_allclose(smp.nu[..., 0] / smp.nu[..., 2], -mesh["p1"], atol=1e-14)
    np.testing.assert_allclose(smp.nu[..., 1] / smp.nu[..., 2], -mesh["p2"], atol=1e-14)


def test_clairaut_general_support():
    g = E.parse("1 + p^2/4", ["p"])
    fam = clairaut_family(1, g=g)
    smp = fam.evaluate(fam.grid(31))
    p = fam.grid(31).axes[0]
    np.testing.assert_allclose(smp.gamma, -(1 + p**2 / 4) / np.sqrt(1 + p**2), atol=1e-14)


def test_catalog_entries():
    shoe = catalog("shoe").evaluate({"x": 0.7, "y": -0.4})
    np.testing.assert_allclose(shoe.phi, [0.7, -0.4, 0.7**3 / 3 - 0.08], atol=1e-15)
    np.testing.assert_allclose(shoe.nu, np.array([-0.49, -0.4, 1.0]) / np.sqrt(0.7**4 + 0.16 + 1), atol=1e-15)
    e4 = catalog("ex1-4", theta0=0.0).evaluate({"t": 0.9})
    np.testing.assert_allclose(e4.nu, np.array([-5 * 0.9**3, 2.0]) / np.sqrt(4 + 25 * 0.9**6), atol=1e-15)
    with pytest.raises(UnknownCatalogEntry):
        catalog("nope")
    for name in names():
        assert describe(name)
        fam = catalog(name)
        fam.validate()


def test_unit_normals_and_support():
    for name in names():
        fam = catalog(name)
        smp = fam.validate()
        assert np.max(np.abs(np.linalg.norm(smp.nu, axis=-1) - 1)) <= 1e-9
        np.testing.assert_allclose(smp.gamma, np.sum(smp.phi * smp.nu, axis=-1), atol=0)


def test_non_unit_normal_rejected():
    fam = HyperplaneFamily(1, ("t",), ((0.0, 1.0),), (t, t), (t, E.Num(1.0)))
    with pytest.raises(FamilyError):
        fam.validate()
