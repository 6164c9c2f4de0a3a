import numpy as np
import pytest

from envforge import expr as E
from envforge.catalog import catalog
from envforge.creative import solve_creator
from envforge.envelope import envelope, grid_derivative
from envforge.errors import GrazingNormal, InadmissiblePoint
from envforge.family import HyperplaneFamily
from envforge.optics import (
    WulffDensity,
    anti_orthotomic,
    cahn_hoffman,
    orthotomic,
    orthotomic_of_frontal,
    pedal,
    random_admissible_point,
    wulff_family,
)

t = E.Var("t")
NU = (E.cos(t), E.sin(t))
CIRCLE = HyperplaneFamily(1, ("t",), ((-3.0, 3.0),), NU, NU, name="circle")


def test_orthotomic_of_unit_circle_about_centre():
    om = orthotomic(CIRCLE, [0.0, 0.0])
    x = CIRCLE.grid().axes[0]
    np.testing.assert_allclose(om.f_P, 2 * np.stack([np.cos(x), np.sin(x)], -1), atol=1e-15)
    assert np.all(om.admissible)
    assert np.all(np.abs(np.sum(om.nu_P * NU_values(x), axis=-1)) > 0)


def NU_values(x):
    return np.stack([np.cos(x), np.sin(x)], -1)


def test_point_on_a_hyperplane_is_inadmissible():
    fam = catalog("ex1-3")
    with pytest.raises(InadmissiblePoint) as info:
        orthotomic(fam, [1.0, 1.0], strict=True)  # on the tangent line at t = 1
    assert (300,) in info.value.indices
    om = orthotomic(fam, [1.0, 1.0])
    # the tangent lines at t = 1 and t = -1/2 both pass through (1, 1)
    assert om.inadmissible_indices == [(150,), (300,)]


def test_orthogonality_of_normal_and_orthotomic():
    fam = catalog("ex1-3", alpha="sin(t)")
    om = orthotomic(fam, [0.0, 2.0])
    dots = np.abs(np.einsum("...ij,...j->...i", om.df_P, om.v_P))[1:-1]
    assert np.max(dots[om.admissible[1:-1]]) <= 1e-8


def test_orthotomic_jacobian_matches_finite_differences():
    fam = catalog("ex1-4")
    om = orthotomic(fam, [0.5, -1.0])
    fd = grid_derivative(om.f_P, 0, fam.grid().steps[0])
    assert np.max(np.abs(fd - om.df_P[:, 0, :])) <= 1e-6


def test_anti_orthotomic_of_circle():
    om = orthotomic(CIRCLE, [0.0, 0.0])
    back = anti_orthotomic(om)
    x = CIRCLE.grid().axes[0]
    np.testing.assert_allclose(back, NU_values(x), atol=1e-15)


def test_two_auxiliary_points_agree():
    fam = catalog("ex1-3")
    cf, _ = solve_creator(fam)
    a = anti_orthotomic(orthotomic(fam, [0.0, 2.0], cf), strict=False)
    b = anti_orthotomic(orthotomic(fam, [3.0, -1.0], cf), strict=False)
    ok = np.all(np.isfinite(a), axis=-1) & np.all(np.isfinite(b), axis=-1)
    assert np.max(np.linalg.norm(a - b, axis=-1)[ok]) <= 1e-8


def test_grazing_normal_at_envelope_point():
    fam = catalog("ex1-3")
    om = orthotomic(fam, [1.0, 1.0])
    with pytest.raises(GrazingNormal) as info:
        anti_orthotomic(om)
    assert (300,) in info.value.indices
    out = anti_orthotomic(om, strict=False)
    assert np.all(np.isnan(out[300]))


def test_frontal_path_matches_creator_path():
    for name in ("ex1-3", "circle-tangents", "shoe"):
        fam = catalog(name)
        env, cf, _ = envelope(fam)
        P = random_admissible_point(fam, cf, seed=5)
        a = orthotomic(fam, P, cf)
        b = orthotomic_of_frontal(env.f, cf.nu, P)
        mask = a.admissible & (np.linalg.norm(b.v_P, axis=-1) > 1e-6)
        np.testing.assert_allclose(a.f_P, b.f_P, atol=1e-12)
        assert np.max(np.abs(a.nu_P - b.nu_P)[mask]) <= 1e-8


def test_round_trip_for_random_points():
    for name in ("circle-tangents", "ex1-3", "ex1-4", "shoe"):
        fam = catalog(name)
        env, cf, _ = envelope(fam)
        for seed in (1, 2):
            P = random_admissible_point(fam, cf, seed=seed)
            om = orthotomic(fam, P, cf)
            back = anti_orthotomic(om, strict=False)
            mask = om.admissible & np.all(np.isfinite(back), axis=-1)
            assert np.max(np.linalg.norm(back - env.f, axis=-1)[mask]) <= 1e-8, name


def test_pedal_examples():
    circle = catalog("circle-tangents")
    g, mask = pedal(circle, [0.0, 0.0])
    x = circle.grid().axes[0]
    np.testing.assert_allclose(g, NU_values(x), atol=1e-15)
    flat = catalog("ex1-1", theta0=0.0, alpha="t")
    g, _ = pedal(flat, [0.0, 1.0])
    np.testing.assert_allclose(g, 0.0, atol=1e-15)


def test_pedal_bisects_the_mirror_chord():
    fam = catalog("ex1-4", alpha="t")
    P = np.array([0.3, 1.7])
    g, _ = pedal(fam, P)
    om = orthotomic(fam, P)
    np.testing.assert_allclose(g, 0.5 * (om.f_P - P) + P, atol=1e-14)
    np.testing.assert_allclose(np.linalg.norm(g - P, axis=-1), 0.5 * np.linalg.norm(om.f_P - P, axis=-1), atol=1e-14)


def test_random_point_is_seeded():
    fam = catalog("ex1-3")
    cf, _ = solve_creator(fam)
    a, b = random_admissible_point(fam, cf, seed=9), random_admissible_point(fam, cf, seed=9)
    np.testing.assert_array_equal(a, b)


# Wulff -----------------------------------------------------------------------


def test_constant_density_gives_circle_and_sphere():
    for c in (1.0, 2.5, -0.4):
        _, img = cahn_hoffman(WulffDensity.parse(repr(c)))
        assert np.max(np.abs(np.linalg.norm(img, axis=-1) - abs(c))) <= 1e-12
        _, img = cahn_hoffman(WulffDensity.parse(repr(c), n=2))
        assert np.max(np.abs(np.linalg.norm(img, axis=-1) - abs(c))) <= 1e-12


def test_density_variable_aliases():
    a = WulffDensity.parse("2 + cos(theta)")
    b = WulffDensity.parse("2 + cos(t)")
    assert a.gamma == b.gamma and a.coords == "angle"
    assert WulffDensity.parse("1 + x^2").coords == "ambient"


def test_cahn_hoffman_matches_envelope():
    for src in ("2 + cos(theta)", "1 + 0.2*sin(3*theta)", "3 + x*y"):
        d = WulffDensity.parse(src)
        fam = wulff_family(d)
        env, cf, _ = envelope(fam)
        _, img = cahn_hoffman(d, cf.samples.nu)
        assert np.max(np.abs(img - env.f)) <= 1e-10, src


def test_ambient_density_on_sphere():
    # gamma = z on S^2: gradient is the tangential part of e3, image is e3
    d = WulffDensity.parse("z", n=2)
    x, img = cahn_hoffman(d)
    np.testing.assert_allclose(img, np.tile([0.0, 0.0, 1.0], (x.shape[0], 1)), atol=1e-14)
