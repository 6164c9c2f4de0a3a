import numpy as np
import pytest

from envforge import expr as E
from envforge.catalog import catalog, names
from envforge.creative import Uniqueness, Verdict, creator_1d_fast, creator_ambiguity, solve_creator
from envforge.errors import FullRank, GridTooCoarse
from envforge.family import HyperplaneFamily, SampleGrid, clairaut_family

t = E.Var("t")


def _line_catalog():
    out = []
    for name in names():
        fam = catalog(name)
        if fam.n == 1:
            out.append(fam)
    out += [catalog("ex1-3", theta0=0.0, alpha="sin(t)"), catalog("ex1-4", theta0=np.pi, alpha="t^2")]
    return out


def test_cubic_creator():
    cf, rep = solve_creator(catalog("ex1-3", theta0=0.0))
    assert rep.verdict is Verdict.CREATIVE
    x = cf.grid.axes[0]
    omega = -(x + 3 * x**5) / np.sqrt(1 + 9 * x**4)
    np.testing.assert_allclose(cf.components[:, 0], omega, atol=1e-12)
    tau = np.stack([-3 * x**2, np.ones_like(x)], -1) / np.sqrt(1 + 9 * x**4)[:, None]
    tau = np.stack([-tau[:, 1], tau[:, 0]], -1)
    np.testing.assert_allclose(cf.ambient, omega[:, None] * tau, atol=1e-12)


def test_quarter_turn_lines_not_creative():
    _, rep = solve_creator(catalog("ex1-1", theta0=np.pi / 2, alpha="t"))
    assert rep.verdict is Verdict.NOT_CREATIVE
    assert rep.worst_residual == pytest.approx(1.0)


def test_identity_normal_family_always_creative():
    for src in ("1", "2 + cos(t)", "exp(sin(2*t))", "3 - t^2/5"):
        g = E.parse(src, ["t"])
        nu = (E.cos(t), E.sin(t))
        fam = HyperplaneFamily(1, ("t",), ((-3.0, 3.0),), (g * nu[0], g * nu[1]), nu)
        cf, rep = solve_creator(fam)
        assert rep.verdict is Verdict.CREATIVE and rep.uniqueness is Uniqueness.UNIQUE
        np.testing.assert_allclose(cf.components[:, 0], cf.samples.dgamma[:, 0], atol=1e-12)


@pytest.mark.parametrize(
    "name, formula",
    [("ex1-3", lambda x: 6 * x / (1 + 9 * x**4)), ("ex1-4", lambda x: 30 * x**2 / (4 + 25 * x**6))],
)
def test_gauge_angle_derivative(name, formula):
    cf, _ = creator_1d_fast(catalog(name, theta0=0.0))
    x = cf.grid.axes[0]
    np.testing.assert_allclose(cf.jacobian[:, 0, 0], formula(x), atol=1e-12)


def test_gauge_angle_derivative_of_circle():
    nu = (E.cos(t), E.sin(t))
    fam = HyperplaneFamily(1, ("t",), ((-3.0, 3.0),), nu, nu)
    cf, _ = creator_1d_fast(fam)
    np.testing.assert_allclose(cf.jacobian[:, 0, 0], 1.0, atol=1e-15)
    np.testing.assert_allclose(cf.components[:, 0], cf.samples.dgamma[:, 0], atol=1e-15)


def test_fast_route_agrees_with_general_solver():
    for fam in _line_catalog():
        a, ra = solve_creator(fam)
        b, rb = creator_1d_fast(fam)
        if ra.verdict is Verdict.NOT_CREATIVE:
            continue
        assert np.max(np.abs(a.components - b.components)) <= 1e-9, fam.name


def test_tangency_on_all_catalog_families():
    for name in names():
        cf, rep = solve_creator(catalog(name))
        assert np.max(np.abs(np.sum(cf.ambient * cf.nu, axis=-1))) <= 1e-10


def test_uniqueness_examples():
    assert solve_creator(catalog("ex1-3"))[1].uniqueness is Uniqueness.UNIQUE
    rep = solve_creator(catalog("ex1-1", theta0=0.0, alpha="t"))[1]
    assert rep.uniqueness is Uniqueness.NON_UNIQUE and rep.flagged_boxes == [[(-2.0, 2.0)]]
    rep = solve_creator(clairaut_family(2, c=1.0, samples=41))[1]
    assert rep.uniqueness is Uniqueness.UNIQUE and rep.singular_indices == []
    shoe = solve_creator(catalog("shoe"))[1]
    assert shoe.uniqueness is Uniqueness.UNIQUE
    assert {i for i, _ in shoe.singular_indices} == {50}


def test_singular_set_and_kernel_dimensions():
    cf, rep = solve_creator(catalog("ex1-4"))
    assert rep.singular_indices == [(200,)] and rep.kernel_dims == [1]
    assert rep.treated_count == 1
    assert rep.regular_fraction == pytest.approx(400 / 401)


def test_kernel_of_constant_normal_family():
    fam = catalog("ex1-1", theta0=0.0, alpha="t")
    k = creator_ambiguity(fam, {"t": 0.7})
    assert k.components.shape == (1, 1)
    np.testing.assert_allclose(np.abs(k.ambient), [[1.0, 0.0]], atol=1e-15)


def test_kernel_of_osculating_family_is_tangent_direction():
    fam = catalog("helix-osculating", samples=31)
    k = creator_ambiguity(fam, {"s": 0.4, "u": 0.2})
    tangent = np.array([-np.sin(0.4 / np.sqrt(2)), np.cos(0.4 / np.sqrt(2)), 1.0]) / np.sqrt(2)
    assert k.components.shape[0] == 1
    assert abs(abs(k.ambient[0] @ tangent) - 1) <= 1e-12


def test_regular_point_has_no_ambiguity():
    with pytest.raises(FullRank):
        creator_ambiguity(catalog("ex1-3"), {"t": 1.0})


def test_limit_treatment_needs_five_samples():
    fam = catalog("ex1-3").replace(samples=(3,))
    with pytest.raises(GridTooCoarse):
        solve_creator(fam)


def test_blow_up_at_singular_point_is_not_creative():
    # rotating the (t^2, t^5) lines makes omega ~ 1/t at t = 0
    for theta0 in (0.01, 0.3, 1.0):
        _, rep = solve_creator(catalog("ex1-4", theta0=theta0))
        assert rep.verdict is Verdict.NOT_CREATIVE
        assert rep.limit_mismatch > 1.0


def test_discontinuous_creator_is_rejected():
    g = E.call("abs", t)
    nu = (E.cos(t), E.sin(t))
    for k in (400, 401):
        fam = HyperplaneFamily(1, ("t",), ((-3.0, 3.0),), (g * nu[0], g * nu[1]), nu, samples=(k,))
        assert solve_creator(fam)[1].verdict is Verdict.NOT_CREATIVE
        assert solve_creator(fam, check_continuity=False)[1].verdict is Verdict.CREATIVE


def test_frame_twist_changes_components_not_ambient():
    fam = catalog("shoe").replace(samples=(41, 41))
    plain, _ = solve_creator(fam)
    twisted, _ = solve_creator(fam, frame_twist=0.9)
    assert np.max(np.abs(plain.components - twisted.components)) > 0.1
    assert np.max(np.abs(plain.ambient - twisted.ambient)) <= 1e-10


def test_reparametrization_invariance_with_singular_point():
    u = E.Var("u")
    h = u**3 + u
    fam_t = catalog("ex1-3", theta0=0.0, alpha="sin(t)")
    fam_u = fam_t.replace(
        params=("u",),
        domain=((-1.0, 1.0),),
        phi=tuple(E.substitute(e, {"t": h}) for e in fam_t.phi),
        nu=tuple(E.substitute(e, {"t": h}) for e in fam_t.nu),
    )
    gu = fam_u.grid(201)
    gt = SampleGrid(("t",), (gu.axes[0] ** 3 + gu.axes[0],))
    a, ra = solve_creator(fam_u, gu)
    b, rb = solve_creator(fam_t, gt)
    assert ra.creative and rb.creative
    assert np.max(np.abs(a.ambient - b.ambient)) <= 1e-8


def test_report_serializes():
    _, rep = solve_creator(catalog("ex1-1", theta0=1.0, alpha="t"))
    d = rep.to_dict()
    assert d["verdict"] == "NotCreative" and d["singular_count"] == 401
    assert len(d["singular_indices"]) <= 50
