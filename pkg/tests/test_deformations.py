import numpy as np
import pytest

from bicone.deformations import (BracketError, ConeMap, DomainError, GluedMap,
                                 InverseView, RadialMap)
from bicone.geometry import cone_norm, euclid_norm, reflect, sample_cone_interior
from bicone.moduli import ModulusFunction, measured_constants


def family_grid():
    out = []
    for n in (2, 3):
        out += [(ModulusFunction.identity(n=n), n),
                (ModulusFunction.power(0.5, n=n), n),
                (ModulusFunction.iterlog(depth=1, alpha=1.0, n=n), n),
                (ModulusFunction.iterlog(depth=2, alpha=1.0, n=n), n),
                (ModulusFunction.iterlog(depth=3, alpha=1.0, n=n), n)]
    return out


def interior(n, count=2000, seed=0):
    return sample_cone_interior(count, n=n, seed=seed,
                                exclude_axis_margin=1e-9,
                                exclude_boundary_margin=1e-9).points


# -- forward map -----------------------------------------------------------

@pytest.mark.parametrize("phi,n", family_grid())
def test_vertical_stretch_structure(phi, n):
    m = ConeMap(phi, n=n)
    X = interior(n, 500)
    Y = m(X)
    # the horizontal part is untouched; only the height moves
    assert np.array_equal(Y[:, :-1], X[:, :-1])
    assert np.all(Y[:, -1] >= X[:, -1] * (1 - 1e-12))
    # base and slant boundary are fixed
    base = np.zeros((5, n))
    base[:, 0] = np.linspace(0.0, 0.99, 5)
    assert np.array_equal(m(base), base)


@pytest.mark.parametrize("phi,n", family_grid())
def test_pointwise_sandwich_both_norms(phi, n):
    m = ConeMap(phi, n=n)
    X = interior(n, 2000)
    Y = m(X)
    cx, cy = cone_norm(X), cone_norm(Y)
    assert np.all(cy >= cx * (1 - 1e-12))
    assert np.all(cy <= phi(cx) * (1 + 1e-12))
    ex, ey = euclid_norm(X), euclid_norm(Y)
    assert np.all(ey >= ex * (1 - 1e-12))
    assert np.all(ey <= phi(ex) * (1 + 1e-12))


def test_domain_is_enforced():
    m = ConeMap(ModulusFunction.power(0.5), n=2)
    with pytest.raises(DomainError):
        m(np.array([0.2, -0.2]))
    with pytest.raises(DomainError):
        m(np.array([0.9, 0.3]))
    with pytest.raises(DomainError):
        m.inverse(np.array([0.2, -0.1]))


# -- inversion -------------------------------------------------------------

@pytest.mark.parametrize("phi,n", family_grid())
def test_round_trip_interior(phi, n):
    m = ConeMap(phi, n=n)
    X = interior(n, 2000)
    err = cone_norm(m.inverse(m(X), tol=1e-12) - X)
    assert np.max(err) <= 1e-9
    err2 = cone_norm(m(m.inverse(X, tol=1e-12)) - X)
    assert np.max(err2) <= 1e-9


def test_inverse_height_equation_residual():
    phi = ModulusFunction.iterlog(depth=2, alpha=1.0, n=2)
    m = ConeMap(phi, n=2)
    Y = interior(2, 500, seed=3)
    X = m.inverse(Y, tol=1e-13)
    s = np.linalg.norm(X[:, :-1], axis=1) + X[:, -1]
    resid = X[:, -1] * phi(s) / s - Y[:, -1]
    assert np.max(np.abs(resid)) <= 1e-12


def test_bracket_error_for_inadmissible_modulus():
    bad = ModulusFunction.custom(lambda s: np.where(s < 1.0, s ** 2, s))
    m = ConeMap(bad, n=2)
    with pytest.raises(BracketError):
        m.inverse(np.array([[0.1, 0.4]]))


# -- jacobian --------------------------------------------------------------

@pytest.mark.parametrize("phi,n", family_grid())
def test_jacobian_matches_finite_differences(phi, n):
    m = ConeMap(phi, n=n)
    X = interior(n, 100, seed=1)
    jd = m.jacobian(X)
    step = 1e-6
    for i, x in enumerate(X[:20]):
        fd = np.empty((n, n))
        for j in range(n):
            e = np.zeros(n)
            e[j] = step
            fd[:, j] = (m(x + e) - m(x - e)) / (2 * step)
        assert np.max(np.abs(jd.matrix[i] - fd)) <= 1e-5 * max(1.0,
                                                               np.max(np.abs(fd)))


@pytest.mark.parametrize("phi,n", family_grid())
def test_jacobian_scalar_reductions_match_matrix(phi, n):
    m = ConeMap(phi, n=n)
    X = interior(n, 400, seed=2)
    jd = m.jacobian(X)
    det = np.linalg.det(jd.matrix)
    assert np.max(np.abs(jd.det / det - 1.0)) <= 1e-10
    hs = np.sqrt(np.sum(jd.matrix ** 2, axis=(1, 2)))
    assert np.max(np.abs(jd.hs_norm / hs - 1.0)) <= 1e-10
    inv = np.linalg.inv(jd.matrix)
    inv_hs = np.sqrt(np.sum(inv ** 2, axis=(1, 2)))
    assert np.max(np.abs(jd.inv_hs_norm / inv_hs - 1.0)) <= 1e-10
    cof = inv_hs * np.abs(det)
    assert np.max(np.abs(jd.cofactor_norm / cof - 1.0)) <= 1e-10
    K = inv_hs ** n * det
    assert np.max(np.abs(jd.inner_distortion / K - 1.0)) <= 1e-10


@pytest.mark.parametrize("phi,n", family_grid())
def test_determinant_bounds(phi, n):
    m = ConeMap(phi, n=n)
    X = interior(n, 2000, seed=4)
    jd = m.jacobian(X)
    M = measured_constants(phi).M
    lam = phi.chord_slope(cone_norm(X))
    assert np.all(jd.det >= 1.0 / M - 1e-12)
    assert np.all(jd.det <= lam + 1e-12)


def test_jacobian_rejects_degenerate_points():
    m = ConeMap(ModulusFunction.power(0.5), n=2)
    with pytest.raises(DomainError):
        m.jacobian(np.array([[0.0, 0.5]]))      # on the vertical axis
    with pytest.raises(DomainError):
        m.jacobian(np.array([[0.5, 0.0]]))      # on the base


# -- glued whole-space map -------------------------------------------------

@pytest.mark.parametrize("n", [2, 3])
def test_glued_map_identity_regions(n):
    g = GluedMap(ModulusFunction.iterlog(depth=2, alpha=1.0, n=n), n=n)
    rng = np.random.default_rng(0)
    X = rng.normal(size=(500, n))
    X = X[cone_norm(X) > 1.0 + 1e-9]
    assert np.array_equal(g(X), X)
    base = np.zeros((100, n))
    base[:, 0] = np.linspace(-0.99, 0.99, 100)
    assert np.array_equal(g(base), base)
    assert np.array_equal(g(np.zeros(n)), np.zeros(n))


@pytest.mark.parametrize("n", [2, 3])
def test_glued_axis_formulas(n):
    phi = ModulusFunction.iterlog(depth=2, alpha=1.0, n=n)
    g = GluedMap(phi, n=n)
    r = np.geomspace(1e-2, 0.99, 20)
    up = np.zeros((r.size, n)); up[:, -1] = r
    assert np.max(np.abs(g(up)[:, -1] - phi(r))) <= 1e-13
    # inverse branch: stay above phi(tiniest subnormal), below which no
    # float64 preimage exists
    r2 = np.geomspace(float(phi(1e-300)) * 1.01, 0.99, 20)
    down = np.zeros((r2.size, n)); down[:, -1] = -r2
    low = g(down)
    assert np.max(np.abs(phi(-low[:, -1]) - r2)) <= 1e-11
    # reflection conjugacy: g on the lower half is r o g^-1 o r
    Y = interior(n, 300, seed=5) * 0.9
    assert np.max(cone_norm(
        g(reflect(Y)) - reflect(g.inverse(Y)))) <= 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_glued_round_trip_whole_space(n):
    g = GluedMap(ModulusFunction.iterlog(depth=2, alpha=1.0, n=n), n=n)
    rng = np.random.default_rng(1)
    X = rng.uniform(-1.2, 1.2, size=(800, n))
    keep = np.abs(cone_norm(X) - 1.0) > 1e-3    # stay off the glue boundary
    X = X[keep]
    err = cone_norm(g.inverse(g(X)) - X)
    assert np.max(err) <= 1e-9
    err2 = cone_norm(g(g.inverse(X)) - X)
    assert np.max(err2) <= 1e-9


def test_glued_continuity_across_slant():
    g = GluedMap(ModulusFunction.iterlog(depth=2, alpha=1.0, n=2), n=2)
    x = np.linspace(0.05, 0.95, 30)
    inside = np.stack([x, (1 - x) * (1 - 1e-12)], axis=1)
    outside = np.stack([x, (1 - x) * (1 + 1e-12)], axis=1)
    gap = cone_norm(g(inside) - g(outside))
    assert np.max(gap) <= 1e-10


# -- radial reference maps -------------------------------------------------

def test_radial_power_closed_forms():
    h = RadialMap("power", eps=0.5, n=2)
    X = np.array([[0.25, 0.0], [0.0, -0.04], [0.09, 0.12]])
    Y = h(X)
    assert np.max(np.abs(euclid_norm(Y) - euclid_norm(X) ** 0.5)) <= 1e-14
    assert np.max(np.abs(h.inverse(Y) - X)) <= 1e-14
    # direction preserved
    assert np.allclose(Y[2] / euclid_norm(Y[2]), X[2] / euclid_norm(X[2]))


def test_radial_logexample_monotone_and_invertible():
    h = RadialMap("logexample", beta=1.0, n=2)
    rho = np.geomspace(1e-8, 0.999, 200)
    st = h.stress(rho)
    assert np.all(np.diff(st) > 0)
    assert np.all(st >= rho)            # squeezing toward 0 is the inverse's job
    X = np.stack([rho / np.sqrt(2), rho / np.sqrt(2)], axis=1)
    err = euclid_norm(h.inverse(h(X)) - X)
    assert np.max(err) <= 1e-11
    assert np.array_equal(h(np.array([[1.5, 0.0]])), np.array([[1.5, 0.0]]))


def test_radial_validation():
    with pytest.raises(ValueError):
        RadialMap("power", eps=1.5, n=2)
    with pytest.raises(ValueError):
        RadialMap("spiral", eps=0.5, n=2)
    with pytest.raises(ValueError):
        RadialMap("logexample", beta=0.3, n=2)   # needs beta > 1/n


def test_inverse_view_swaps_roles():
    g = GluedMap(ModulusFunction.power(0.5, n=2), n=2)
    f = g.inverted()
    assert isinstance(f, InverseView)
    X = np.array([[0.1, 0.2], [0.0, -0.3]])
    assert np.array_equal(f(X), g.inverse(X))
    assert np.array_equal(f.inverse(X), g(X))
    assert f.n == g.n and f.domain == g.domain
