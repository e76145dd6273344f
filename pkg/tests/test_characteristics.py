import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lgswe.characteristics import (
    build_foot_table,
    extrapolate_velocity,
    rhs_conservative,
    rhs_nonconservative,
    velocity_gradient,
)
from lgswe.errors import PositivityLost
from lgswe.fem import assemble_mass, assemble_weighted_vector_mass, interpolate, to_dofs, from_dofs
from lgswe.mesh import gen_square_mesh, locate_points
from lgswe.quadrature import get_rule


def test_extrapolation():
    c = np.full((4, 2), 0.3)
    np.testing.assert_array_equal(extrapolate_velocity(c, c), c)
    np.testing.assert_array_equal(extrapolate_velocity(np.full(3, 2.0), np.ones(3)), 3.0)
    # linear in time: u(t) = a + b t sampled at t=1, 2 gives u(3)
    a, b = np.array([0.5, -1.0]), np.array([2.0, 0.25])
    np.testing.assert_allclose(extrapolate_velocity(a + 2 * b, a + b), a + 3 * b)


def test_zero_velocity_identity(jitter8):
    ft = build_foot_table(jitter8, np.zeros((jitter8.n_vertices, 2)), 0.1)
    np.testing.assert_array_equal(ft.feet, get_rule(5).physical_points(jitter8))
    np.testing.assert_array_equal(ft.gamma, 1.0)
    assert ft.n_clipped == 0
    np.testing.assert_array_equal(ft.elements, np.repeat(np.arange(jitter8.n_triangles)[:, None], 7, axis=1))


@pytest.mark.parametrize("steps", [1, 2])
def test_linear_velocity_jacobian(jitter8, steps):
    dt = 0.05
    ft = build_foot_table(jitter8, jitter8.vertices.copy(), dt, steps)
    np.testing.assert_allclose(ft.gamma, (1 - steps * dt) ** 2, rtol=1e-13)
    np.testing.assert_allclose(ft.feet, (1 - steps * dt) * ft.rule.physical_points(jitter8), atol=1e-15)


def test_uniform_translation(unit8):
    dt = 0.01
    v = np.tile([1.0, 0.0], (unit8.n_vertices, 1))
    ft = build_foot_table(unit8, v, dt)
    xq = ft.rule.physical_points(unit8)
    np.testing.assert_array_equal(ft.gamma, 1.0)
    free = ~ft.clipped
    np.testing.assert_allclose(ft.feet[free], xq[free] - [dt, 0.0], atol=1e-15)
    # clipped feet are exactly those starting within dt of the left side
    np.testing.assert_array_equal(ft.clipped, xq[..., 0] < dt)
    assert np.all(np.abs(ft.feet[ft.clipped][:, 0]) < 1e-12)
    # composition of a linear field matches the shifted closed form
    phi = interpolate(unit8, lambda x: 1 + 2 * x[:, 0] + x[:, 1])
    want = 1 + 2 * np.maximum(xq[..., 0] - dt, 0.0) + xq[..., 1]
    np.testing.assert_allclose(ft.compose(phi), want, atol=1e-11)


def test_feet_inside_and_weights(jitter8):
    rng = np.random.default_rng(0)
    v = rng.normal(size=(jitter8.n_vertices, 2))
    ft = build_foot_table(jitter8, v, 0.2, steps=2)
    assert ft.n_clipped > 0
    assert np.all(ft.elements >= 0)
    np.testing.assert_allclose(ft.lam.sum(axis=2), 1.0, atol=1e-12)
    assert ft.lam.min() >= -1e-12
    assert np.all(np.isfinite(ft.gamma))
    # host elements and weights agree with a fresh location of the feet
    elem, lam = locate_points(jitter8, ft.feet.reshape(-1, 2))
    np.testing.assert_array_equal(elem, ft.elements.ravel())


def test_clipped_feet_on_segment(jitter8):
    rng = np.random.default_rng(1)
    v = rng.normal(size=(jitter8.n_vertices, 2))
    dt = 0.3
    ft = build_foot_table(jitter8, v, dt)
    xq = ft.rule.physical_points(jitter8)
    vq = ft.rule.points @ v[jitter8.triangles]
    raw = xq - dt * vq
    c = ft.clipped
    seg, got = (raw - xq)[c], (ft.feet - xq)[c]
    s = np.sum(got * seg, axis=1) / np.sum(seg * seg, axis=1)
    assert np.all((s >= 0) & (s < 1))
    np.testing.assert_allclose(got, s[:, None] * seg, atol=1e-12)
    x = ft.feet[c]
    assert np.all((x > -1e-12) & (x < 1 + 1e-12))
    assert np.all(np.min(np.minimum(x, 1 - x), axis=1) < 1e-9)


def test_gamma_matches_finite_differences(jitter8):
    rng = np.random.default_rng(2)
    v = interpolate(jitter8, lambda x: np.column_stack([np.sin(3 * x[:, 1]), x[:, 0] * x[:, 1]]))
    dt, steps = 0.07, 2
    ft = build_foot_table(jitter8, v, dt, steps)
    tri = jitter8.triangles
    for t in rng.choice(jitter8.n_triangles, 20, replace=False):
        x0 = jitter8.centroids[t]
        def X(x):
            lam = jitter8.barycentric(t, x)
            return x - steps * dt * (lam @ v[tri[t]])
        eps = 1e-6
        J = np.column_stack([(X(x0 + eps * e) - X(x0 - eps * e)) / (2 * eps) for e in np.eye(2)])
        assert abs(np.linalg.det(J) - ft.gamma[t]) <= 1e-7


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(1e-3, 0.2), st.sampled_from([1, 2]))
def test_gamma_fd_property(seed, dt, steps):
    m = gen_square_mesh(1.0, 6, perturbation=0.2, seed=seed % 7)
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(m.n_vertices, 2))
    G = velocity_gradient(m, v)
    ft = build_foot_table(m, v, dt, steps)
    t = rng.integers(m.n_triangles)
    lam_c = np.full(3, 1 / 3)
    eps = 1e-6
    def X(x):
        return x - steps * dt * (m.barycentric(t, x) @ v[m.triangles[t]])
    x0 = lam_c @ m.vertices[m.triangles[t]]
    J = np.column_stack([(X(x0 + eps * e) - X(x0 - eps * e)) / (2 * eps) for e in np.eye(2)])
    assert abs(np.linalg.det(J) - ft.gamma[t]) <= 1e-7
    np.testing.assert_allclose(np.eye(2) - steps * dt * G[t], J, atol=1e-7)


def test_conservative_zero_velocity(jitter8):
    phi = 1 + np.random.default_rng(3).random(jitter8.n_vertices)
    ft = build_foot_table(jitter8, np.zeros((jitter8.n_vertices, 2)), 0.1)
    np.testing.assert_allclose(rhs_conservative(jitter8, phi, ft), assemble_mass(jitter8) @ phi, rtol=1e-13, atol=1e-16)
    assert rhs_conservative(jitter8, np.full(jitter8.n_vertices, 2.0), ft).sum() == pytest.approx(2.0, rel=1e-13)


def test_conservative_lattice_translation():
    # shifting by one cell maps the P1 space onto itself away from the edge
    N = 16
    m = gen_square_mesh(1.0, N)
    h = 1.0 / N
    bump = lambda x: np.maximum(0.0, 0.09 - (x[:, 0] - 0.5) ** 2 - (x[:, 1] - 0.5) ** 2)
    phi = interpolate(m, bump)
    v = np.tile([1.0, 0.0], (m.n_vertices, 1))
    ft = build_foot_table(m, v, h)
    assert ft.n_clipped > 0
    got = rhs_conservative(m, phi, ft)
    shifted = interpolate(m, lambda x: bump(x - [h, 0.0]))
    np.testing.assert_allclose(got, assemble_mass(m) @ shifted, atol=1e-15)
    assert got.sum() == pytest.approx((assemble_mass(m) @ phi).sum(), rel=1e-6)


def test_conservative_sum_identity(jitter8):
    rng = np.random.default_rng(4)
    v = 0.5 * rng.normal(size=(jitter8.n_vertices, 2))
    phi = 1 + rng.random(jitter8.n_vertices)
    ft = build_foot_table(jitter8, v, 0.05)
    integral = np.sum(jitter8.area[:, None] * ft.gamma[:, None] * ft.rule.weights * ft.compose(phi))
    assert rhs_conservative(jitter8, phi, ft).sum() == pytest.approx(integral, rel=1e-13)


def test_nonconservative_trivial(jitter8):
    rng = np.random.default_rng(5)
    n = jitter8.n_vertices
    u = rng.normal(size=(n, 2))
    ft = build_foot_table(jitter8, np.zeros((n, 2)), 0.1)
    got = rhs_nonconservative(jitter8, u, np.ones(n), ft)
    want = from_dofs(assemble_weighted_vector_mass(jitter8, np.ones(n)) @ to_dofs(u))
    np.testing.assert_allclose(got, want, atol=1e-15)
    np.testing.assert_array_equal(rhs_nonconservative(jitter8, np.zeros((n, 2)), np.ones(n), ft), 0.0)


def test_nonconservative_translation_closed_form(unit8):
    dt = 0.03
    n = unit8.n_vertices
    ft = build_foot_table(unit8, np.tile([1.0, 0.0], (n, 1)), dt)
    u = np.column_stack([unit8.vertices[:, 0] - 2 * unit8.vertices[:, 1], 1 + unit8.vertices[:, 0]])
    phi = 1 + unit8.vertices[:, 1] ** 2
    got = rhs_nonconservative(unit8, u, phi, ft)
    rule = ft.rule
    xq = rule.physical_points(unit8)
    x1 = np.maximum(xq[..., 0] - dt, 0.0)
    uq = np.stack([x1 - 2 * xq[..., 1], 1 + x1], axis=-1)
    phiq = phi[unit8.triangles] @ rule.points.T
    w = unit8.area[:, None] * rule.weights * phiq
    want = np.zeros((n, 2))
    for t, tri in enumerate(unit8.triangles):
        want[tri] += rule.points.T @ (w[t][:, None] * uq[t])
    np.testing.assert_allclose(got, want, atol=1e-10)


def test_nonconservative_positivity(unit8):
    n = unit8.n_vertices
    ft = build_foot_table(unit8, np.zeros((n, 2)), 0.1)
    phi = np.ones(n)
    phi[0] = -1.0
    with pytest.raises(PositivityLost):
        rhs_nonconservative(unit8, np.ones((n, 2)), phi, ft)


def test_bad_arguments(unit8):
    v = np.zeros((unit8.n_vertices, 2))
    with pytest.raises(ValueError):
        build_foot_table(unit8, v, 0.0)
    with pytest.raises(ValueError):
        build_foot_table(unit8, v, 0.1, steps=3)
