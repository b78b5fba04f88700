import math

import numpy as np
import pytest

from shishkin_robin.mesh import (
    build_space_mesh, build_time_mesh, layer_functions, transition_parameter, write_mesh_csv,
)

# 40-digit mpmath evaluations of 2 sqrt(eps/alpha) ln N, eps=2^-14, alpha=0.9, N=64
SIGMA_14 = 0.06849762013416915631
H_LAYER_14 = 0.004281101258385572270
H_INTERIOR_14 = 0.02696889874161442773


def test_transition_parameter_clamps():
    # 2 sqrt(2^-6/0.9) ln 64 = 1.0959... > 1/4
    assert transition_parameter(2.0 ** -6, 0.9, 64) == 0.25


def test_transition_parameter_unclamped():
    assert transition_parameter(2.0 ** -14, 0.9, 64) == pytest.approx(SIGMA_14, rel=1e-14)
    assert transition_parameter(2.0 ** -14, 0.9, 64) == pytest.approx(0.0684976, abs=1e-7)


def test_transition_parameter_continuous_at_clamp():
    N = 64
    eps = 0.9 * (0.25 / (2 * math.log(N))) ** 2
    assert transition_parameter(eps, 0.9, N) == pytest.approx(0.25, rel=1e-15)
    assert transition_parameter(eps * (1 + 1e-12), 0.9, N) == 0.25


def test_clamped_mesh_is_uniform():
    m = build_space_mesh(2.0 ** -6, 0.9, 64)
    assert m.sigma == 0.25
    np.testing.assert_allclose(m.widths, 1 / 64, rtol=1e-13)
    assert m.h_layer == m.H_interior == 1 / 64


def test_unclamped_mesh_widths():
    m = build_space_mesh(2.0 ** -14, 0.9, 64)
    assert m.h_layer == pytest.approx(H_LAYER_14, rel=1e-13)
    assert m.H_interior == pytest.approx(H_INTERIOR_14, rel=1e-13)
    # figures quoted to eight decimals
    assert m.h_layer == pytest.approx(0.00428110, abs=1e-8)
    assert m.H_interior == pytest.approx(0.02696883, abs=1e-7)
    w = m.widths
    np.testing.assert_allclose(w[:16], m.h_layer, rtol=1e-11)
    np.testing.assert_allclose(w[16:48], m.H_interior, rtol=1e-12)
    np.testing.assert_allclose(w[48:], m.h_layer, rtol=1e-11)


@pytest.mark.parametrize("N", [30, 4, 0, 10, 66])
def test_bad_N(N):
    with pytest.raises(ValueError, match="multiple of 4"):
        build_space_mesh(1e-3, 1.0, N)


def test_transition_points_are_exact():
    for N in (8, 64, 256):
        m = build_space_mesh(1e-6, 1.0, N)
        assert m.points[0] == 0.0 and m.points[-1] == 1.0
        assert m.points[N // 4] == m.sigma
        assert m.points[3 * N // 4] == 1.0 - m.sigma


def test_mesh_is_immutable():
    m = build_space_mesh(1e-4, 1.0, 16)
    with pytest.raises(ValueError):
        m.points[3] = 0.5


def test_time_mesh():
    tm = build_time_mesh(1.0, 4)
    assert tm.levels.tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert build_time_mesh(1.0, 256).tau == 1 / 256
    assert build_time_mesh(2.0, 2).levels.tolist() == [0.0, 1.0, 2.0]


def test_time_meshes_nest_bitwise():
    for T in (1.0, 0.7, 3.3):
        c = build_time_mesh(T, 37)
        f = build_time_mesh(T, 74)
        assert np.array_equal(c.levels, f.levels[::2])


@pytest.mark.parametrize("T, M", [(0.0, 4), (1.0, 0), (-1.0, 3)])
def test_time_mesh_preconditions(T, M):
    with pytest.raises(ValueError):
        build_time_mesh(T, M)


def test_layer_functions():
    bl, br, b = layer_functions(0.0, 1e-4, 0.9)
    assert bl == 1.0
    assert b == bl + br
    for N in (16, 64, 256):
        eps, alpha = 2.0 ** -16, 0.9
        s = transition_parameter(eps, alpha, N)
        assert s < 0.25
        assert layer_functions(s, eps, alpha)[0] == pytest.approx(N ** -2.0, rel=1e-12)


def test_layer_function_symmetry_and_monotonicity():
    rng = np.random.default_rng(1)
    x = np.sort(rng.uniform(0, 1, 500))
    for eps in (1e-1, 1e-3, 1e-6):
        bl, br, b = layer_functions(x, eps, 0.9)
        np.testing.assert_allclose(b, layer_functions(1 - x, eps, 0.9)[2], rtol=1e-12)
        assert np.all(np.diff(bl) <= 0) and np.all(np.diff(br) >= 0)
        left = x <= 0.5
        assert np.all(np.diff(b[left]) <= 0)
        assert np.all(np.diff(b[~left]) >= 0)


def test_doubling_keeps_structure():
    eps = 1e-8
    for N in (16, 32, 64, 128):
        m, m2 = build_space_mesh(eps, 1.0, N), build_space_mesh(eps, 1.0, 2 * N)
        assert m.sigma < 0.25 and m2.sigma < 0.25
        assert m2.h_layer != m.h_layer
        assert m2.points[m2.N // 4] == m2.sigma


def test_mesh_csv():
    m = build_space_mesh(2.0 ** -14, 0.9, 8)
    lines = write_mesh_csv(m).splitlines()
    assert len(lines) == 9
    assert np.array_equal(np.array([float(v) for v in lines]), m.points)
