"""Quadratic forms, seminorms, time tails, and the density machinery."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonlocal_pme import (
    Grid,
    GridFunction,
    LevyMeasureSpec,
    PathFunction,
    TruncatedOperator,
    apply_truncated,
    bilinear,
    density_approximation,
    parabolic_bilinear,
    parabolic_seminorm,
    shrink_clamp,
    sobolev_seminorm_direct,
    sobolev_seminorm_fourier,
    spatial_cutoff,
    time_tail,
    truncate_and_atomize,
)


def make_atoms(points=64, halfwidth=8.0, alpha=1.0, r=0.5, tail=4.0):
    grid = Grid(dims=1, points_per_axis=points, halfwidth=halfwidth)
    spec = LevyMeasureSpec.fractional(alpha, dims=1)
    return grid, truncate_and_atomize(spec, grid, r, tail)


def brute_bilinear(atoms, fv, gv):
    """Plain-Python reference: (h/2) sum_x sum_k w_k (f(x+j)-f(x))(g(x+j)-g(x))."""
    grid = atoms.grid
    m = grid.points_per_axis
    total = 0.0
    for k in range(atoms.natoms):
        j = int(atoms.offsets[k, 0])
        w = float(atoms.weights[k])
        for i in range(m):
            df = fv[(i + j) % m] - fv[i]
            dg = gv[(i + j) % m] - gv[i]
            total += w * df * dg
    return 0.5 * grid.cell_volume * total


def test_bilinear_matches_brute_force():
    grid, atoms = make_atoms(points=32)
    rng = np.random.default_rng(5)
    fv = rng.standard_normal(32)
    gv = rng.standard_normal(32)
    got = bilinear(atoms, GridFunction(grid, fv), GridFunction(grid, gv))
    assert got == pytest.approx(brute_bilinear(atoms, fv, gv), rel=1e-12)


def test_summation_by_parts():
    grid, atoms = make_atoms()
    op = TruncatedOperator(atoms)
    rng = np.random.default_rng(11)
    for _ in range(10):
        f = GridFunction(grid, rng.standard_normal(grid.npoints))
        g = GridFunction(grid, rng.standard_normal(grid.npoints))
        pairing = grid.cell_volume * float(np.dot(g.values, apply_truncated(op, f).values))
        energy = bilinear(atoms, f, g)
        assert pairing == pytest.approx(-energy, rel=1e-12, abs=1e-12 * max(1.0, abs(energy)))


def test_parabolic_bilinear_is_a_left_rule_in_time():
    grid, atoms = make_atoms(points=32)
    rng = np.random.default_rng(7)
    frames = rng.standard_normal((5, 32))
    path = PathFunction.from_frames(grid, frames, duration=2.0)
    want = sum(
        path.dt * bilinear(atoms, path.frame(k), path.frame(k)) for k in range(path.nsteps)
    )
    assert parabolic_bilinear(atoms, path, path) == pytest.approx(want, rel=1e-12)
    assert parabolic_seminorm(atoms, path) == pytest.approx(math.sqrt(want), rel=1e-12)


def test_time_tail_of_constant_path_is_exact():
    grid, atoms = make_atoms(points=32)
    rng = np.random.default_rng(9)
    base = rng.standard_normal(32)
    frames = np.tile(base, (6, 1))
    path = PathFunction.from_frames(grid, frames, duration=3.0)
    tail = time_tail(path)
    for k, t in enumerate(path.times):
        np.testing.assert_allclose(tail.frames[k], (3.0 - t) * base, rtol=1e-13, atol=1e-13)
    assert np.all(tail.frames[-1] == 0.0)


def test_time_tail_energy_bound():
    # |time_tail(f)|^2 <= (T^2/2)(1 + dt/T) |f|^2 in the parabolic seminorm
    grid, atoms = make_atoms(points=32)
    rng = np.random.default_rng(13)
    for trial in range(5):
        frames = rng.standard_normal((7, 32))
        path = PathFunction.from_frames(grid, frames, duration=1.5)
        lhs = parabolic_bilinear(atoms, time_tail(path), time_tail(path))
        rhs = parabolic_bilinear(atoms, path, path)
        duration = path.duration
        bound = 0.5 * duration**2 * (1.0 + path.dt / duration) * rhs
        assert lhs <= bound * (1.0 + 1e-12)


def test_fourier_seminorm_matches_gaussian_closed_form():
    # continuum value for exp(-x^2 / (2 sigma^2)): Gamma((alpha+1)/2) sigma^(1-alpha)
    # under the square root; the grid truncation leaves well under 1% here
    grid = Grid(dims=1, points_per_axis=2048, halfwidth=32.0)
    x = grid.axis_coordinates()
    for alpha in (0.5, 1.0, 1.5):
        for sigma in (0.7, 1.0):
            f = GridFunction(grid, np.exp(-(x**2) / (2.0 * sigma**2)))
            want = math.sqrt(math.gamma((alpha + 1.0) / 2.0) * sigma ** (1.0 - alpha))
            assert sobolev_seminorm_fourier(alpha, f) == pytest.approx(want, rel=1e-2)


def test_seminorm_routes_agree():
    grid = Grid(dims=1, points_per_axis=1024, halfwidth=32.0)
    x = grid.axis_coordinates()
    f = GridFunction(grid, np.exp(-(x**2) / (2.0 * 0.5**2)))
    for alpha in (0.5, 1.0, 1.5):
        spectral = sobolev_seminorm_fourier(alpha, f)
        direct = sobolev_seminorm_direct(alpha, f)
        assert abs(spectral - direct) / spectral < 0.01


def test_shrink_clamp_by_hand():
    vals = shrink_clamp(np.array([0.3, 1.0, -3.0, 2.6, -0.2, 0.0]), 0.5)
    np.testing.assert_array_equal(vals, [0.0, 0.5, -2.0, 2.0, 0.0, 0.0])


@settings(max_examples=100, deadline=None)
@given(
    x=st.floats(min_value=-1e3, max_value=1e3),
    y=st.floats(min_value=-1e3, max_value=1e3),
    delta=st.floats(min_value=1e-3, max_value=10.0),
)
def test_shrink_clamp_is_a_normal_contraction(x, y, delta):
    tx = float(shrink_clamp(x, delta))
    ty = float(shrink_clamp(y, delta))
    assert abs(tx) <= abs(x)
    assert abs(tx - ty) <= abs(x - y) + 1e-12 * (abs(x) + abs(y))
    if abs(x) <= delta:
        assert tx == 0.0


def test_spatial_cutoff_levels():
    grid = Grid(dims=1, points_per_axis=256, halfwidth=8.0)
    cut = spatial_cutoff(grid, 2.0)
    x = grid.axis_coordinates()
    assert np.all(cut.values[np.abs(x) <= 2.0] == 1.0)
    assert np.all(cut.values[np.abs(x) >= 4.0] == 0.0)
    assert np.all((0.0 <= cut.values) & (cut.values <= 1.0))


def test_path_function_validation():
    grid = Grid(dims=1, points_per_axis=8, halfwidth=2.0)
    with pytest.raises(ValueError):
        PathFunction(grid, np.array([0.0, 1.0, 3.0]), np.zeros((3, 8)))
    with pytest.raises(ValueError):
        PathFunction(grid, np.array([0.5, 1.0]), np.zeros((2, 8)))
    with pytest.raises(ValueError):
        PathFunction(grid, np.array([0.0, 1.0]), np.zeros((3, 8)))


def test_density_approximation_band_and_shrink():
    grid = Grid(dims=1, points_per_axis=64, halfwidth=8.0)
    x = grid.axis_coordinates()
    duration = 1.0

    def pulse(coords, t):
        envelope = math.e * math.exp(-1.0 / (1.0 - (2.0 * t / duration - 1.0) ** 2)) if 0 < t < duration else 0.0
        return np.exp(-(coords[:, 0] ** 2)) * envelope

    path = PathFunction.sampled(grid, duration, nsteps=40, func=pulse)
    delta = duration / 10.0
    approx = density_approximation(path, delta)
    assert np.max(np.abs(approx.frames)) <= np.max(np.abs(path.frames)) + 1e-12
    # the band restriction plus two time mollifications of radius
    # kt = floor(delta/dt) keeps the support inside [2 delta - 2 kt dt, T - delta]
    kt = int(np.floor(delta / path.dt))
    late = path.times > duration - delta + 1e-9
    early = path.times < 2.0 * delta - 2.0 * kt * path.dt - 1e-9
    assert np.any(late)
    assert np.all(approx.frames[late] == 0.0)
    assert np.all(approx.frames[early] == 0.0)
    assert np.any(np.abs(approx.frames) > 0.0)


def test_density_approximation_rejects_wide_delta():
    grid = Grid(dims=1, points_per_axis=16, halfwidth=2.0)
    path = PathFunction.from_frames(grid, np.ones((5, 16)), duration=1.0)
    with pytest.raises(ValueError):
        density_approximation(path, 0.21)
    density_approximation(path, 0.2)  # the boundary case is admissible
