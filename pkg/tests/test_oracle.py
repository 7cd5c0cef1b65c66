import numpy as np
import pytest

from normalproj.oracle import OracleOptions, gradient_D, match_solutions, oracle_project
from normalproj.surface import PoleError, SurfaceParam, eval_affine, orthogonality_residual, segre, unit_sphere

CLASSES = [
    ("triangular", 2, False),
    ("triangular", 3, True),
    ("tensor", (1, 1), True),
    ("tensor", (2, 2), False),
]


def D(s, p, u, v):
    r = eval_affine(s, u, v) - p
    return float(r @ r)


def fd_check(s, p, u, v, h=1e-6):
    gu, gv = gradient_D(s, p, u, v)
    fu = (D(s, p, u + h, v) - D(s, p, u - h, v)) / (2 * h)
    fv = (D(s, p, u, v + h) - D(s, p, u, v - h)) / (2 * h)
    scale = max(1.0, abs(gu), abs(gv))
    return abs(gu - fu) / scale, abs(gv - fv) / scale


def test_gradient_examples():
    s = segre()
    assert gradient_D(s, (0, 0, 2), 0.5, 0.5) == pytest.approx((-0.75, -0.75), abs=1e-14)
    assert gradient_D(s, (0, 0, 2), 1.0, 1.0) == pytest.approx((0.0, 0.0), abs=1e-14)
    t = SurfaceParam.random("triangular", 3, True, np.random.default_rng(0))
    p = eval_affine(t, 0.2, 0.6)
    assert gradient_D(t, p, 0.2, 0.6) == pytest.approx((0.0, 0.0), abs=1e-12)


def test_gradient_finite_differences():
    rng = np.random.default_rng(0)
    worst = 0.0
    for i in range(100):
        kind, deg, rat = CLASSES[i % len(CLASSES)]
        s = SurfaceParam.random(kind, deg, rat, rng)
        u, v = rng.uniform(-1, 1, 2)
        p = rng.uniform(-1, 1, 3)
        worst = max(worst, *fd_check(s, p, u, v))
    assert worst < 1e-5


def test_gradient_at_pole():
    s = SurfaceParam.from_affine("triangular", 2, [{(1, 0): 1}, {(0, 0): 1}, {(0, 1): 1}, {(2, 0): 1}])
    with pytest.raises(PoleError):
        gradient_D(s, (0, 0, 0), 0.0, 0.3)


def test_oracle_segre():
    found = oracle_project(segre(), (0, 0, 2), OracleOptions(domain=(-2, 2, -2, 2)))
    uv = sorted((round(u, 8) + 0.0, round(v, 8) + 0.0) for u, v, _ in found)
    assert uv == [(-1.0, -1.0), (0.0, 0.0), (1.0, 1.0)]
    assert [round(d, 10) for *_, d in found] == [round(np.sqrt(3), 10)] * 2 + [2.0]


def test_oracle_point_on_surface():
    s = SurfaceParam.random("tensor", (2, 2), False, np.random.default_rng(1))
    p = eval_affine(s, 0.4, 0.35)
    found = oracle_project(s, p)
    assert any(abs(u - 0.4) < 1e-8 and abs(v - 0.35) < 1e-8 and d < 1e-10 for u, v, d in found)


def test_oracle_sphere():
    s = unit_sphere()
    box = OracleOptions(domain=(-3, 3, -3, 3))
    # the north pole has no finite parameter; from below the nearest point is the south pole
    u, v, d = oracle_project(s, (0, 0, -3), box)[0]
    assert (abs(u), abs(v)) < (1e-8, 1e-8) and d == pytest.approx(2.0)
    u, v, d = oracle_project(s, (3, 0, 0), box)[0]
    assert np.allclose(eval_affine(s, u, v), [1, 0, 0]) and d == pytest.approx(2.0)
    # from above only the far critical point is finite
    found = oracle_project(s, (0, 0, 3), box)
    assert len(found) == 1 and found[0][2] == pytest.approx(4.0)


@pytest.mark.parametrize("kind,deg,rat", CLASSES)
def test_oracle_outputs_are_critical(kind, deg, rat):
    rng = np.random.default_rng(2)
    s = SurfaceParam.random(kind, deg, rat, rng)
    for p in rng.uniform(-1, 1, (3, 3)):
        for u, v, d in oracle_project(s, p, OracleOptions(domain=(-1, 1, -1, 1))):
            assert orthogonality_residual(s, p, u, v) < 1e-8
            assert d == pytest.approx(np.linalg.norm(eval_affine(s, u, v) - p))


def test_oracle_sorted_and_in_domain():
    rng = np.random.default_rng(3)
    s = SurfaceParam.random("triangular", 3, False, rng)
    opts = OracleOptions(domain=(-0.5, 0.5, 0.0, 1.0))
    found = oracle_project(s, rng.uniform(-1, 1, 3), opts)
    assert [d for *_, d in found] == sorted(d for *_, d in found)
    for u, v, _ in found:
        assert -0.5 - 1e-8 <= u <= 0.5 + 1e-8 and -1e-8 <= v <= 1 + 1e-8


@pytest.mark.parametrize("seed", range(4))
def test_grid_refinement_is_monotone(seed):
    rng = np.random.default_rng(seed)
    s = SurfaceParam.random("tensor", (2, 2), False, rng)
    p = rng.uniform(-1, 1, 3)
    coarse = oracle_project(s, p, OracleOptions(grid_n=20, domain=(-1, 1, -1, 1)))
    fine = oracle_project(s, p, OracleOptions(grid_n=40, domain=(-1, 1, -1, 1)))
    _, missed, _ = match_solutions(fine, coarse, 1e-6)
    assert missed == []


def test_match_solutions():
    found = [(0.0, 0.0), (1.0, 1.0), (5.0, 5.0)]
    expected = [(1.0, 1.0 + 1e-7, 0.3), (0.0, 0.0, 0.1), (-1.0, -1.0, 0.2)]
    matched, missed, extra = match_solutions(found, expected, 1e-5)
    assert len(matched) == 2
    assert missed == [(-1.0, -1.0)]
    assert extra == [(5.0, 5.0)]


def test_bad_options():
    with pytest.raises(ValueError):
        OracleOptions(grid_n=1)
    with pytest.raises(ValueError):
        OracleOptions(newton_tol=0)
