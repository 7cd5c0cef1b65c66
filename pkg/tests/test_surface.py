import json

import numpy as np
import pytest

from normalproj.grading import SpaceKind
from normalproj.polynomial import MultiHomogPoly, evaluate, multiply
from normalproj.surface import (
    PoleError,
    SurfaceError,
    SurfaceParam,
    eval_affine,
    eval_affine_jet,
    gallery,
    gallery_names,
    orthogonality_residual,
    reduced_minors,
    segre,
    tangent_cofactors,
    unit_sphere,
)
from normalproj.polynomial import partial_derivative

TEN = SpaceKind.TENSOR_PRODUCT


def test_segre_minors():
    s = segre()
    d = reduced_minors(s).deltas
    want = [
        {(1, 0, 0, 1, 0, 0): 1.0},   # ubar v
        {(0, 1, 1, 0, 0, 0): 1.0},   # u vbar
        {(1, 0, 1, 0, 0, 0): -1.0},  # -ubar vbar
    ]
    got = [x.pruned().terms() for x in d[1:]]
    sign = np.sign(got[0][(1, 0, 0, 1, 0, 0)])
    assert [{k: sign * c for k, c in g.items()} for g in got] == want


def test_segre_minors_match_normal_direction():
    # affine normal of (u, v, uv) is proportional to (-v, -u, 1)
    s = segre()
    d = reduced_minors(s).deltas
    rng = np.random.default_rng(0)
    for u, v in rng.uniform(-2, 2, (10, 2)):
        x = [1.0, u, 1.0, v, 1.0, 0.0]
        n = np.array([evaluate(di, x) for di in d[1:]])
        assert np.linalg.norm(np.cross(n, [-v, -u, 1.0])) < 1e-12


def test_degree_one_rejected():
    with pytest.raises(SurfaceError):
        SurfaceParam.from_affine("triangular", 1, [{(0, 0): 1}, {(1, 0): 1}, {(0, 1): 1}, {}])


def test_non_rational_needs_pure_denominator():
    with pytest.raises(SurfaceError):
        SurfaceParam.from_affine(
            "triangular", 2, [{(0, 0): 1, (1, 0): 1}, {(1, 0): 1}, {(0, 1): 1}, {(2, 0): 1}], rational=False
        )


def test_zero_denominator_rejected():
    with pytest.raises(SurfaceError):
        SurfaceParam.from_affine("tensor", (1, 1), [{}, {(1, 0): 1}, {(0, 1): 1}, {(1, 1): 1}])


def x_row_check(s, rng, n=20):
    d = reduced_minors(s).deltas
    for _ in range(n):
        xi = rng.standard_normal(s.kind.nvars)
        x = np.array([evaluate(f, xi) for f in s.F])
        dv = np.array([evaluate(di, xi) for di in d])
        assert abs(x @ dv) <= 1e-10 * np.linalg.norm(x) * np.linalg.norm(dv)


@pytest.mark.parametrize("rational", [False, True])
@pytest.mark.parametrize("seed", range(3))
def test_tangent_plane_identity_triangular(rational, seed):
    rng = np.random.default_rng(seed)
    x_row_check(SurfaceParam.random("triangular", 3, rational, rng), rng)


@pytest.mark.parametrize("degree", [(1, 1), (1, 2), (2, 2)])
@pytest.mark.parametrize("rational", [False, True])
def test_tangent_plane_identity_tensor(degree, rational):
    rng = np.random.default_rng(11)
    x_row_check(SurfaceParam.random("tensor", degree, rational, rng), rng)


@pytest.mark.parametrize("seed", range(3))
def test_unreduced_determinant_divisible_by_vbar(seed):
    s = SurfaceParam.random("tensor", (2, 1), True, np.random.default_rng(seed))
    rows = [[partial_derivative(f, var) for f in s.F] for var in ("u", "ubar", "v")]
    raw = tangent_cofactors(rows)
    scale = max(np.max(np.abs(d.coeffs)) for d in raw)
    for d in raw:
        for mono, c in d.terms().items():
            if mono[2] == 0:  # no vbar factor
                assert abs(c) <= 1e-12 * scale
    # the reduced field times vbar gives back the determinant
    vbar = MultiHomogPoly.monomial(TEN, (0, 0, 1, 0, 0, 0))
    for d, r in zip(raw, reduced_minors(s).deltas):
        assert np.max(np.abs(multiply(r, vbar).coeffs - d.coeffs)) <= 1e-10 * scale


def test_eval_segre():
    s = segre()
    assert np.allclose(eval_affine(s, 1, 1), [1, 1, 1])
    assert np.allclose(eval_affine(s, 0, 0), [0, 0, 0])
    assert np.allclose(eval_affine(s, 0.3, -2.0), [0.3, -2.0, -0.6])


def test_eval_at_pole():
    s = SurfaceParam.from_affine("triangular", 2, [{(1, 0): 1}, {(0, 0): 1}, {(0, 1): 1}, {(2, 0): 1}])
    with pytest.raises(PoleError):
        eval_affine(s, 0.0, 0.5)


def test_jet_matches_finite_differences():
    s = SurfaceParam.random("triangular", 3, True, np.random.default_rng(5))
    u, v, h = 0.3, -0.2, 1e-6
    _, pu, pv = eval_affine_jet(s, u, v)
    assert np.allclose(pu, (eval_affine(s, u + h, v) - eval_affine(s, u - h, v)) / (2 * h), atol=1e-7)
    assert np.allclose(pv, (eval_affine(s, u, v + h) - eval_affine(s, u, v - h)) / (2 * h), atol=1e-7)


def test_orthogonality_residual_segre():
    s = segre()
    p = (0.0, 0.0, 2.0)
    assert orthogonality_residual(s, p, 1.0, 1.0) < 1e-12
    assert orthogonality_residual(s, p, 0.0, 0.0) < 1e-12
    assert orthogonality_residual(s, p, -1.0, -1.0) < 1e-12
    # r = (0.5, 0.5, -1.75), phi_u = (1, 0, 0.5): r . phi_u = -0.375, symmetric in v
    r, pu = np.array([0.5, 0.5, -1.75]), np.array([1.0, 0.0, 0.5])
    want = 0.375 / ((1 + np.linalg.norm(r)) * (1 + np.linalg.norm(pu)))
    assert orthogonality_residual(s, p, 0.5, 0.5) == pytest.approx(want, rel=1e-12)


def test_sphere():
    s = unit_sphere()
    assert s.rational and s.kind is SpaceKind.TRIANGULAR
    rng = np.random.default_rng(2)
    for u, v in rng.uniform(-3, 3, (10, 2)):
        assert np.isclose(np.linalg.norm(eval_affine(s, u, v)), 1.0)
    assert np.allclose(eval_affine(s, 0, 0), [0, 0, -1])
    assert np.allclose(eval_affine(s, 1, 0), [1, 0, 0])


def test_json_round_trip(tmp_path):
    s = SurfaceParam.random("tensor", (1, 2), True, np.random.default_rng(4))
    path = tmp_path / "s.json"
    s.save(path)
    t = SurfaceParam.load(path)
    assert t.content_hash == s.content_hash
    assert all(np.array_equal(a.coeffs, b.coeffs) for a, b in zip(s.F, t.F))
    doc = json.loads(path.read_text())
    assert set(doc) == {"kind", "degree", "rational", "F"}


def test_hash_depends_on_content():
    a = SurfaceParam.random("triangular", 2, False, np.random.default_rng(0))
    b = SurfaceParam.random("triangular", 2, False, np.random.default_rng(1))
    assert a.content_hash != b.content_hash
    assert a.content_hash == SurfaceParam.from_json(a.to_json()).content_hash


def test_load_malformed(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(SurfaceError):
        SurfaceParam.load(path)
    path.write_text(json.dumps({"kind": "triangular", "degree": [2]}))
    with pytest.raises(SurfaceError):
        SurfaceParam.load(path)


def test_gallery():
    assert {"segre", "sphere"} <= set(gallery_names())
    assert gallery("segre").content_hash == segre().content_hash
    assert gallery("sphere").content_hash == unit_sphere().content_hash
    with pytest.raises(SurfaceError):
        gallery("torus")
