"""Smoke test for the poincare_korn_py extension.

Build and install first:

    pip install --no-build-isolation -e crates/python

Then run ``python python/smoke_test.py`` or ``pytest python/smoke_test.py``.
"""

import math

import poincare_korn_py as pk


def test_geometry():
    sq = pk.Domain.unit_square(4)
    assert abs(sq.measure - 1.0) < 1e-14
    assert sq.boundary_tags == ["bottom", "right", "top", "left"]
    lsh = pk.Domain.l_shape(2)
    assert abs(lsh.measure - 3.0) < 1e-14
    # int x over [0,2]x[0,1] plus [0,1]x[1,2]
    assert abs(lsh.moment([1, 0]) - 2.5) < 1e-13
    disk = pk.Domain.ball(2)
    assert abs(disk.measure - math.pi) < 1e-14
    again = pk.Domain.from_mesh_text(lsh.mesh_text())
    assert abs(again.measure - 3.0) < 1e-14


def test_poincare_constant():
    sq = pk.Domain.unit_square(2)
    q = pk.sharp_constant(pk.PolySpace(sq, 8), "PoincareQ")
    assert q["lower_bound"]
    assert 1 / math.pi - 1e-3 <= q["value"] <= 1 / math.pi + 1e-8


def test_ball_operator_norm():
    ball = pk.Domain.ball(2)
    space = pk.PolySpace(ball, 6)
    for rho in (0.3, 0.5, 0.7):
        e = pk.Region.concentric_ball(ball, rho)
        t = pk.build_projection(space, "AffineRegion", e)
        norm = pk.operator_norm(t, "W22", space)
        assert 1 - 1e-10 <= norm <= math.sqrt(5 / 4) / rho + 1e-9


def test_projection_reproduces_affine_functions():
    sq = pk.Domain.unit_square(3)
    space = pk.PolySpace(sq, 4)
    corner = pk.BoundaryPortion.from_tags(sq, ["bottom", "left"])
    t = pk.build_projection(space, "TauTrace", corner)
    u = space.affine_coefficients(0.3, [-1.2, 0.7])
    v = t.apply(u)
    assert max(abs(a - b) for a, b in zip(u, v)) < 1e-10
    value, grad, _ = space.evaluate(v, [0.25, 0.5])
    assert abs(value - (0.3 - 1.2 * 0.25 + 0.7 * 0.5)) < 1e-10
    assert abs(grad[0] + 1.2) < 1e-10 and abs(grad[1] - 0.7) < 1e-10


def test_flat_portion():
    sq = pk.Domain.unit_square(2)
    space = pk.PolySpace(sq, 3)
    bottom = pk.BoundaryPortion.from_tags(sq, ["bottom"])
    assert bottom.affine_hull() == (1, True)
    try:
        pk.build_projection(space, "TauTrace", bottom)
    except pk.FlatPortionError:
        pass
    else:
        raise AssertionError("flat portion accepted")
    assert pk.check_flat(space, bottom)["passed"]
    vec = pk.PolySpace(sq, 2, codim=2)
    assert pk.injectivity(vec, bottom, "Rigid")["injective"]


def test_inverse_trace_norm_by_grid():
    sq = pk.Domain.unit_square(2)
    space = pk.PolySpace(sq, 2)
    e = pk.e_inverse_norm(space, pk.BoundaryPortion.whole_boundary(sq), "Affine")

    def quotient(a, b0, b1):
        omega = a * a + a * (b0 + b1) + (b0 * b0 + b1 * b1) / 3 + b0 * b1 / 2
        gamma = 4 * a * a + 4 * a * (b0 + b1) + 5 / 3 * (b0 * b0 + b1 * b1) + 2 * b0 * b1
        return (omega + b0 * b0 + b1 * b1) / gamma

    n = 200
    best = 0.0
    for i in range(n):
        theta = math.pi * (i + 0.5) / n
        for j in range(2 * n):
            phi = math.pi * j / n
            a = math.cos(theta)
            b0 = math.sin(theta) * math.cos(phi)
            b1 = math.sin(theta) * math.sin(phi)
            best = max(best, quotient(a, b0, b1))
    assert abs(e - math.sqrt(best)) / e < 1e-3


def test_bounds_and_certification():
    sq = pk.Domain.unit_square(4)
    quarter = pk.Region.centroid_box(sq, [0, 0], [0.5, 0.5])
    q = 1 / math.pi
    bound = pk.paper_bound({"case": "PoincareE"}, {"q": q, "omega_measure": 1.0, "region_measure": 0.25})
    assert abs(bound - 3 * math.sqrt(1 + q * q)) < 1e-12
    assert pk.meyers_compose(2.0, 1.5) == 5.0
    assert "H2TauTrace" in pk.case_names()

    report = pk.certify(sq, "H2E", region=quarter, scalar_degree=6, vector_degree=4, trials=200, seed=1)
    assert report["passed"], report["checks"]
    assert report["random_max"] <= report["sup_ratio"] <= report["composed_bound"] <= report["paper_bound"]

    corner = pk.BoundaryPortion.from_tags(sq, ["bottom", "left"])
    report = pk.certify(sq, "KornRhoTrace", portion=corner, scalar_degree=6, vector_degree=4, trials=200)
    assert report["passed"] and report["corollary"]["passed"]

    space = pk.PolySpace(sq, 6)
    t = pk.build_projection(space, "AvgRegion", quarter)
    sup, rand = pk.worst_ratios(space, t, "W12", "grad", trials=100, seed=3)
    assert rand <= sup + 1e-9


if __name__ == "__main__":
    tests = [(name, f) for name, f in sorted(globals().items()) if name.startswith("test_")]
    for name, f in tests:
        f()
        print(f"ok {name}")
    print(f"{len(tests)} passed")
