import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ebk import (
    ConfigError,
    InsufficientCloud,
    LevelSurface,
    NonGraphical,
    PointCloud,
    RamosCurve,
    TooFewNicePoints,
    ToricProfile,
    conjugate_function,
    convex_conjugate,
    euclidean_profile,
    harmonic_profile,
    hausdorff_distance,
    hypersurface_transform,
    legendre_point,
    marked_action_spectrum,
    pnorm_profile,
    reconstruct_surface,
    support_function,
)


def quadratic_bowl():
    return ToricProfile(name="quad", dimension=2, degree=2.0,
                        evaluate_fn=lambda p: 0.5 * (p ** 2).sum(axis=-1),
                        gradient_fn=lambda p: np.asarray(p, dtype=float))


def quartic_bowl():
    return ToricProfile(name="quartic", dimension=2, degree=4.0,
                        evaluate_fn=lambda p: 0.25 * (p ** 4).sum(axis=-1),
                        gradient_fn=lambda p: np.asarray(p, dtype=float) ** 3)


# --- convex conjugate ---

def test_conjugate_quadratic_self_dual():
    value, argmax = convex_conjugate(quadratic_bowl(), (1.0, 2.0))
    assert value == pytest.approx(2.5, abs=1e-10)
    assert np.allclose(argmax, [1.0, 2.0], atol=1e-8)


def test_conjugate_quartic_one_dim():
    f = ToricProfile(name="quartic1", dimension=1, degree=4.0,
                     evaluate_fn=lambda p: 0.25 * (p ** 4).sum(axis=-1),
                     gradient_fn=lambda p: np.asarray(p, dtype=float) ** 3)
    value, argmax = convex_conjugate(f, (8.0,))
    assert value == pytest.approx(12.0, rel=1e-10)
    assert argmax[0] == pytest.approx(2.0, rel=1e-8)


def test_conjugate_at_origin_is_zero():
    value, _ = convex_conjugate(quadratic_bowl(), (0.0, 0.0))
    assert value == 0.0


@pytest.mark.parametrize("profile", [quadratic_bowl(), quartic_bowl()],
                         ids=["quad", "quartic"])
def test_double_conjugate_involution(profile):
    dual = conjugate_function(profile)
    double = conjugate_function(dual)
    rng = np.random.default_rng(21)
    for _ in range(100):
        p = rng.uniform(0.2, 2.0, 2)
        want = profile.evaluate(p)
        assert abs(double.evaluate(p) - want) <= 1e-8 * abs(want)


def test_conjugate_function_degree():
    dual = conjugate_function(quartic_bowl())
    assert dual.degree == pytest.approx(4.0 / 3.0)
    with pytest.raises(ConfigError):
        conjugate_function(harmonic_profile((1.0, 2.0)))  # degree 1 has no
        # smooth conjugate


@given(st.floats(0.2, 2.0), st.floats(0.2, 2.0),
       st.floats(0.2, 3.0), st.floats(0.2, 3.0))
@settings(max_examples=30, deadline=None)
def test_fenchel_young_inequality(p1, p2, q1, q2):
    f = quadratic_bowl()
    value, _ = convex_conjugate(f, (q1, q2))
    assert p1 * q1 + p2 * q2 <= f.evaluate((p1, p2)) + value + 1e-8


# --- support function ---

def test_support_circle():
    circle = LevelSurface.from_profile(euclidean_profile(2))
    assert support_function(circle, (3.0, 4.0)) == pytest.approx(5.0, abs=1e-9)


def test_support_segment_endpoint():
    seg = LevelSurface.from_profile(harmonic_profile((1.0, 2.0)))
    assert support_function(seg, (1.0, 0.0)) == pytest.approx(1.0, abs=1e-6)


def test_support_ramos_inf_variant():
    # concave orientation flips sup to inf; minimum of <rho(a), (1,1)> is at
    # the symmetric point rho(pi/2) = (1, 1)
    rc = RamosCurve()
    assert support_function(rc, (1.0, 1.0)) == pytest.approx(2.0, abs=1e-9)


def test_support_homogeneity():
    circle = LevelSurface.from_profile(euclidean_profile(2))
    q = np.array([0.3, 1.7])
    base = support_function(circle, q)
    for t in (2.0, 10.0):
        assert abs(support_function(circle, t * q) - t * base) <= 1e-12 * t * base


# --- hypersurface transform ---

def test_transform_circle_self_dual():
    circle = LevelSurface.from_profile(euclidean_profile(2))
    dual = hypersurface_transform(circle)
    assert hausdorff_distance(circle, dual) <= 1e-9


def test_transform_ellipse_arc_involution():
    ell = ToricProfile(
        name="ellipse", dimension=2, degree=1.0,
        evaluate_fn=lambda p: np.sqrt(p[..., 0] ** 2 / 4.0 + p[..., 1] ** 2),
        gradient_fn=lambda p: np.stack([p[..., 0] / 4.0, p[..., 1]], axis=-1)
            / np.sqrt(p[..., 0] ** 2 / 4.0 + p[..., 1] ** 2)[..., None])
    surf = LevelSurface.from_profile(ell)
    double = hypersurface_transform(hypersurface_transform(surf))
    assert hausdorff_distance(surf, double) <= 1e-6


def test_transform_segment_too_flat():
    seg = LevelSurface.from_profile(harmonic_profile((1.0, 2.0)))
    with pytest.raises(TooFewNicePoints):
        hypersurface_transform(seg)


@pytest.mark.parametrize("s", [2.0, 3.0, 4.0])
def test_pointwise_involution_superellipse(s):
    surf = LevelSurface.from_profile(pnorm_profile(s))
    dual = hypersurface_transform(surf)
    ts = np.linspace(surf.param_lo, surf.param_hi, 101)[1:-1]
    pts = surf.point(ts)
    nrms = surf.normal(ts)
    for p, n in zip(pts, nrms):
        q = legendre_point(p, n)
        # normal of the dual at the image point, via inversion
        t_q = dual.invert_normal(p).params[0]
        back = legendre_point(dual.point(t_q), dual.normal(t_q))
        assert np.abs(back - p).max() <= 1e-8


@pytest.mark.parametrize("s", [2.0, 3.0, 4.0])
def test_dual_supports_primal_at_one(s):
    surf = LevelSurface.from_profile(pnorm_profile(s))
    dual = hypersurface_transform(surf)
    ts = np.linspace(surf.param_lo, surf.param_hi, 64)[1:-1]
    for p in surf.point(ts):
        assert support_function(dual, p) == pytest.approx(1.0, abs=1e-6)


# --- point clouds and reconstruction ---

def test_point_cloud_from_actions_dedup():
    surf = LevelSurface.from_profile(euclidean_profile(2))
    acts = marked_action_spectrum(surf, 8)
    cloud = PointCloud.from_actions(acts)
    # k/a on the unit circle is k/|k|: all cloud points at radius 1
    assert np.abs(np.linalg.norm(cloud.points, axis=1) - 1.0).max() <= 1e-12
    dists = np.linalg.norm(cloud.points[:, None] - cloud.points[None], axis=-1)
    np.fill_diagonal(dists, 1.0)
    assert dists.min() > 1e-12


def test_point_cloud_validation():
    with pytest.raises(ConfigError):
        PointCloud(np.array([[1.0, np.inf]]))
    with pytest.raises(ConfigError):
        PointCloud(np.ones((3, 3)))


def test_reconstruct_circle():
    surf = LevelSurface.from_profile(euclidean_profile(2))
    acts = marked_action_spectrum(surf, 50)
    result = reconstruct_surface(PointCloud.from_actions(acts), reference=surf)
    assert result.report.hausdorff_vs_reference <= 1e-3
    assert result.report.cloud_size == len(acts.entries)


def test_reconstruct_rejects_small_cloud():
    with pytest.raises(InsufficientCloud):
        reconstruct_surface(PointCloud(np.random.default_rng(0).uniform(
            0.5, 1.0, (5, 2))))


def test_from_points_rejects_nongraphical():
    pts = [(np.cos(t), np.sin(t)) for t in np.linspace(0.1, 1.4, 30)]
    pts.append((2.0 * np.cos(0.1), 2.0 * np.sin(0.1)))
    with pytest.raises(NonGraphical):
        LevelSurface.from_points(np.array(pts))
