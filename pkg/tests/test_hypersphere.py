import math

import numpy as np
import pytest
import util

from protosphere import hypersphere as hs
from protosphere.errors import ArtifactError


def test_gaussian_potential_same_vector():
    u = util.unit([1.0, 2.0, 2.0])
    assert hs.gaussian_potential(u, u, 2.0) == 1.0


def test_gaussian_potential_antipodal_and_orthogonal():
    e1 = np.array([1.0, 0.0, 0.0])
    e2 = np.array([0.0, 1.0, 0.0])
    assert hs.gaussian_potential(e1, -e1, 2.0) == pytest.approx(math.exp(-8.0), rel=1e-12)
    assert hs.gaussian_potential(e1, e2, 2.0) == pytest.approx(math.exp(-4.0), rel=1e-12)


def test_gaussian_potential_errors():
    e1 = np.array([1.0, 0.0])
    with pytest.raises(ValueError, match="dimension"):
        hs.gaussian_potential(e1, np.array([1.0, 0.0, 0.0]), 2.0)
    with pytest.raises(ValueError, match="positive"):
        hs.gaussian_potential(e1, e1, 0.0)
    with pytest.raises(ValueError, match="unit"):
        hs.gaussian_potential(2.0 * e1, e1, 1.0)


def test_uniformity_loss_single_column_is_zero():
    lone = np.array([[1.0], [0.0]])
    assert hs.uniformity_loss(lone, [0], 2.0) == 0.0


def test_uniformity_loss_antipodal_pair():
    pair = np.array([[1.0, -1.0], [0.0, 0.0]])
    expected = math.log(1.0 + math.exp(-8.0))
    assert hs.uniformity_loss(pair, [0, 1], 2.0) == pytest.approx(expected, rel=1e-12)


def test_uniformity_loss_matches_scalar_double_sum():
    # equilateral triangle on the circle, plus a random configuration
    rng = np.random.default_rng(11)
    configs = [hs.circle_prototypes(3).vectors, util.random_unit_columns(rng, 4, 6)]
    for vecs in configs:
        c = vecs.shape[1]
        subset = list(range(c))
        total = 0.0
        for i in subset:
            for j in range(c):
                diff = vecs[:, i] - vecs[:, j]
                total += math.exp(-2.0 * float(diff @ diff))
        expected = math.log(total / len(subset))
        assert hs.uniformity_loss(vecs, subset, 2.0) == pytest.approx(expected, rel=1e-12)


def test_uniformity_loss_errors():
    vecs = util.random_unit_columns(np.random.default_rng(0), 3, 4)
    with pytest.raises(ValueError, match="empty"):
        hs.uniformity_loss(vecs, [], 2.0)
    with pytest.raises(ValueError, match="range"):
        hs.uniformity_loss(vecs, [0, 4], 2.0)
    with pytest.raises(ValueError, match="distinct"):
        hs.uniformity_loss(vecs, [1, 1], 2.0)


def test_uniformity_gradient_self_pair_is_zero():
    lone = np.array([[0.0], [1.0]])
    assert np.all(hs.uniformity_gradient(lone, [0], 2.0) == 0.0)


@pytest.mark.parametrize("d,c,subset", [(2, 2, [0, 1]), (5, 8, None), (4, 7, [1, 4, 6])])
def test_uniformity_gradient_matches_finite_differences(d, c, subset):
    rng = np.random.default_rng(100 * d + c)
    vecs = util.random_unit_columns(rng, d, c)
    subset = list(range(c)) if subset is None else subset
    grad = hs.uniformity_gradient(vecs, subset, 2.0)
    numeric = util.central_diff(
        lambda flat: hs.uniformity_loss(flat.reshape(d, c), subset, 2.0),
        vecs,
        1e-6,
    )
    util.assert_gradients_close(grad, numeric)


def test_antipodal_gradient_direction_and_scale():
    pair = np.array([[1.0, -1.0], [0.0, 0.0]])
    grad = hs.uniformity_gradient(pair, [0, 1], 2.0)
    numeric = util.central_diff(
        lambda flat: hs.uniformity_loss(flat.reshape(2, 2), [0, 1], 2.0), pair, 1e-6
    )
    util.assert_gradients_close(grad, numeric)
    # repulsion decays with the kernel: tiny but nonzero force at distance 2
    assert 0.0 < np.abs(grad).max() < 1e-2


def test_estimate_prototypes_is_deterministic():
    cfg = hs.UniformityConfig(iterations=50, seed=9)
    a = hs.estimate_prototypes(6, 5, cfg)
    b = hs.estimate_prototypes(6, 5, cfg)
    assert np.array_equal(a.vectors, b.vectors)


@pytest.mark.parametrize("iterations", [1, 7, 40])
def test_estimate_prototypes_projection_invariant(iterations):
    cfg = hs.UniformityConfig(iterations=iterations, seed=3)
    protos = hs.estimate_prototypes(5, 9, cfg)
    norms = np.linalg.norm(protos.vectors, axis=0)
    assert np.abs(norms - 1.0).max() < 1e-9


def test_estimate_prototypes_subset_schedule_runs():
    cfg = hs.UniformityConfig(iterations=300, subset_size=4, seed=2)
    protos = hs.estimate_prototypes(8, 10, cfg)
    assert hs.geometry_report(protos).max_cos < 0.5


def test_monotone_descent_full_subset_small_lr():
    history = []
    cfg = hs.UniformityConfig(learning_rate=0.01, iterations=300, seed=5)
    hs.estimate_prototypes(6, 9, cfg, history=history)
    steps = np.diff(history)
    assert steps.max() <= 1e-10


def test_estimate_reaches_equiangular_bound():
    for d, c in [(32, 10), (16, 8)]:
        protos = hs.estimate_prototypes(d, c, hs.UniformityConfig())
        report = hs.geometry_report(protos)
        assert report.etf_gap <= 0.02
        assert abs(report.max_cos - (-1.0 / (c - 1))) <= 0.02


def test_estimate_d2_matches_circle_split():
    protos = hs.estimate_prototypes(2, 8, hs.UniformityConfig())
    angles = np.sort(np.arctan2(protos.vectors[1], protos.vectors[0]))
    gaps = np.diff(np.concatenate([angles, [angles[0] + 2.0 * np.pi]]))
    assert np.abs(gaps - 2.0 * np.pi / 8).max() < 0.02


def test_estimate_rejects_bad_config():
    with pytest.raises(ValueError):
        hs.estimate_prototypes(4, 6, hs.UniformityConfig(temperature=-1.0))
    with pytest.raises(ValueError):
        hs.estimate_prototypes(4, 6, hs.UniformityConfig(subset_size=7))
    with pytest.raises(ValueError):
        hs.estimate_prototypes(1, 6, hs.UniformityConfig())


def test_circle_prototypes_quadrants():
    protos = hs.circle_prototypes(4)
    expected = np.array([[1.0, 0.0, -1.0, 0.0], [0.0, 1.0, 0.0, -1.0]])
    assert np.allclose(protos.vectors, expected, atol=1e-15)


def test_circle_prototypes_antipodal_and_equilateral():
    pair = hs.circle_prototypes(2)
    assert pair.vectors[:, 0] @ pair.vectors[:, 1] == pytest.approx(-1.0)
    tri = hs.circle_prototypes(3).vectors
    for i in range(3):
        for j in range(i + 1, 3):
            assert tri[:, i] @ tri[:, j] == pytest.approx(-0.5, abs=1e-12)
    with pytest.raises(ValueError):
        hs.circle_prototypes(1)


def test_geometry_report_antipodal_pair():
    report = hs.geometry_report(hs.circle_prototypes(2))
    assert report.apad == pytest.approx(np.pi)
    assert report.min_cos == pytest.approx(-1.0)
    assert report.max_cos == pytest.approx(-1.0)
    assert report.min_pairwise_distance == pytest.approx(2.0)
    assert report.etf_gap == pytest.approx(0.0, abs=1e-12)


def test_geometry_report_rotation_invariant():
    rng = np.random.default_rng(17)
    protos = util.random_unit_columns(rng, 6, 9)
    basis, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    before = hs.geometry_report(protos)
    after = hs.geometry_report(basis @ protos)
    for name in ("apad", "min_cos", "max_cos", "min_pairwise_distance", "etf_gap"):
        assert getattr(before, name) == pytest.approx(getattr(after, name), abs=1e-9)


def test_random_configuration_is_less_separated():
    rng = np.random.default_rng(23)
    random_cfg = util.random_unit_columns(rng, 10, 100)
    optimized = hs.estimate_prototypes(10, 100, hs.UniformityConfig(seed=23))
    rand_report = hs.geometry_report(random_cfg)
    opt_report = hs.geometry_report(optimized)
    assert rand_report.min_pairwise_distance < opt_report.min_pairwise_distance
    # the averaged angular statistic barely separates the two configurations
    assert abs(rand_report.apad - opt_report.apad) < 0.05


def test_prototype_matrix_validation():
    with pytest.raises(ValueError, match="unit-norm violation at column 1"):
        hs.PrototypeMatrix(np.array([[1.0, 0.5], [0.0, 0.0]]))
    with pytest.raises(ValueError, match="dim >= 2"):
        hs.PrototypeMatrix(np.array([[1.0, -1.0]]))


def test_prototype_matrix_is_read_only():
    protos = hs.circle_prototypes(4)
    with pytest.raises(ValueError):
        protos.vectors[0, 0] = 5.0


def test_save_load_round_trip(tmp_path):
    protos = hs.estimate_prototypes(5, 7, hs.UniformityConfig(iterations=100, seed=1))
    path = tmp_path / "protos.txt"
    hs.save_prototypes(protos, path, temperature=2.0, seed=1)
    again = hs.load_prototypes(path)
    assert np.array_equal(protos.vectors, again.vectors)
    # saving the reloaded matrix reproduces the identical bytes
    second = tmp_path / "protos2.txt"
    hs.save_prototypes(again, second, temperature=2.0, seed=1)
    assert path.read_bytes() == second.read_bytes()


def test_load_prototypes_rejects_bad_files(tmp_path):
    bad_header = tmp_path / "a.txt"
    bad_header.write_text("# wrong v1 d=2 c=2\n1,0\n0,1\n")
    with pytest.raises(ArtifactError, match="header"):
        hs.load_prototypes(bad_header)

    bad_width = tmp_path / "b.txt"
    bad_width.write_text("# protosphere-prototypes v1 d=3 c=2 t=2.0 seed=0\n1,0,0\n0,1\n")
    with pytest.raises(ArtifactError, match="components"):
        hs.load_prototypes(bad_width)

    bad_norm = tmp_path / "c.txt"
    bad_norm.write_text("# protosphere-prototypes v1 d=2 c=2 t=2.0 seed=0\n1,0\n0.5,0\n")
    with pytest.raises(ArtifactError, match="unit-norm violation at column 1"):
        hs.load_prototypes(bad_norm)
