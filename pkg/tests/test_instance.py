import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from whub.instance import (
    Instance,
    InstanceError,
    Selection,
    barycenter_cost,
    build_edm,
    gen_random,
    gen_wheel,
    instance_from_json,
    load_instance,
    objective_value,
    save_instance,
    wasserstein_value,
    wheel_radius,
)


def test_edm_unit_segment():
    edm = build_edm(Instance.from_sets([[[0, 0]], [[1, 0]]]))
    np.testing.assert_array_equal(edm.D, [[0, 1], [1, 0]])
    assert edm.Dhat.shape == (3, 3)
    assert not edm.Dhat[0].any() and not edm.Dhat[:, 0].any()


def test_edm_345_triangle():
    edm = build_edm(Instance.from_sets([[[0, 0]], [[3, 0]], [[0, 4]]]))
    np.testing.assert_array_equal(edm.D, [[0, 9, 16], [9, 0, 25], [16, 25, 0]])


def test_edm_is_hollow_symmetric_nonnegative(rng):
    inst = gen_random(4, 5, 3, True, 7)
    D = build_edm(inst).D
    assert np.all(np.diag(D) == 0) and np.array_equal(D, D.T) and D.min() >= 0
    i, j = 2, 11
    assert D[i, j] == pytest.approx(((inst.points[i] - inst.points[j]) ** 2).sum(), rel=1e-14)


def test_wheel_fixture_minimum_selection(wheel3):
    edm = build_edm(wheel3)
    idx = Selection((2, 3, 2)).global_indices(wheel3.sizes)
    assert list(idx) == [1, 5, 7]
    D = edm.D
    manual = 2 * (D[1, 5] + D[1, 7] + D[5, 7])
    assert manual == pytest.approx(11.1607, abs=1e-3)
    assert objective_value(edm, Selection((2, 3, 2))) == pytest.approx(manual, rel=1e-14)


def test_wheel_fixture_maximum_selection(wheel3):
    # the printed coordinates carry 4 decimals; the stated 56.0227 is not
    # reproduced exactly (see the acceptance module)
    val = objective_value(build_edm(wheel3), Selection((1, 2, 3)))
    assert val == pytest.approx(56.0227, abs=5e-3)


def test_single_set_objective_is_zero():
    inst = Instance.from_sets([[[1, 2], [3, 4]]])
    assert objective_value(build_edm(inst), Selection((2,))) == 0.0


def test_objective_matches_quadratic_form(rng):
    inst = gen_random(4, 3, 2, False, 3)
    edm = build_edm(inst)
    sel = Selection((1, 3, 2, 2))
    x = sel.to_vector(inst.sizes)
    assert objective_value(edm, sel) == pytest.approx(x @ edm.D @ x, rel=1e-14)


def test_selection_out_of_range():
    with pytest.raises(InstanceError, match="picks\\[1\\]"):
        Selection((1, 4)).validate((2, 3))
    with pytest.raises(InstanceError):
        Selection((1,)).validate((2, 3))


@pytest.mark.parametrize("p, k, want", [(0.0, 4, 0.0), (12.0, 2, 3.0)])
def test_wasserstein_value(p, k, want):
    assert wasserstein_value(p, k) == want


def test_wasserstein_value_wheel(wheel3):
    assert wasserstein_value(11.1607, 3) == pytest.approx(1.86012, abs=2e-4)
    # p / (2k) equals the squared distance sum to the barycenter of the picks
    sel = Selection((2, 3, 2))
    p = objective_value(build_edm(wheel3), sel)
    assert wasserstein_value(p, 3) == pytest.approx(barycenter_cost(wheel3, sel), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(k=st.integers(1, 5), n=st.integers(1, 4), d=st.integers(1, 4), seed=st.integers(0, 10**6))
def test_barycenter_identity(k, n, d, seed):
    inst = gen_random(k, n, d, False, seed)
    r = np.random.default_rng(seed)
    sel = Selection(tuple(int(r.integers(1, m + 1)) for m in inst.sizes))
    p = objective_value(build_edm(inst), sel)
    assert wasserstein_value(p, k) == pytest.approx(barycenter_cost(inst, sel), rel=1e-9, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6), shift=st.lists(st.floats(-100, 100), min_size=3, max_size=3))
def test_translation_invariance(seed, shift):
    inst = gen_random(3, 3, 3, False, seed)
    sel = Selection((1, 2, 3))
    a = objective_value(build_edm(inst), sel)
    b = objective_value(build_edm(inst.translated(shift)), sel)
    assert b == pytest.approx(a, rel=1e-9, abs=1e-9)


def test_gen_random_forced_selection():
    inst = gen_random(2, 1, 1, False, 4)
    assert inst.sizes == (1, 1) and inst.N == 2


@pytest.mark.parametrize("seed", range(10))
def test_gen_random_varying_sizes(seed):
    inst = gen_random(8, 7, 2, True, seed)
    assert 40 <= inst.N <= 72
    assert all(5 <= n <= 9 for n in inst.sizes)


def test_gen_random_deterministic():
    a, b = gen_random(5, 4, 3, True, 99), gen_random(5, 4, 3, True, 99)
    assert a == b and a.points.tobytes() == b.points.tobytes()
    assert gen_random(5, 4, 3, True, 100) != a


def test_gen_random_rejects_bad_params():
    with pytest.raises(ValueError):
        gen_random(0, 3, 2)
    with pytest.raises(ValueError):
        gen_random(3, 2, 2, vary_sizes=True)


def test_wheel_radius_k4():
    assert wheel_radius(4) == pytest.approx(math.sqrt(2) / 4, abs=1e-12)


def test_gen_wheel_k3_geometry():
    inst = gen_wheel(3)
    assert inst.N == 9 and inst.sizes == (3, 3, 3) and inst.d == 2
    centroids = np.array([s.mean(axis=0) for s in inst.sets])
    ang = np.degrees(np.arctan2(centroids[:, 1], centroids[:, 0])) % 360
    np.testing.assert_allclose(ang, [0, 120, 240], atol=1e-9)
    np.testing.assert_allclose(np.linalg.norm(centroids, axis=1), 1.0, atol=1e-12)


def test_gen_wheel_rejects_small_k():
    with pytest.raises(ValueError):
        gen_wheel(2)


def test_save_load_round_trip(tmp_path):
    inst = gen_random(4, 5, 3, True, 1)
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    assert load_instance(path) == inst


def test_dimension_error_location():
    obj = {"d": 2, "sets": [[[0, 0], [1, 2, 3]]]}
    with pytest.raises(InstanceError) as exc:
        instance_from_json(obj)
    assert exc.value.location == "sets[0][1]"


@pytest.mark.parametrize("obj", [
    {"d": 2, "sets": []},
    {"d": 2, "sets": [[]]},
    {"d": 0, "sets": [[[0]]]},
    {"d": 1, "sets": [[["a"]]]},
    {"sets": [[[0]]]},
    [1, 2],
])
def test_rejects_malformed(obj):
    with pytest.raises(InstanceError):
        instance_from_json(obj)


def test_load_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"d": 2,')
    with pytest.raises(InstanceError, match="line"):
        load_instance(path)


def test_fixture_file_is_plain_json(wheel3):
    text = json.dumps({"d": wheel3.d, "sets": [s.tolist() for s in wheel3.sets]})
    assert instance_from_json(json.loads(text)).sizes == (3, 3, 3)
