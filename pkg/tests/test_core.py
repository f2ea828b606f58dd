import numpy as np
import pytest

from dwshift.core import (
    Dataset,
    FeatureMap,
    LabeledSample,
    Loss,
    MapKind,
    LOG_LOSS_CAP,
    error_rate,
    feature,
    loss,
)
from dwshift.rng import Stream


def test_identity_feature_blocks():
    fm = FeatureMap(MapKind.IDENTITY, 1, 2)
    assert np.allclose(feature(fm, [3.0], 1), [3, 1, 0, 0])
    assert np.allclose(feature(fm, [3.0], 2), [0, 0, 3, 1])


def test_quadratic_feature_block_hand_enumerated():
    # monomials of degree <= 2 of (1, 2): components, squares/cross, constant
    fm = FeatureMap(MapKind.QUADRATIC, 2, 2)
    vec = feature(fm, [1.0, 2.0], 1)
    assert np.allclose(vec[:6], [1, 2, 1, 2, 4, 1])
    assert np.allclose(vec[6:], 0.0)


def test_feature_map_dimensions():
    assert FeatureMap(MapKind.IDENTITY, 3, 2).dim == 2 * 4
    assert FeatureMap(MapKind.QUADRATIC, 3, 2).dim == 2 * (3 + 6 + 1)
    assert FeatureMap(MapKind.QUADRATIC, 2, 4).dim == 4 * 6


def test_feature_single_nonzero_block_and_sup_norm():
    stream = Stream(1)
    for kind in (MapKind.IDENTITY, MapKind.QUADRATIC):
        fm = FeatureMap(kind, 3, 3)
        p = fm.instance_dim
        for _ in range(25):
            x = stream.normal(3)
            norms = []
            for y in (1, 2, 3):
                vec = feature(fm, x, y)
                blocks = vec.reshape(3, p)
                nonzero = [i for i in range(3) if np.any(blocks[i] != 0)]
                assert nonzero == [y - 1]
                norms.append(np.max(np.abs(vec)))
            assert np.allclose(norms, norms[0])


def test_feature_rejects_bad_inputs():
    fm = FeatureMap(MapKind.IDENTITY, 2, 2)
    with pytest.raises(ValueError):
        feature(fm, [1.0], 1)
    with pytest.raises(ValueError):
        feature(fm, [1.0, 2.0], 3)


def test_loss_examples():
    assert loss(Loss.ZERO_ONE, [1.0, 0.0], 1) == 0.0
    assert loss(Loss.ZERO_ONE, [0.25, 0.75], 2) == pytest.approx(0.25)
    assert loss(Loss.LOG, [0.5, 0.5], 1) == pytest.approx(np.log(2.0))


def test_log_loss_saturates_at_zero_probability():
    assert loss(Loss.LOG, [1.0, 0.0], 2) == LOG_LOSS_CAP


def test_uniform_rule_losses():
    for k in (2, 3, 5):
        probs = np.full(k, 1.0 / k)
        for y in range(1, k + 1):
            assert loss(Loss.ZERO_ONE, probs, y) == pytest.approx(1 - 1 / k)
            assert loss(Loss.LOG, probs, y) == pytest.approx(np.log(k))


def test_loss_bounds_properties():
    stream = Stream(7)
    for _ in range(50):
        raw = stream.uniform(3) + 1e-3
        probs = raw / raw.sum()
        y = int(stream.integers(1, 4, 1)[0])
        assert 0.0 <= loss(Loss.ZERO_ONE, probs, y) <= 1.0
        assert loss(Loss.LOG, probs, y) >= 0.0


def test_error_rate_examples():
    assert error_rate([1, 2, 1], [1, 2, 1]) == 0.0
    assert error_rate([1, 1], [2, 2]) == 1.0
    assert error_rate([1, 2, 2, 1], [1, 2, 1, 1]) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        error_rate([1], [1, 2])


def test_labeled_sample_validation():
    s = LabeledSample(x=[1.0, 2.0], y=1)
    assert s.x.dtype == np.float64
    with pytest.raises(ValueError):
        LabeledSample(x=[np.inf], y=1)
    with pytest.raises(ValueError):
        LabeledSample(x=[1.0], y=0)


def test_dataset_validation():
    ds = Dataset(
        train_x=[[0.0], [1.0]],
        train_y=[1, 2],
        test_x=[[0.5]],
        test_y=[1],
        n_classes=2,
    )
    assert ds.n == 2 and ds.t == 1 and ds.dim == 1
    with pytest.raises(ValueError):
        Dataset(train_x=[[0.0]], train_y=[3], test_x=[[0.0]], n_classes=2)
    with pytest.raises(ValueError):
        Dataset(train_x=[[0.0]], train_y=[1], test_x=[[0.0, 1.0]], n_classes=2)
