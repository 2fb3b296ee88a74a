# -*- coding: utf-8 -*-
"""test_regressor.py

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import csv

import numpy as np
import pytest

from ffg_body.errors import RegressorError
from ffg_body.measurements import CATEGORIES, CIRCUMFERENCE_SLOTS, SLOTS, MeasurementVector
from ffg_body.regressor import FLOOR, RegressorModel, ViewBlock, evaluate, evaluate_model, load_regressor, \
    predict_from_features, predict_measurements, save_regressor, train_regressor, write_evaluation
from ffg_body.silhouette import FEATURES_PER_VIEW, SilhouetteImage, View, body_features

DIMENSIONS = 2 * FEATURES_PER_VIEW


def _pairs(n: int = 12, seed: int = 0, constant: bool = False):
    rng = np.random.default_rng(seed)
    features = rng.normal(size=(n, DIMENSIONS))
    features[:, 5] = 3.0
    if constant:
        targets = np.full((n, len(SLOTS)), 400.0)
    else:
        targets = 500.0 + 20.0 * features[:, 100:100 + len(SLOTS)]
    return [(f, MeasurementVector(t)) for f, t in zip(features, targets)]


def test_training_fits_its_data():
    pairs = _pairs()
    model = train_regressor(pairs, ridge=1e-6)
    for features, target in pairs:
        np.testing.assert_allclose(model.predict(features)[0], target.values, rtol=1e-4)


def test_constant_targets_give_bias():
    pairs = _pairs(constant=True)
    model = train_regressor(pairs)
    np.testing.assert_allclose(model.bias, 400.0)
    sample = np.random.default_rng(3).normal(size=DIMENSIONS)
    np.testing.assert_allclose(model.predict(sample)[0], 400.0, atol=1e-9)


def test_mean_features_give_bias():
    pairs = _pairs()
    model = train_regressor(pairs)
    mean = np.mean([f for f, _ in pairs], axis=0)
    np.testing.assert_allclose(model.predict(mean)[0], model.bias, atol=1e-9)


def test_constant_dimensions_are_masked():
    pairs = _pairs()
    model = train_regressor(pairs)
    assert not model.blocks[0].mask[5]
    assert model.blocks[0].weights.shape == (FEATURES_PER_VIEW - 1, len(SLOTS))
    sample = pairs[0][0].copy()
    shifted = sample.copy()
    shifted[5] = 1e6
    np.testing.assert_allclose(model.predict(shifted), model.predict(sample))


def test_ridge_shrinks_toward_bias():
    pairs = _pairs()
    weak = train_regressor(pairs, ridge=1e-3)
    strong = train_regressor(pairs, ridge=1e9)
    sample = pairs[0][0]
    assert np.abs(strong.predict(sample)[0] - strong.bias).max() < np.abs(weak.predict(sample)[0] - weak.bias).max()


@pytest.mark.parametrize('count, ridge', [(1, 1.0), (4, 0.0), (4, -1.0)])
def test_invalid_training(count, ridge):
    with pytest.raises(RegressorError):
        train_regressor(_pairs(n=count), ridge=ridge)


def test_feature_dimension_mismatch():
    model = train_regressor(_pairs())
    with pytest.raises(RegressorError):
        model.predict(np.zeros(FEATURES_PER_VIEW))
    with pytest.raises(RegressorError):
        train_regressor([(np.zeros(10), m) for _, m in _pairs(n=3)])


def test_round_trip(tmp_path):
    pairs = _pairs()
    model = train_regressor(pairs, ridge=2.0)
    path = tmp_path / 'regressor.json'
    save_regressor(model, path)
    loaded = load_regressor(path)
    assert loaded.ridge == 2.0
    np.testing.assert_allclose(loaded.predict(pairs[3][0]), model.predict(pairs[3][0]))


def test_unreadable_regressor(tmp_path):
    path = tmp_path / 'regressor.json'
    path.write_text('{"bias": []}')
    with pytest.raises(RegressorError):
        load_regressor(path)


def _flat_model(bias: float) -> RegressorModel:
    blocks = [ViewBlock(np.zeros(FEATURES_PER_VIEW), np.ones(FEATURES_PER_VIEW), np.ones(FEATURES_PER_VIEW, bool),
                        np.zeros((FEATURES_PER_VIEW, len(SLOTS)))) for _ in range(2)]
    return RegressorModel(blocks, np.full(len(SLOTS), bias), 1.0)


def test_predictions_are_floored():
    prediction = predict_from_features(_flat_model(-3.0), np.zeros(DIMENSIONS))
    np.testing.assert_array_equal(prediction.values, FLOOR)


def test_predict_from_silhouettes():
    prediction = predict_measurements(_flat_model(250.0), SilhouetteImage.blank(View.FRONTAL),
                                      SilhouetteImage.blank(View.LATERAL))
    np.testing.assert_allclose(prediction.values, 250.0)


def test_evaluate_arithmetic():
    targets = [MeasurementVector(np.full(len(SLOTS), 300.0)), MeasurementVector(np.full(len(SLOTS), 500.0))]
    predictions = [target.scaled(1.0).with_deltas({'head_circumference': 5.0}) for target in targets]
    evaluation = evaluate(predictions, targets, train_targets=targets)
    assert evaluation.slot('head_circumference') == pytest.approx(5.0)
    assert evaluation.slot('neck_circumference') == 0.0
    assert evaluation.baseline[0] == pytest.approx(100.0)
    rows = {label: mae for label, _, mae, _ in evaluation.categories()}
    assert rows['a'] == pytest.approx(5.0)
    assert evaluation.mean() == pytest.approx(5.0 / len(SLOTS))
    assert evaluation.to_dict()['head_circumference'] == pytest.approx(5.0)


def test_evaluate_rejects_bad_sets():
    with pytest.raises(RegressorError):
        evaluate([], [])
    target = MeasurementVector(np.full(len(SLOTS), 300.0))
    with pytest.raises(RegressorError):
        evaluate([target], [target, target])
    with pytest.raises(RegressorError):
        evaluate_model(_flat_model(1.0), [])


def test_evaluation_report(tmp_path):
    pairs = _pairs()
    model = train_regressor(pairs[:8])
    evaluation = evaluate_model(model, pairs[8:], [m for _, m in pairs[:8]])
    path = tmp_path / 'evaluation.csv'
    write_evaluation(evaluation, path)
    with open(str(path), newline='') as f:
        rows = list(csv.reader(f))
    assert rows[0] == ['row', 'name', 'mae_mm', 'baseline_mae_mm']
    assert len(rows) == 1 + len(CATEGORIES) + len(SLOTS) + 1
    assert rows[1][0] == 'a'


def test_blank_silhouettes_give_bias_of_trained_model():
    pairs = [(f + 2.0, m) for f, m in _pairs()]
    model = train_regressor(pairs, ridge=1e-3)
    assert np.abs(model.predict(np.zeros(DIMENSIONS) + 1e-3)[0] - model.bias).max() > 1.0
    prediction = predict_measurements(model, SilhouetteImage.blank(View.FRONTAL), SilhouetteImage.blank(View.LATERAL))
    np.testing.assert_allclose(prediction.values, model.bias, atol=1e-9)
    one_blank = np.concatenate([pairs[0][0][:FEATURES_PER_VIEW], np.zeros(FEATURES_PER_VIEW)])
    frontal_only = model.bias + model.blocks[0].standardize(pairs[0][0][None, :FEATURES_PER_VIEW])[0] @ \
        model.blocks[0].weights
    np.testing.assert_allclose(model.predict(one_blank)[0], frontal_only, atol=1e-9)


@pytest.mark.slow
def test_silhouettes_beat_the_mean_on_a_held_out_population(large_population):
    pairs = [(body_features(mesh), truth) for mesh, _, truth in large_population]
    train, test = pairs[:100], pairs[100:]
    evaluation = evaluate_model(train_regressor(train), test, [m for _, m in train])
    for name in ('chest_circumference', 'waist_circumference', 'pelvis_circumference'):
        index = SLOTS.index(name)
        assert evaluation.mae[index] <= 0.6 * evaluation.baseline[index], name
    for name in CIRCUMFERENCE_SLOTS:
        index = SLOTS.index(name)
        assert evaluation.mae[index] < evaluation.baseline[index], name
