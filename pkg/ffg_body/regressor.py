# -*- coding: utf-8 -*-
"""regressor.py

Ridge regression from two-view silhouette features to the 34 measurements. Each view has its own standardization and
its own weight block; the blocks are summed with a bias in the merge stage. With far more features than subjects the
weights are solved in dual form, W = X^T (X X^T + ridge I)^-1 (Y - mean Y).

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import csv
import json
import logging
import pathlib
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from .errors import RegressorError
from .measurements import CATEGORIES, SLOTS, MeasurementVector, slot_index
from .silhouette import FEATURES_PER_VIEW, SilhouetteImage, View, two_view_features

logger = logging.getLogger(__name__)

FLOOR = 1.0
VIEWS = (View.FRONTAL, View.LATERAL)


class ViewBlock(object):
    """Standardization and weights of one view.

    Attributes:
        mean: (D,) feature means.
        scale: (D,) feature standard deviations.
        mask: (D,) True for dimensions that vary over the training set.
        weights: (mask.sum(), 34) weights of the standardized, unmasked features."""
    def __init__(self, mean: np.ndarray, scale: np.ndarray, mask: np.ndarray, weights: np.ndarray) -> None:
        self.mean = np.asarray(mean, dtype=np.float64)
        self.scale = np.asarray(scale, dtype=np.float64)
        self.mask = np.asarray(mask, dtype=bool)
        self.weights = np.asarray(weights, dtype=np.float64).reshape(int(self.mask.sum()), len(SLOTS))

    def standardize(self, features: np.ndarray) -> np.ndarray:
        features = np.atleast_2d(features)
        return (features[:, self.mask] - self.mean[self.mask]) / self.scale[self.mask]

    def to_dict(self) -> dict:
        return {'mean': self.mean.tolist(), 'scale': self.scale.tolist(), 'mask': self.mask.tolist(),
                'weights': self.weights.tolist()}

    @staticmethod
    def from_dict(document: dict) -> 'ViewBlock':
        return ViewBlock(np.array(document['mean']), np.array(document['scale']), np.array(document['mask']),
                         np.array(document['weights']))


class RegressorModel(object):
    """A trained two-view regressor.

    Attributes:
        blocks: One ViewBlock per view, frontal first.
        bias: (34,) training target means.
        ridge: The ridge weight."""
    def __init__(self, blocks: Sequence[ViewBlock], bias: np.ndarray, ridge: float) -> None:
        self.blocks = list(blocks)
        self.bias = np.asarray(bias, dtype=np.float64)
        self.ridge = ridge
        for block in self.blocks:
            if not np.all(np.isfinite(block.weights)):
                raise RegressorError('regressor weights are not finite')

    def predict(self, features: np.ndarray) -> np.ndarray:
        """Returns (n, 34) raw predictions of (n, 2 * 962) features.

        Note:
            A view whose features are all zero (an all-background silhouette) carries no evidence and adds nothing,
            so a pair of blank views predicts the bias."""
        features = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if features.shape[1] != len(self.blocks) * FEATURES_PER_VIEW:
            raise RegressorError('expected {} features, got {}'.format(len(self.blocks) * FEATURES_PER_VIEW,
                                                                      features.shape[1]))
        result = np.tile(self.bias, (features.shape[0], 1))
        for i, block in enumerate(self.blocks):
            view = features[:, i * FEATURES_PER_VIEW:(i + 1) * FEATURES_PER_VIEW]
            shown = np.any(view != 0.0, axis=1)
            result[shown] += block.standardize(view[shown]) @ block.weights
        return result

    def to_dict(self) -> dict:
        return {'blocks': [block.to_dict() for block in self.blocks], 'bias': self.bias.tolist(),
                'ridge': self.ridge}

    @staticmethod
    def from_dict(document: dict) -> 'RegressorModel':
        try:
            return RegressorModel([ViewBlock.from_dict(block) for block in document['blocks']],
                                  np.array(document['bias']), float(document['ridge']))
        except (KeyError, TypeError, ValueError) as e:
            raise RegressorError('regressor document does not follow the schema: {!r}'.format(e))


def save_regressor(model: RegressorModel, path: Union[str, pathlib.Path]) -> None:
    with open(str(path), 'w') as f:
        json.dump(model.to_dict(), f)


def load_regressor(path: Union[str, pathlib.Path]) -> RegressorModel:
    try:
        with open(str(path), 'r') as f:
            return RegressorModel.from_dict(json.load(f))
    except (OSError, json.JSONDecodeError) as e:
        raise RegressorError('cannot read regressor {}: {}'.format(path, e))


def train_regressor(pairs: Sequence[Tuple[np.ndarray, MeasurementVector]], ridge: float = 1.0) -> RegressorModel:
    """Fits the regressor.

    Args:
        pairs: (two-view features, target measurements) per training subject.
        ridge: Positive ridge weight.

    Returns:
        The model. Feature dimensions constant over the training set are masked out."""
    if len(pairs) < 2:
        raise RegressorError('training needs at least 2 pairs, got {}'.format(len(pairs)))
    if not ridge > 0.0:
        raise RegressorError('ridge must be positive, got {}'.format(ridge))
    features = np.array([np.asarray(f, dtype=np.float64) for f, _ in pairs])
    if features.ndim != 2 or features.shape[1] != len(VIEWS) * FEATURES_PER_VIEW:
        raise RegressorError('features must have {} entries per pair'.format(len(VIEWS) * FEATURES_PER_VIEW))
    targets = np.array([m.values for _, m in pairs])
    if not np.all(np.isfinite(targets)):
        raise RegressorError('training targets have missing slots')
    bias = targets.mean(axis=0)
    stats = []
    standardized = []
    for i in range(len(VIEWS)):
        view = features[:, i * FEATURES_PER_VIEW:(i + 1) * FEATURES_PER_VIEW]
        mean = view.mean(axis=0)
        scale = view.std(axis=0)
        mask = scale > 0.0
        scale = np.where(mask, scale, 1.0)
        stats.append((mean, scale, mask))
        standardized.append((view[:, mask] - mean[mask]) / scale[mask])
        logger.debug('%s view: %d of %d feature dimensions vary', VIEWS[i].value, int(mask.sum()), len(mask))
    x = np.hstack(standardized)
    gram = x @ x.T + ridge * np.eye(len(x))
    dual = scipy.linalg.solve(gram, targets - bias, assume_a='pos')
    weights = x.T @ dual
    blocks = []
    offset = 0
    for mean, scale, mask in stats:
        count = int(mask.sum())
        blocks.append(ViewBlock(mean, scale, mask, weights[offset:offset + count]))
        offset += count
    return RegressorModel(blocks, bias, ridge)


def predict_measurements(model: RegressorModel, frontal: SilhouetteImage, lateral: SilhouetteImage) -> \
        MeasurementVector:
    """Predicts the measurements of the subject shown in a frontal and a lateral silhouette."""
    return predict_from_features(model, two_view_features(frontal, lateral))


def predict_from_features(model: RegressorModel, features: np.ndarray) -> MeasurementVector:
    values = model.predict(features)[0]
    low = values < FLOOR
    if np.any(low):
        logger.warning('prediction below %.1f mm for %s, clamped', FLOOR,
                       ', '.join(name for name, flag in zip(SLOTS, low) if flag))
        values = np.where(low, FLOOR, values)
    return MeasurementVector(values)


class Evaluation(object):
    """Per-slot mean absolute errors of a test set.

    Attributes:
        mae: (34,) mean absolute error per slot, millimeters.
        baseline: (34,) error of predicting the training mean, when training targets were given."""
    def __init__(self, mae: np.ndarray, baseline: Optional[np.ndarray] = None) -> None:
        self.mae = mae
        self.baseline = baseline

    def slot(self, name: str) -> float:
        return float(self.mae[slot_index(name)])

    def mean(self) -> float:
        return float(self.mae.mean())

    def categories(self) -> List[Tuple[str, str, float, Optional[float]]]:
        """(label, title, MAE, baseline MAE) for the report categories a-p."""
        rows = []
        for label, title, names in CATEGORIES:
            indices = [slot_index(name) for name in names]
            baseline = float(self.baseline[indices].mean()) if self.baseline is not None else None
            rows.append((label, title, float(self.mae[indices].mean()), baseline))
        return rows

    def rows(self) -> List[List[str]]:
        def cell(value: Optional[float]) -> str:
            return '' if value is None else '{:.2f}'.format(value)

        rows = [['row', 'name', 'mae_mm', 'baseline_mae_mm']]
        for label, title, mae, baseline in self.categories():
            rows.append([label, title, cell(mae), cell(baseline)])
        for i, name in enumerate(SLOTS):
            rows.append(['slot', name, cell(self.mae[i]),
                         cell(self.baseline[i] if self.baseline is not None else None)])
        rows.append(['mean', 'all slots', cell(self.mean()),
                     cell(float(self.baseline.mean()) if self.baseline is not None else None)])
        return rows

    def to_dict(self) -> Dict[str, float]:
        return {name: float(value) for name, value in zip(SLOTS, self.mae)}


def evaluate(predictions: Sequence[MeasurementVector], targets: Sequence[MeasurementVector],
             train_targets: Optional[Sequence[MeasurementVector]] = None) -> Evaluation:
    """Mean absolute error per slot.

    Args:
        predictions: Predicted measurements per test subject.
        targets: True measurements per test subject.
        train_targets: When given, the error of always predicting their mean is reported as the baseline.

    Returns:
        The evaluation."""
    if len(targets) == 0:
        raise RegressorError('the test set is empty')
    if len(predictions) != len(targets):
        raise RegressorError('{} predictions for {} targets'.format(len(predictions), len(targets)))
    truth = np.array([m.values for m in targets])
    mae = np.mean(np.abs(np.array([m.values for m in predictions]) - truth), axis=0)
    baseline = None
    if train_targets:
        mean = np.mean([m.values for m in train_targets], axis=0)
        baseline = np.mean(np.abs(truth - mean), axis=0)
    return Evaluation(mae, baseline)


def evaluate_model(model: RegressorModel, test: Sequence[Tuple[np.ndarray, MeasurementVector]],
                   train_targets: Optional[Sequence[MeasurementVector]] = None) -> Evaluation:
    """Predicts every test subject from its features and evaluates the predictions."""
    if len(test) == 0:
        raise RegressorError('the test set is empty')
    predictions = [predict_from_features(model, features) for features, _ in test]
    return evaluate(predictions, [m for _, m in test], train_targets)


def write_evaluation(evaluation: Evaluation, path: Union[str, pathlib.Path]) -> None:
    with open(str(path), 'w', newline='') as f:
        csv.writer(f, lineterminator='\n').writerows(evaluation.rows())
