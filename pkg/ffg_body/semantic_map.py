# -*- coding: utf-8 -*-
"""semantic_map.py

Per-part linear maps from anthropometric measurements to shape coefficients. For part i the augmented measurement row
[part slots, 1] of every training body is stacked into M, the part's projected coefficients into B, and F solves
M F = B in the least-squares sense, so beta = [m, 1] F.

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import json
import logging
import pathlib
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from tqdm import tqdm

from .assembler import DEFAULT_EPSILON, stitch_body
from .config import TailorConfig
from .errors import BodyModelError, MeasurementError, ModelError
from .ifs3 import TriMesh
from .measurements import SLOTS, MeasurementVector, PART_SLOTS, slot_index
from .segmentation import PartLabel, PartSegmentation, extract_part
from .shape_model import BodyShapeModel, ShapeCoeffs, project_part
from .tailor import measure_body

logger = logging.getLogger(__name__)

# Condition number of M above which the pseudo-inverse is reported as ill-conditioned.
CONDITION_LIMIT = 1e10


def augment(values: np.ndarray) -> np.ndarray:
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    return np.hstack([values, np.ones((values.shape[0], 1))])


class MappingDataset(object):
    """Training matrices of the linear maps.

    Attributes:
        measurements: Label to the augmented (n, N_i + 1) measurement matrix M.
        coefficients: Label to the (n, K) coefficient matrix B.
        skipped: Number of bodies that could not be measured."""
    def __init__(self, measurements: Dict[PartLabel, np.ndarray], coefficients: Dict[PartLabel, np.ndarray],
                 skipped: int = 0) -> None:
        if set(measurements) != set(coefficients):
            raise ModelError('measurement and coefficient matrices cover different parts')
        for label in measurements:
            if measurements[label].shape[0] != coefficients[label].shape[0]:
                raise ModelError('{}: {} measurement rows but {} coefficient rows'.format(
                    label.value, measurements[label].shape[0], coefficients[label].shape[0]))
        self.measurements = measurements
        self.coefficients = coefficients
        self.skipped = skipped

    @property
    def rows(self) -> int:
        return next(iter(self.measurements.values())).shape[0] if self.measurements else 0


def build_mapping_dataset(bodies: Sequence[Tuple[TriMesh, PartSegmentation]], model: BodyShapeModel,
                          config: Optional[TailorConfig] = None,
                          measured: Optional[Sequence[Optional[MeasurementVector]]] = None,
                          progress: bool = False) -> MappingDataset:
    """Measures and projects every body.

    Args:
        bodies: Meshes with their segmentation, all on the model's topology.
        model: The shape model.
        config: Tailor parameters.
        measured: Measurements already taken for the bodies, in the same order; None entries are measured here.
        progress: If a progress bar should be shown.

    Returns:
        The dataset. Bodies whose measurement fails are skipped and counted."""
    config = config or TailorConfig.load()
    labels = model.labels
    rows_m = {label: [] for label in labels}  # type: Dict[PartLabel, List[np.ndarray]]
    rows_b = {label: [] for label in labels}  # type: Dict[PartLabel, List[np.ndarray]]
    skipped = 0
    for i, (mesh, seg) in enumerate(tqdm(bodies, desc='mapping dataset', disable=not progress)):
        m = measured[i] if measured is not None else None
        try:
            if m is None:
                m = measure_body(mesh, seg, config)
            slices = {label: m.part_slice(label) for label in labels}
        except BodyModelError as e:
            logger.warning('body %d skipped: %s', i, e)
            skipped += 1
            continue
        for label in labels:
            rows_m[label].append(slices[label])
            rows_b[label].append(project_part(model.parts[label], extract_part(mesh, seg, label).vertices))
    if skipped:
        logger.warning('%d of %d bodies could not be measured', skipped, len(bodies))
    if skipped == len(bodies):
        raise MeasurementError('no body of {} could be measured'.format(len(bodies)))
    return MappingDataset({label: augment(np.array(rows_m[label])) for label in labels},
                          {label: np.array(rows_b[label]) for label in labels}, skipped)


class LinearMap(object):
    """Per-part maps F from augmented measurement rows to coefficients.

    Attributes:
        parts: Label to the (N_i + 1, K) matrix F.
        ranges: Label to the (2, N_i) minimum and maximum training measurements, used to flag extrapolation.
        conditions: Label to the condition number of the training matrix.
        ridge: The ridge weight used for fitting."""
    def __init__(self, parts: Dict[PartLabel, np.ndarray], ranges: Optional[Dict[PartLabel, np.ndarray]] = None,
                 conditions: Optional[Dict[PartLabel, float]] = None, ridge: float = 0.0) -> None:
        self.parts = {label: np.asarray(matrix, dtype=np.float64) for label, matrix in parts.items()}
        self.ranges = ranges if ranges is not None else {}
        self.conditions = conditions if conditions is not None else {}
        self.ridge = ridge
        for label, matrix in self.parts.items():
            if not np.all(np.isfinite(matrix)):
                raise ModelError('map of {} has non-finite entries'.format(label.value))
            if matrix.shape[0] != len(PART_SLOTS[label]) + 1:
                raise ModelError('map of {} has {} rows, expected {}'.format(
                    label.value, matrix.shape[0], len(PART_SLOTS[label]) + 1))

    def check(self, model: BodyShapeModel) -> None:
        if set(self.parts) != set(model.parts):
            raise ModelError('map and model cover different parts')
        for label, matrix in self.parts.items():
            if matrix.shape[1] != model.parts[label].k:
                raise ModelError('map of {} yields {} coefficients, the model has {}'.format(
                    label.value, matrix.shape[1], model.parts[label].k))

    def to_dict(self) -> dict:
        parts = {}
        for label in sorted(self.parts, key=lambda l: l.order):
            entry = {'rows': int(self.parts[label].shape[0]), 'cols': int(self.parts[label].shape[1]),
                     'data': self.parts[label].tolist()}
            if label in self.ranges:
                entry['range'] = self.ranges[label].tolist()
            if label in self.conditions:
                entry['condition'] = self.conditions[label]
            parts[label.value] = entry
        return {'parts': parts, 'ridge': self.ridge}

    @staticmethod
    def from_dict(document: dict) -> 'LinearMap':
        try:
            parts, ranges, conditions = {}, {}, {}
            for name, entry in document['parts'].items():
                label = PartLabel.parse(name)
                matrix = np.array(entry['data'], dtype=np.float64).reshape(int(entry['rows']), int(entry['cols']))
                parts[label] = matrix
                if 'range' in entry:
                    ranges[label] = np.array(entry['range'], dtype=np.float64)
                if 'condition' in entry:
                    conditions[label] = float(entry['condition'])
            return LinearMap(parts, ranges, conditions, float(document.get('ridge', 0.0)))
        except (KeyError, TypeError, ValueError) as e:
            raise ModelError('map document does not follow the schema: {!r}'.format(e))


def save_map(linear_map: LinearMap, path: Union[str, pathlib.Path]) -> None:
    with open(str(path), 'w') as f:
        json.dump(linear_map.to_dict(), f)


def load_map(path: Union[str, pathlib.Path]) -> LinearMap:
    try:
        with open(str(path), 'r') as f:
            document = json.load(f)
    except OSError as e:
        raise ModelError('cannot read {}: {}'.format(path, e))
    except json.JSONDecodeError as e:
        raise ModelError('{} is not a valid map file: {}'.format(path, e))
    return LinearMap.from_dict(document)


def fit_linear_map(ds: MappingDataset, ridge: float = 0.0) -> LinearMap:
    """Solves M F = B per part.

    Args:
        ds: The training matrices.
        ridge: 0 for the minimum-norm pseudo-inverse solution, otherwise the weight of the ridge penalty.

    Returns:
        The fitted map."""
    if ridge < 0.0:
        raise ModelError('ridge must be non-negative, got {}'.format(ridge))
    parts, ranges, conditions = {}, {}, {}
    for label, m in ds.measurements.items():
        b = ds.coefficients[label]
        singular = scipy.linalg.svdvals(m)
        condition = float(singular[0] / singular[-1]) if singular[-1] > 0.0 else float('inf')
        if ridge == 0.0:
            parts[label] = scipy.linalg.pinv(m) @ b
            if m.shape[0] < m.shape[1] or condition > CONDITION_LIMIT:
                logger.warning('%s: measurement matrix is rank deficient (condition %.3g, %d rows, %d columns), '
                               'using the minimum-norm solution', label.value, condition, m.shape[0], m.shape[1])
        else:
            gram = m.T @ m + ridge * np.eye(m.shape[1])
            parts[label] = scipy.linalg.solve(gram, m.T @ b, assume_a='pos')
        ranges[label] = np.stack([m[:, :-1].min(axis=0), m[:, :-1].max(axis=0)])
        conditions[label] = condition
    return LinearMap(parts, ranges, conditions, ridge)


def measurements_to_coeffs(m: MeasurementVector, linear_map: LinearMap) -> ShapeCoeffs:
    missing = m.missing()
    if missing:
        raise MeasurementError('measurement vector is missing {}'.format(', '.join(missing)))
    betas = {}
    for label, matrix in linear_map.parts.items():
        betas[label] = (augment(m.part_slice(label)) @ matrix)[0]
    return ShapeCoeffs(betas)


def _extrapolated(m: MeasurementVector, linear_map: LinearMap) -> List[str]:
    names = set()
    for label, bounds in linear_map.ranges.items():
        values = m.part_slice(label)
        outside = (values < bounds[0]) | (values > bounds[1])
        names.update(name for name, flag in zip(PART_SLOTS[label], outside) if flag)
    return sorted(names, key=slot_index)


def reconstruct_body(m: MeasurementVector, linear_map: LinearMap, model: BodyShapeModel,
                     epsilon: float = DEFAULT_EPSILON) -> TriMesh:
    """Builds the body described by a measurement vector.

    Args:
        m: Complete measurements.
        linear_map: The measurement to coefficient map.
        model: The shape model the map was fitted against.
        epsilon: Stitch band width.

    Returns:
        The stitched body."""
    linear_map.check(model)
    coeffs = measurements_to_coeffs(m, linear_map)
    outside = _extrapolated(m, linear_map)
    if outside:
        logger.warning('extrapolating beyond the training range for %s', ', '.join(outside))
    mesh, _ = stitch_body(model.synthesize(coeffs), model.segmentation, epsilon)
    return mesh


class EditResult(object):
    """Outcome of a measurement edit.

    Attributes:
        mesh: The edited body.
        measurements: The requested measurements m + delta.
        remeasured: Edited slot to (requested, re-measured) values; empty when re-measurement was skipped."""
    def __init__(self, mesh: TriMesh, measurements: MeasurementVector,
                 remeasured: Dict[str, Tuple[float, float]]) -> None:
        self.mesh = mesh
        self.measurements = measurements
        self.remeasured = remeasured

    def __iter__(self):
        return iter((self.mesh, self.measurements))

    def to_dict(self) -> dict:
        return {name: {'requested': requested, 'measured': measured, 'residual': measured - requested}
                for name, (requested, measured) in self.remeasured.items()}


def edit_body(m: MeasurementVector, delta: Mapping[str, float], linear_map: LinearMap, model: BodyShapeModel,
              config: Optional[TailorConfig] = None, remeasure: bool = True,
              epsilon: float = DEFAULT_EPSILON) -> EditResult:
    """Reconstructs a body after changing some of its measurements.

    Args:
        m: The current measurements.
        delta: Slot name to change, millimeters.
        linear_map: The measurement to coefficient map.
        model: The shape model.
        config: Tailor parameters for re-measurement.
        remeasure: If the edited slots are measured again on the result.
        epsilon: Stitch band width.

    Returns:
        The edited body, its requested measurements and the re-measured edited slots."""
    edited = m.with_deltas(delta)
    bad = [name for name in delta if not edited[name] > 0.0]
    if bad:
        raise MeasurementError('edit leaves non-positive measurements: {}'.format(
            ', '.join('{}={:.2f}'.format(name, edited[name]) for name in bad)))
    mesh = reconstruct_body(edited, linear_map, model, epsilon)
    remeasured = {}
    if remeasure and delta:
        after = measure_body(mesh, model.segmentation, config)
        for name in delta:
            remeasured[name] = (edited[name], after[name])
            logger.info('%s: requested %.2f, measured %.2f', name, edited[name], after[name])
    return EditResult(mesh, edited, remeasured)


def relative_ranges(base: MeasurementVector, fraction: float) -> np.ndarray:
    """Per-slot half-widths of +-fraction around base."""
    return np.abs(base.values) * fraction


def generate_population(base: MeasurementVector, ranges: Union[np.ndarray, Mapping[str, float]], n: int, seed: int,
                        linear_map: LinearMap, model: BodyShapeModel, mode: str = 'uniform',
                        reference: Optional[Sequence[MeasurementVector]] = None,
                        progress: bool = False) -> Tuple[List[Tuple[TriMesh, MeasurementVector]], int]:
    """Samples measurement vectors around a base and reconstructs a body for each.

    Args:
        base: Center of the sampled measurements.
        ranges: Per-slot half-widths, as an array in slot order or a slot name mapping (missing slots fixed).
            Used by the uniform mode.
        n: Number of samples.
        seed: Random seed.
        linear_map: The measurement to coefficient map.
        model: The shape model.
        mode: 'uniform' draws each slot independently in base +- range; 'correlated' draws from a normal
            distribution centered on base with the covariance of the reference table.
        reference: Measurement table for the correlated mode.
        progress: If a progress bar should be shown.

    Returns:
        (mesh, target measurements) per successful sample, and the number of skipped samples."""
    if n < 1:
        raise ModelError('population size must be at least 1, got {}'.format(n))
    rng = np.random.default_rng(seed)
    if mode == 'uniform':
        if isinstance(ranges, Mapping):
            half = np.zeros(len(SLOTS))
            for name, value in ranges.items():
                half[slot_index(name)] = value
        else:
            half = np.asarray(ranges, dtype=np.float64).reshape(-1)
        if half.shape != (len(SLOTS),) or np.any(half < 0.0):
            raise ModelError('ranges must be {} non-negative half-widths'.format(len(SLOTS)))
        if np.any(base.values - half <= 0.0):
            raise ModelError('ranges allow non-positive measurements')
        draws = base.values + rng.uniform(-1.0, 1.0, size=(n, len(SLOTS))) * half
    elif mode == 'correlated':
        if not reference or len(reference) < 2:
            raise ModelError('correlated sampling needs a reference table of at least 2 rows')
        covariance = np.cov(np.array([row.values for row in reference]), rowvar=False)
        draws = rng.multivariate_normal(base.values, covariance, size=n, method='eigh')
    else:
        raise ModelError('unknown sampling mode {!r}'.format(mode))
    samples = []
    skipped = 0
    for i, values in enumerate(tqdm(draws, desc='population', disable=not progress)):
        target = MeasurementVector(values)
        if np.any(values <= 0.0):
            logger.warning('sample %d skipped: non-positive measurements', i)
            skipped += 1
            continue
        try:
            samples.append((reconstruct_body(target, linear_map, model), target))
        except BodyModelError as e:
            logger.warning('sample %d skipped: %s', i, e)
            skipped += 1
    return samples, skipped


def _vertex_mae(a: TriMesh, b: TriMesh) -> float:
    """Mean vertex distance after matching centroids; reconstructions are placed at the model's mean root center."""
    x = a.vertices - a.vertices.mean(axis=0)
    y = b.vertices - b.vertices.mean(axis=0)
    return float(np.mean(np.linalg.norm(x - y, axis=1)))


class RoundTripReport(object):
    """Consistency of measuring, mapping and re-measuring a set of bodies.

    Attributes:
        absolute_errors: (n, 34) |re-measured - target| per reconstructed body and slot.
        targets: (n, 34) target measurements.
        vertex_errors: Reconstruction kind to the mean vertex MAE over bodies: 'projected' (project, synthesize,
            stitch), 'from-measured' (mapped from the measured values), 'from-predicted' (mapped from predicted
            measurements).
        failures: Number of bodies that failed at any step."""
    def __init__(self, absolute_errors: np.ndarray, targets: np.ndarray, vertex_errors: Dict[str, float],
                 failures: int) -> None:
        self.absolute_errors = absolute_errors
        self.targets = targets
        self.vertex_errors = vertex_errors
        self.failures = failures

    def mae(self) -> np.ndarray:
        return self.absolute_errors.mean(axis=0)

    def median(self) -> np.ndarray:
        return np.median(self.absolute_errors, axis=0)

    def relative_median(self) -> np.ndarray:
        """Median absolute error per slot divided by the slot's population mean."""
        return self.median() / self.targets.mean(axis=0)

    def rows(self) -> List[List[str]]:
        rows = [['slot', 'mae_mm', 'median_mm', 'population_mean_mm', 'relative_median']]
        for name, mae, median, mean, rel in zip(SLOTS, self.mae(), self.median(), self.targets.mean(axis=0),
                                                self.relative_median()):
            rows.append([name, '{:.2f}'.format(mae), '{:.2f}'.format(median), '{:.2f}'.format(mean),
                         '{:.4f}'.format(rel)])
        for kind, error in self.vertex_errors.items():
            rows.append(['vertex_mae_' + kind, '{:.4f}'.format(error), '', '', ''])
        return rows


def roundtrip(bodies: Sequence[Tuple[TriMesh, PartSegmentation]], linear_map: LinearMap, model: BodyShapeModel,
              config: Optional[TailorConfig] = None,
              measured: Optional[Sequence[Optional[MeasurementVector]]] = None,
              predict: Optional[Callable[[TriMesh], MeasurementVector]] = None,
              progress: bool = False) -> RoundTripReport:
    """Measures each body, reconstructs it from its measurements, and measures the reconstruction again.

    Args:
        bodies: Meshes on the model's topology with their segmentation.
        linear_map: The measurement to coefficient map.
        model: The shape model.
        config: Tailor parameters.
        measured: Measurements already taken for the bodies.
        predict: Optional measurement predictor (e.g. a silhouette regressor) for the 'from-predicted' reconstruction.
        progress: If a progress bar should be shown.

    Returns:
        The report."""
    config = config or TailorConfig.load()
    errors, targets = [], []
    vertex_errors = {'projected': [], 'from-measured': [], 'from-predicted': []}  # type: Dict[str, List[float]]
    failures = 0
    for i, (mesh, seg) in enumerate(tqdm(bodies, desc='round trip', disable=not progress)):
        try:
            target = measured[i] if measured is not None and measured[i] is not None else \
                measure_body(mesh, seg, config)
            parts = [extract_part(mesh, seg, label) for label in model.labels]
            pca_body, _ = stitch_body(model.synthesize(model.project(parts)), model.segmentation)
            vertex_errors['projected'].append(_vertex_mae(mesh, pca_body))
            rebuilt = reconstruct_body(target, linear_map, model)
            vertex_errors['from-measured'].append(_vertex_mae(mesh, rebuilt))
            if predict is not None:
                predicted = reconstruct_body(predict(mesh), linear_map, model)
                vertex_errors['from-predicted'].append(_vertex_mae(mesh, predicted))
            again = measure_body(rebuilt, model.segmentation, config)
        except BodyModelError as e:
            logger.warning('round trip of body %d failed: %s', i, e)
            failures += 1
            continue
        errors.append(np.abs(again.values - target.values))
        targets.append(target.values)
    if not errors:
        raise MeasurementError('no body completed the round trip')
    means = {kind: float(np.mean(values)) for kind, values in vertex_errors.items() if values}
    return RoundTripReport(np.array(errors), np.array(targets), means, failures)
