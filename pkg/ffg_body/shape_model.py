# -*- coding: utf-8 -*-
"""shape_model.py

Part-based statistical shape model. Every body part has its own linear shape space learned by principal component
analysis over corresponded part instances: a part instance is generated as X = U b + mu.

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import hashlib
import json
import logging
import pathlib
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import scipy.linalg
from tqdm import tqdm

from .errors import InvariantError, ModelError, SegmentationError
from .ifs3 import TriMesh
from .segmentation import PartLabel, PartMesh, PartSegmentation, extract_part, part_axis

logger = logging.getLogger(__name__)

ORTHONORMAL_TOLERANCE = 1e-8


class PartPCA(object):
    """Linear shape space of one part.

    Attributes:
        label: The part.
        mean: Mean shape mu, length 3 V_i, millimeters.
        components: (3 V_i, K) matrix U with orthonormal columns.
        eigenvalues: K variances in mm², descending.
        total_variance: Sum of all sample variances at fit time."""
    def __init__(self, label: PartLabel, mean: np.ndarray, components: np.ndarray, eigenvalues: np.ndarray,
                 total_variance: float) -> None:
        self.label = label
        self.mean = np.asarray(mean, dtype=np.float64)
        self.components = np.asarray(components, dtype=np.float64).reshape(len(self.mean), -1)
        self.eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
        self.total_variance = float(total_variance)

    @property
    def k(self) -> int:
        return self.components.shape[1]

    @property
    def vertex_count(self) -> int:
        return len(self.mean) // 3

    def check(self) -> None:
        gram = self.components.T @ self.components
        if np.max(np.abs(gram - np.eye(self.k))) >= ORTHONORMAL_TOLERANCE:
            raise InvariantError('components of {} are not orthonormal'.format(self.label.value))
        if np.any(self.eigenvalues < 0.0) or np.any(np.diff(self.eigenvalues) > 0.0):
            raise InvariantError('eigenvalues of {} are not non-negative and descending'.format(self.label.value))

    def to_dict(self) -> dict:
        return {'mean': self.mean.tolist(), 'components': self.components.tolist(),
                'eigenvalues': self.eigenvalues.tolist(), 'vertex_count': self.vertex_count,
                'total_variance': self.total_variance}

    @staticmethod
    def from_dict(label: PartLabel, document: dict) -> 'PartPCA':
        pca = PartPCA(label, document['mean'], np.array(document['components'], dtype=np.float64),
                      document['eigenvalues'], document['total_variance'])
        if pca.vertex_count != int(document['vertex_count']) or len(pca.eigenvalues) != pca.k:
            raise ModelError('part {} has inconsistent array sizes'.format(label.value))
        return pca


def fit_part_pca(samples: Sequence[PartMesh], k: int) -> PartPCA:
    """Fits the shape space of one part.

    Args:
        samples: Corresponded instances of the part, at least two.
        k: Number of components, 1 <= k <= len(samples) - 1.

    Returns:
        The fitted PartPCA."""
    n = len(samples)
    if n < 2:
        raise ModelError('PCA needs at least 2 samples, got {}'.format(n))
    if not 1 <= k <= n - 1:
        raise ModelError('component count {} outside [1, {}]'.format(k, n - 1))
    label = samples[0].label
    sizes = {len(sample.vertices) for sample in samples}
    if len(sizes) != 1:
        raise ModelError('samples of {} have differing vertex counts {}'.format(label.value, sorted(sizes)))
    data = np.stack([sample.vertices.reshape(-1) for sample in samples])
    mean = data.mean(axis=0)
    centered = data - mean
    _, s, vt = scipy.linalg.svd(centered, full_matrices=False)
    components = vt[:k].T.copy()
    # Largest entry of each component positive.
    rows = np.argmax(np.abs(components), axis=0)
    signs = np.sign(components[rows, np.arange(k)])
    components *= np.where(signs == 0.0, 1.0, signs)
    eigenvalues = (s[:k] ** 2) / (n - 1)
    total = float(np.sum(centered ** 2) / (n - 1))
    pca = PartPCA(label, mean, components, eigenvalues, total)
    pca.check()
    return pca


def synthesize_part(pca: PartPCA, beta: Iterable[float]) -> np.ndarray:
    """Returns the (V_i, 3) vertices U beta + mu."""
    beta = np.asarray(list(beta), dtype=np.float64)
    if beta.shape != (pca.k,):
        raise ModelError('{} expects {} coefficients, got {}'.format(pca.label.value, pca.k, beta.shape[0]))
    return (pca.components @ beta + pca.mean).reshape(-1, 3)


def project_part(pca: PartPCA, vertices: np.ndarray) -> np.ndarray:
    """Returns the least-squares coefficients U^T (x - mu) of a part instance."""
    x = np.asarray(vertices, dtype=np.float64).reshape(-1)
    if x.shape[0] != pca.mean.shape[0]:
        raise ModelError('{} expects {} vertices, got {}'.format(pca.label.value, pca.vertex_count, x.shape[0] // 3))
    return pca.components.T @ (x - pca.mean)


def explained_variance(pca: PartPCA) -> np.ndarray:
    if pca.total_variance <= 0.0:
        return np.zeros(pca.k)
    return pca.eigenvalues / pca.total_variance


class ShapeCoeffs(object):
    """Per-part coefficient vectors."""
    def __init__(self, betas: Dict[PartLabel, np.ndarray]) -> None:
        self.betas = {label: np.asarray(beta, dtype=np.float64) for label, beta in betas.items()}
        for label, beta in self.betas.items():
            if not np.all(np.isfinite(beta)):
                raise ModelError('coefficients of {} are not finite'.format(label.value))

    def __getitem__(self, label: PartLabel) -> np.ndarray:
        return self.betas[label]

    def as_vector(self) -> np.ndarray:
        labels = sorted(self.betas, key=lambda label: label.order)
        return np.concatenate([self.betas[label] for label in labels])

    def __len__(self) -> int:
        return sum(len(beta) for beta in self.betas.values())


class BodyShapeModel(object):
    """One PartPCA per part plus the reference segmentation and face topology.

    Attributes:
        parts: Label to PartPCA.
        segmentation: The reference segmentation.
        faces: (F, 3) face array of the reference body.
        root_center: Mean position of the root part center, where stitched bodies are placed."""
    def __init__(self, parts: Dict[PartLabel, PartPCA], segmentation: PartSegmentation, faces: np.ndarray,
                 root_center: Optional[np.ndarray] = None) -> None:
        self.parts = parts
        self.segmentation = segmentation
        self.faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
        self.root_center = np.zeros(3) if root_center is None else np.asarray(root_center, dtype=np.float64)
        if set(parts) != set(segmentation.parts):
            missing = sorted(label.value for label in set(segmentation.parts) ^ set(parts))
            raise ModelError('model parts do not match segmentation parts: {}'.format(', '.join(missing)))
        for label, pca in parts.items():
            if pca.vertex_count != len(segmentation.parts[label]):
                raise ModelError('part {} has {} vertices, segmentation has {}'.format(
                    label.value, pca.vertex_count, len(segmentation.parts[label])))
        self.__template = TriMesh(np.zeros((segmentation.vertex_count, 3)), self.faces, check=False)
        self.__topology = {}  # type: Dict[PartLabel, PartMesh]

    @property
    def labels(self) -> List[PartLabel]:
        return self.segmentation.labels

    def coefficient_count(self) -> int:
        return sum(pca.k for pca in self.parts.values())

    def part_mesh(self, label: PartLabel, vertices: np.ndarray) -> PartMesh:
        """Wraps local vertices of a part into a PartMesh with the reference topology."""
        if label not in self.__topology:
            self.__topology[label] = _topology_only(self.__template, self.segmentation, label)
        template = self.__topology[label]
        vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
        center = self.root_center if label == self.segmentation.traversal()[0] else np.zeros(3)
        axis = part_axis(vertices, template.interfaces, template.parent, self.segmentation.children(label))
        return template.with_vertices(vertices, center=center, axis=axis)

    def synthesize(self, coeffs: ShapeCoeffs) -> List[PartMesh]:
        return [self.part_mesh(label, synthesize_part(self.parts[label], coeffs[label])) for label in self.labels]

    def project(self, parts: Iterable[PartMesh]) -> ShapeCoeffs:
        return ShapeCoeffs({part.label: project_part(self.parts[part.label], part.vertices) for part in parts})

    def zero_coeffs(self) -> ShapeCoeffs:
        return ShapeCoeffs({label: np.zeros(pca.k) for label, pca in self.parts.items()})

    def to_dict(self) -> dict:
        payload = {'parts': {label.value: self.parts[label].to_dict() for label in self.labels},
                   'segmentation': self.segmentation.to_dict(),
                   'faces': self.faces.tolist(),
                   'root_center': self.root_center.tolist()}
        return {'checksum': _checksum(payload), **payload}

    @staticmethod
    def from_dict(document: dict) -> 'BodyShapeModel':
        try:
            payload = {key: document[key] for key in ('parts', 'segmentation', 'faces', 'root_center')}
            checksum = document['checksum']
        except (KeyError, TypeError) as e:
            raise ModelError('model document does not follow the schema: missing {}'.format(e))
        if _checksum(payload) != checksum:
            raise ModelError('model checksum mismatch')
        try:
            segmentation = PartSegmentation.from_dict(payload['segmentation'])
            parts = {PartLabel.parse(name): PartPCA.from_dict(PartLabel.parse(name), entry)
                     for name, entry in payload['parts'].items()}
        except (KeyError, TypeError, ValueError, SegmentationError) as e:
            raise ModelError('model document does not follow the schema: {}'.format(e))
        return BodyShapeModel(parts, segmentation, np.array(payload['faces'], dtype=np.int64),
                              np.array(payload['root_center'], dtype=np.float64))


def _topology_only(template: TriMesh, seg: PartSegmentation, label: PartLabel) -> PartMesh:
    indices = seg.parts[label]
    local = np.full(seg.vertex_count, -1, dtype=np.int64)
    local[indices] = np.arange(len(indices))
    inside = np.all(local[template.faces] >= 0, axis=1)
    interfaces = {other: local[seg.interface(label, other)] for other in seg.neighbors(label)}
    return PartMesh(label, np.zeros((len(indices), 3)), local[template.faces[inside]], interfaces,
                    np.array([0.0, 0.0, 1.0]), np.zeros(3), indices, seg.parent(label))


def _checksum(payload: dict) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode('utf-8')).hexdigest()


def fit_body_model(meshes: Sequence[TriMesh], seg: PartSegmentation, k: int = 4, progress: bool = False) -> \
        BodyShapeModel:
    """Fits a PartPCA for every part over a corpus of corresponded bodies.

    Args:
        meshes: Bodies sharing the segmentation's vertex correspondence.
        seg: The segmentation.
        k: Components per part.
        progress: If a progress bar should be shown.

    Returns:
        The fitted model."""
    if len(meshes) < 2:
        raise ModelError('a shape model needs at least 2 bodies, got {}'.format(len(meshes)))
    samples = {label: [] for label in seg.labels}  # type: Dict[PartLabel, List[PartMesh]]
    root = seg.traversal()[0]
    centers = []
    for mesh in tqdm(meshes, desc='extracting parts', disable=not progress):
        for label in seg.labels:
            part = extract_part(mesh, seg, label)
            samples[label].append(part)
            if label == root:
                centers.append(part.center)
    parts = {label: fit_part_pca(samples[label], k) for label in seg.labels}
    for label in seg.labels:
        logger.debug('%s: explained variance %s', label.value, np.round(explained_variance(parts[label]), 4).tolist())
    return BodyShapeModel(parts, seg, meshes[0].faces, np.mean(centers, axis=0))


def save_model(model: BodyShapeModel, path: Union[str, pathlib.Path]) -> None:
    with open(str(path), 'w') as f:
        json.dump(model.to_dict(), f)


def load_model(path: Union[str, pathlib.Path], seg: Optional[PartSegmentation] = None) -> BodyShapeModel:
    """Loads a model, optionally checking it against a segmentation.

    Args:
        path: The model JSON file.
        seg: If given, the model's parts must match this segmentation's parts and sizes.

    Returns:
        The model."""
    try:
        with open(str(path), 'r') as f:
            document = json.load(f)
    except OSError as e:
        raise ModelError('cannot read {}: {}'.format(path, e))
    except json.JSONDecodeError as e:
        raise ModelError('{} is not a valid model file: {}'.format(path, e))
    model = BodyShapeModel.from_dict(document)
    if seg is not None:
        if set(model.parts) != set(seg.parts):
            raise ModelError('model has {} parts, segmentation has {}'.format(len(model.parts), len(seg.parts)))
        for label, pca in model.parts.items():
            if pca.vertex_count != len(seg.parts[label]):
                raise ModelError('part {} size differs from the segmentation'.format(label.value))
    return model
