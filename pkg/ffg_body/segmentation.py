# -*- coding: utf-8 -*-
"""segmentation.py

Assignment of mesh vertices to named body parts, the interface points shared by neighboring parts, the kinematic tree
over the parts, and extraction of individual parts into a part-centered coordinate system.

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import enum
import json
import logging
import pathlib
from typing import Dict, FrozenSet, Iterable, List, Optional, Union

import numpy as np

from .errors import SegmentationError
from .ifs3 import TriMesh

logger = logging.getLogger(__name__)


class PartLabel(enum.Enum):
    """The 17 body parts. Declaration order is the fixed traversal order among siblings."""
    HEAD = 'head'
    NECK = 'neck'
    UPPER_TORSO = 'upper-torso'
    LOWER_TORSO = 'lower-torso'
    PELVIS = 'pelvis'
    LEFT_UPPER_LEG = 'left-upper-leg'
    RIGHT_UPPER_LEG = 'right-upper-leg'
    LEFT_LOWER_LEG = 'left-lower-leg'
    RIGHT_LOWER_LEG = 'right-lower-leg'
    LEFT_UPPER_ARM = 'left-upper-arm'
    RIGHT_UPPER_ARM = 'right-upper-arm'
    LEFT_LOWER_ARM = 'left-lower-arm'
    RIGHT_LOWER_ARM = 'right-lower-arm'
    LEFT_HAND = 'left-hand'
    RIGHT_HAND = 'right-hand'
    LEFT_FOOT = 'left-foot'
    RIGHT_FOOT = 'right-foot'

    @property
    def order(self) -> int:
        return _LABEL_ORDER[self]

    @staticmethod
    def parse(value: Union[str, 'PartLabel']) -> 'PartLabel':
        if isinstance(value, PartLabel):
            return value
        try:
            return PartLabel(value)
        except ValueError:
            raise SegmentationError('unknown part label {!r}'.format(value))


_LABEL_ORDER = {label: i for i, label in enumerate(PartLabel)}

ROOT = PartLabel.PELVIS

# The kinematic tree of a complete body, child to parent.
BODY_TREE = {
    PartLabel.LOWER_TORSO: PartLabel.PELVIS,
    PartLabel.UPPER_TORSO: PartLabel.LOWER_TORSO,
    PartLabel.NECK: PartLabel.UPPER_TORSO,
    PartLabel.HEAD: PartLabel.NECK,
    PartLabel.LEFT_UPPER_ARM: PartLabel.UPPER_TORSO,
    PartLabel.RIGHT_UPPER_ARM: PartLabel.UPPER_TORSO,
    PartLabel.LEFT_LOWER_ARM: PartLabel.LEFT_UPPER_ARM,
    PartLabel.RIGHT_LOWER_ARM: PartLabel.RIGHT_UPPER_ARM,
    PartLabel.LEFT_HAND: PartLabel.LEFT_LOWER_ARM,
    PartLabel.RIGHT_HAND: PartLabel.RIGHT_LOWER_ARM,
    PartLabel.LEFT_UPPER_LEG: PartLabel.PELVIS,
    PartLabel.RIGHT_UPPER_LEG: PartLabel.PELVIS,
    PartLabel.LEFT_LOWER_LEG: PartLabel.LEFT_UPPER_LEG,
    PartLabel.RIGHT_LOWER_LEG: PartLabel.RIGHT_UPPER_LEG,
    PartLabel.LEFT_FOOT: PartLabel.LEFT_LOWER_LEG,
    PartLabel.RIGHT_FOOT: PartLabel.RIGHT_LOWER_LEG,
}

Pair = FrozenSet[PartLabel]


def pair(a: PartLabel, b: PartLabel) -> Pair:
    return frozenset((a, b))


class PartSegmentation(object):
    """Vertex to part assignment with interfaces and kinematic tree.

    Attributes:
        vertex_count: Number of vertices of the meshes this segmentation applies to.
        parts: Part label to sorted vertex index array.
        interfaces: Unordered part pair to ordered vertex index array of the shared interface points.
        tree: Child label to parent label. The root has no entry."""
    def __init__(self, vertex_count: int, parts: Dict[PartLabel, Iterable[int]],
                 interfaces: Dict[Pair, Iterable[int]], tree: Dict[PartLabel, PartLabel]) -> None:
        self.vertex_count = int(vertex_count)
        self.parts = {label: np.unique(np.asarray(list(indices), dtype=np.int64)) for label, indices in parts.items()}
        self.interfaces = {key: np.asarray(list(indices), dtype=np.int64) for key, indices in interfaces.items()}
        self.tree = dict(tree)
        for array in list(self.parts.values()) + list(self.interfaces.values()):
            array.setflags(write=False)
        self.__check()
        self.__order = self.__traverse()

    @property
    def labels(self) -> List[PartLabel]:
        return sorted(self.parts, key=lambda label: label.order)

    def parent(self, label: PartLabel) -> Optional[PartLabel]:
        return self.tree.get(label)

    def children(self, label: PartLabel) -> List[PartLabel]:
        return sorted((c for c, p in self.tree.items() if p == label), key=lambda c: c.order)

    def neighbors(self, label: PartLabel) -> List[PartLabel]:
        result = [other for key in self.interfaces if label in key for other in key if other != label]
        return sorted(result, key=lambda c: c.order)

    def interface(self, a: PartLabel, b: PartLabel) -> np.ndarray:
        key = pair(a, b)
        if key not in self.interfaces:
            raise SegmentationError('no interface between {} and {}'.format(a.value, b.value))
        return self.interfaces[key]

    def traversal(self) -> List[PartLabel]:
        """Returns the labels parent-before-child, siblings in label order."""
        return list(self.__order)

    def __check(self) -> None:
        if ROOT not in self.parts:
            raise SegmentationError('segmentation must contain the root part {}'.format(ROOT.value))
        for label, indices in self.parts.items():
            if len(indices) == 0:
                raise SegmentationError('part {} has no vertices'.format(label.value))
            if indices[0] < 0 or indices[-1] >= self.vertex_count:
                raise SegmentationError('part {} has indices outside [0, {})'.format(label.value, self.vertex_count))
        covered = np.zeros(self.vertex_count, dtype=np.int64)
        for indices in self.parts.values():
            covered[indices] += 1
        if np.any(covered == 0):
            raise SegmentationError('{} vertices belong to no part'.format(int(np.sum(covered == 0))))
        shared = np.zeros(self.vertex_count, dtype=bool)
        for key, indices in self.interfaces.items():
            names = '/'.join(sorted(label.value for label in key))
            if len(key) != 2:
                raise SegmentationError('interface {} must join two distinct parts'.format(names))
            if len(indices) < 3:
                raise SegmentationError('interface {} has {} points, at least 3 are needed'.format(names, len(indices)))
            if len(np.unique(indices)) != len(indices):
                raise SegmentationError('interface {} repeats indices'.format(names))
            for label in key:
                if label not in self.parts:
                    raise SegmentationError('interface {} names a missing part'.format(names))
                if not np.all(np.isin(indices, self.parts[label])):
                    raise SegmentationError('interface {} has points outside part {}'.format(names, label.value))
            a, b = tuple(key)
            if self.tree.get(a) != b and self.tree.get(b) != a:
                raise SegmentationError('interface {} is not an edge of the kinematic tree'.format(names))
            shared[indices] = True
        if np.any((covered > 1) & ~shared):
            raise SegmentationError('parts overlap outside interface points')
        if ROOT in self.tree:
            raise SegmentationError('the root {} cannot have a parent'.format(ROOT.value))
        for child, parent in self.tree.items():
            if child not in self.parts or parent not in self.parts:
                raise SegmentationError('tree edge {} -> {} names a missing part'.format(child.value, parent.value))

    def __traverse(self) -> List[PartLabel]:
        order = [ROOT]
        queue = [ROOT]
        while queue:
            label = queue.pop(0)
            for child in self.children(label):
                if child in order:
                    raise SegmentationError('kinematic tree has a cycle through {}'.format(child.value))
                order.append(child)
                queue.append(child)
        missing = set(self.parts) - set(order)
        if missing:
            names = ', '.join(sorted(label.value for label in missing))
            raise SegmentationError('kinematic tree does not reach {} from the root (cycle or disconnected)'
                                    .format(names))
        return order

    def to_dict(self) -> dict:
        interfaces = []
        for key in sorted(self.interfaces, key=lambda k: sorted(label.order for label in k)):
            a, b = sorted(key, key=lambda label: label.order)
            interfaces.append({'a': a.value, 'b': b.value, 'indices': self.interfaces[key].tolist()})
        return {'vertex_count': self.vertex_count,
                'parts': {label.value: self.parts[label].tolist() for label in self.labels},
                'interfaces': interfaces,
                'tree': {child.value: parent.value for child, parent in sorted(self.tree.items(),
                                                                             key=lambda item: item[0].order)}}

    @staticmethod
    def from_dict(document: dict) -> 'PartSegmentation':
        try:
            vertex_count = int(document['vertex_count'])
            parts = {PartLabel.parse(name): indices for name, indices in document['parts'].items()}
            interfaces = {}
            for entry in document['interfaces']:
                interfaces[pair(PartLabel.parse(entry['a']), PartLabel.parse(entry['b']))] = entry['indices']
            tree = {PartLabel.parse(c): PartLabel.parse(p) for c, p in document['tree'].items()}
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise SegmentationError('segmentation document does not follow the schema: {!r}'.format(e))
        return PartSegmentation(vertex_count, parts, interfaces, tree)


def load_segmentation(path: Union[str, pathlib.Path]) -> PartSegmentation:
    """Loads and validates a segmentation JSON document."""
    try:
        with open(str(path), 'r') as f:
            document = json.load(f)
    except OSError as e:
        raise SegmentationError('cannot read {}: {}'.format(path, e))
    except json.JSONDecodeError as e:
        raise SegmentationError('{} is not valid JSON: {}'.format(path, e))
    return PartSegmentation.from_dict(document)


def save_segmentation(seg: PartSegmentation, path: Union[str, pathlib.Path]) -> None:
    with open(str(path), 'w') as f:
        json.dump(seg.to_dict(), f)


class PartMesh(object):
    """A body part in its canonical, part-centered coordinate system.

    Attributes:
        label: The part.
        vertices: (V_i, 3) positions relative to the part center.
        faces: (F_i, 3) local vertex indices.
        interfaces: Neighbor label to ordered local indices of the shared interface points.
        axis: Unit part axis, pointing from the parent interface toward the far end.
        center: The part center in the coordinates of the source mesh.
        global_indices: Source mesh index of every local vertex.
        parent: The parent part, None for the root."""
    def __init__(self, label: PartLabel, vertices: np.ndarray, faces: np.ndarray,
                 interfaces: Dict[PartLabel, np.ndarray], axis: np.ndarray, center: np.ndarray,
                 global_indices: np.ndarray, parent: Optional[PartLabel] = None) -> None:
        self.label = label
        self.vertices = np.asarray(vertices, dtype=np.float64)
        self.faces = np.asarray(faces, dtype=np.int64)
        self.interfaces = interfaces
        self.axis = np.asarray(axis, dtype=np.float64)
        self.center = np.asarray(center, dtype=np.float64)
        self.global_indices = np.asarray(global_indices, dtype=np.int64)
        self.parent = parent

    @property
    def mesh(self) -> TriMesh:
        return TriMesh(self.vertices, self.faces, check=False)

    def interface_points(self, neighbor: PartLabel) -> np.ndarray:
        if neighbor not in self.interfaces:
            raise SegmentationError('{} has no interface with {}'.format(self.label.value, neighbor.value))
        return self.vertices[self.interfaces[neighbor]]

    def interface_center(self, neighbor: PartLabel) -> np.ndarray:
        return self.interface_points(neighbor).mean(axis=0)

    def with_vertices(self, vertices: np.ndarray, center: Optional[np.ndarray] = None,
                      axis: Optional[np.ndarray] = None) -> 'PartMesh':
        """Returns a copy carrying other local vertex positions (same topology)."""
        vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
        if vertices.shape != self.vertices.shape:
            raise SegmentationError('{} expects {} vertices, got {}'.format(self.label.value, len(self.vertices),
                                                                          len(vertices)))
        return PartMesh(self.label, vertices, self.faces, self.interfaces,
                        self.axis if axis is None else axis, self.center if center is None else center,
                        self.global_indices, self.parent)


def extract_part(mesh: TriMesh, seg: PartSegmentation, label: PartLabel) -> PartMesh:
    """Extracts one part into its canonical frame.

    Args:
        mesh: A mesh with seg.vertex_count vertices.
        seg: The segmentation.
        label: The part to extract.

    Returns:
        The part mesh, centroid at the origin."""
    if label not in seg.parts:
        raise SegmentationError('part {} is not in the segmentation'.format(label.value))
    if mesh.vertex_count != seg.vertex_count:
        raise SegmentationError('mesh has {} vertices, segmentation expects {}'.format(mesh.vertex_count,
                                                                                       seg.vertex_count))
    indices = seg.parts[label]
    local = np.full(mesh.vertex_count, -1, dtype=np.int64)
    local[indices] = np.arange(len(indices))
    inside = np.all(local[mesh.faces] >= 0, axis=1)
    faces = local[mesh.faces[inside]]
    if len(faces) == 0:
        raise SegmentationError('part {} has no faces'.format(label.value))
    center = mesh.vertices[indices].mean(axis=0)
    vertices = mesh.vertices[indices] - center
    interfaces = {other: local[seg.interface(label, other)] for other in seg.neighbors(label)}
    parent = seg.parent(label)
    axis = part_axis(vertices, interfaces, parent, seg.children(label))
    return PartMesh(label, vertices, faces, interfaces, axis, center, indices, parent)


def part_axis(vertices: np.ndarray, interfaces: Dict[PartLabel, np.ndarray], parent: Optional[PartLabel],
              children: List[PartLabel]) -> np.ndarray:
    """Returns the unit principal direction of a centered vertex set that best matches the part's reference
    direction, oriented from the parent interface toward the far end.

    Note:
        The reference direction runs from the parent interface center to the centroid. The root has no parent
        interface and uses the direction from the centroid toward its first child interface instead. With no
        interfaces at all the dominant direction is used, with its largest entry made positive."""
    _, _, vt = np.linalg.svd(vertices - vertices.mean(axis=0), full_matrices=False)
    if parent is not None and parent in interfaces:
        reference = vertices.mean(axis=0) - vertices[interfaces[parent]].mean(axis=0)
    elif children and children[0] in interfaces:
        reference = vertices[interfaces[children[0]]].mean(axis=0) - vertices.mean(axis=0)
    else:
        reference = None
    if reference is None or np.linalg.norm(reference) == 0.0:
        axis = vt[0]
        return axis if axis[np.argmax(np.abs(axis))] > 0.0 else -axis
    reference = reference / np.linalg.norm(reference)
    axis = vt[int(np.argmax(np.abs(vt @ reference)))]
    return axis if axis.dot(reference) > 0.0 else -axis
