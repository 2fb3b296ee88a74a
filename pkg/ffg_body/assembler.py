# -*- coding: utf-8 -*-
"""assembler.py

Stitching of independently generated parts into one body. Starting from the root, every child part is rigidly aligned
onto its parent's copy of their shared interface points, the two copies are replaced by their average, and a band of
vertices next to each interface is displaced to blend the seam.

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import logging
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import AssemblyError, InvariantError
from .ifs3 import TriMesh
from .segmentation import PartLabel, PartMesh, PartSegmentation

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.1
COLLINEAR_RATIO = 1e-9


class RigidTransform(object):
    """Proper rigid motion x -> R (x - pivot) + pivot + T.

    Attributes:
        rotation: 3x3 rotation R, det +1.
        translation: Translation T between the centroids, millimeters.
        pivot: Centroid of the moved point set, about which R is applied.
        degenerate: True when the moved point set was (nearly) collinear, leaving the rotation about that line
            undetermined.
        residual: Root mean square misfit of the aligned points, millimeters."""
    def __init__(self, rotation: np.ndarray, translation: np.ndarray, pivot: np.ndarray, degenerate: bool = False,
                 residual: float = 0.0) -> None:
        self.rotation = np.asarray(rotation, dtype=np.float64)
        self.translation = np.asarray(translation, dtype=np.float64)
        self.pivot = np.asarray(pivot, dtype=np.float64)
        self.degenerate = degenerate
        self.residual = residual

    def apply(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points) - self.pivot) @ self.rotation.T + self.pivot + self.translation

    @staticmethod
    def identity() -> 'RigidTransform':
        return RigidTransform(np.eye(3), np.zeros(3), np.zeros(3))


def procrustes_align(child_pts: np.ndarray, parent_pts: np.ndarray) -> RigidTransform:
    """Finds the rotation and translation best mapping child_pts onto parent_pts.

    Args:
        child_pts: (N, 3) points to move, N >= 3.
        parent_pts: (N, 3) corresponding target points.

    Returns:
        The transform. T is the difference of the centroids and R minimizes the Frobenius misfit over proper
        rotations."""
    child_pts = np.asarray(child_pts, dtype=np.float64).reshape(-1, 3)
    parent_pts = np.asarray(parent_pts, dtype=np.float64).reshape(-1, 3)
    if len(child_pts) != len(parent_pts):
        raise AssemblyError('point counts differ: {} and {}'.format(len(child_pts), len(parent_pts)))
    if len(child_pts) < 3:
        raise AssemblyError('alignment needs at least 3 points, got {}'.format(len(child_pts)))
    child_center = child_pts.mean(axis=0)
    parent_center = parent_pts.mean(axis=0)
    a = child_pts - child_center
    b = parent_pts - parent_center
    u, s, vt = np.linalg.svd(a.T @ b)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    if d == 0.0:
        d = 1.0
    rotation = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    if abs(np.linalg.det(rotation) - 1.0) > 1e-9:
        raise InvariantError('alignment produced an improper rotation')
    spread = np.linalg.svd(a, compute_uv=False)
    degenerate = bool(spread[0] == 0.0 or spread[1] <= COLLINEAR_RATIO * spread[0])
    residual = float(np.sqrt(np.mean(np.sum((a @ rotation.T - b) ** 2, axis=1))))
    return RigidTransform(rotation, parent_center - child_center, child_center, degenerate, residual)


class Deformation(object):
    """Outcome of blending one side of one interface.

    Attributes:
        mean_distance: Mean distance between the final and the aligned interface points.
        direction: -1 moves band vertices away from the part axis, +1 toward it.
        moved: Number of displaced vertices.
        skipped: Number of band vertices lying on the axis, left in place."""
    def __init__(self, mean_distance: float, direction: int, moved: int, skipped: int) -> None:
        self.mean_distance = mean_distance
        self.direction = direction
        self.moved = moved
        self.skipped = skipped


class StitchReport(object):
    """Per interface record of a stitch."""
    def __init__(self, child: PartLabel, parent: PartLabel, child_side: Deformation, parent_side: Deformation,
                 max_residual_gap: float) -> None:
        self.child = child
        self.parent = parent
        self.child_side = child_side
        self.parent_side = parent_side
        self.max_residual_gap = max_residual_gap

    def to_dict(self) -> dict:
        return {'child': self.child.value, 'parent': self.parent.value,
                'mean_deformation': self.child_side.mean_distance, 'direction': self.child_side.direction,
                'parent_mean_deformation': self.parent_side.mean_distance,
                'parent_direction': self.parent_side.direction,
                'max_residual_gap': self.max_residual_gap,
                'skipped_vertices': self.child_side.skipped + self.parent_side.skipped}


def stitch_deformation(part: PartMesh, neighbor: PartLabel, final_interface: np.ndarray,
                       aligned_interface: np.ndarray, epsilon: float = DEFAULT_EPSILON) -> \
        Tuple[np.ndarray, Deformation]:
    """Displaces the vertices of a part lying in a band next to one interface.

    Note:
        The band is the set of vertices whose foot-point w on the segment from the part center o to the interface
        center o' satisfies |o'w| / |oo'| <= epsilon. A band vertex v moves by direction * (vw / |vw|) *
        (|o'w| / |oo'|) * mean_distance, so the displacement vanishes at the interface and reaches
        epsilon * mean_distance at the inner edge of the band. Interface points are never displaced.

    Args:
        part: The part, vertices in the frame of the interface point sets.
        neighbor: The neighbor sharing the interface.
        final_interface: Averaged interface points.
        aligned_interface: The part's own interface points.
        epsilon: Band width as a fraction of |oo'|, in (0, 1].

    Returns:
        The displaced vertex array and the deformation record."""
    if not 0.0 < epsilon <= 1.0:
        raise AssemblyError('epsilon must lie in (0, 1], got {}'.format(epsilon))
    final_interface = np.asarray(final_interface, dtype=np.float64)
    aligned_interface = np.asarray(aligned_interface, dtype=np.float64)
    if final_interface.shape != aligned_interface.shape:
        raise AssemblyError('interface point sets differ in size')
    vertices = part.vertices.copy()
    gaps = aligned_interface - final_interface
    mean_distance = float(np.mean(np.linalg.norm(gaps, axis=1)))
    # Mean angle at each final point between the interface center and the aligned point.
    center = aligned_interface.mean(axis=0)
    to_center = center - final_interface
    norms = np.linalg.norm(to_center, axis=1) * np.linalg.norm(gaps, axis=1)
    valid = norms > 0.0
    if np.any(valid):
        cosines = np.sum(to_center[valid] * gaps[valid], axis=1) / norms[valid]
        mean_angle = float(np.mean(np.arccos(np.clip(cosines, -1.0, 1.0))))
    else:
        mean_angle = np.pi
    direction = -1 if mean_angle <= np.pi / 2 else 1
    origin = vertices.mean(axis=0)
    segment = center - origin
    length_sq = float(segment.dot(segment))
    if mean_distance == 0.0 or length_sq == 0.0:
        return vertices, Deformation(mean_distance, direction, 0, 0)
    t = (vertices - origin) @ segment / length_sq
    falloff = np.abs(1.0 - t)
    band = (falloff <= epsilon) & (t >= 0.0)
    protected = np.concatenate([indices for indices in part.interfaces.values()]) if part.interfaces else []
    band[np.asarray(protected, dtype=np.int64)] = False
    feet = origin + np.outer(t, segment)
    inward = feet - vertices
    inward_length = np.linalg.norm(inward, axis=1)
    on_axis = band & (inward_length == 0.0)
    band &= ~on_axis
    rows = np.nonzero(band)[0]
    factor = np.clip(falloff[rows], 0.0, epsilon)
    vertices[rows] += direction * (inward[rows] / inward_length[rows, None]) * (factor * mean_distance)[:, None]
    if np.any(on_axis):
        logger.debug('%s/%s: %d band vertices on the axis left in place', part.label.value, neighbor.value,
                     int(np.sum(on_axis)))
    return vertices, Deformation(mean_distance, direction, len(rows), int(np.sum(on_axis)))


def stitch_body(parts: Sequence[PartMesh], seg: PartSegmentation, epsilon: float = DEFAULT_EPSILON) -> \
        Tuple[TriMesh, List[StitchReport]]:
    """Assembles parts into one watertight body.

    Args:
        parts: One PartMesh per part of seg, vertices in the part's canonical frame. The root is placed at its
            center; every other part is placed by alignment to its parent.
        seg: The segmentation giving interfaces, tree and global vertex indices.
        epsilon: Blend band width.

    Returns:
        The stitched mesh and one report per interface, in traversal order."""
    by_label = {part.label: part for part in parts}
    for label in seg.labels:
        if label not in by_label:
            raise AssemblyError('part {} is missing'.format(label.value))
        part = by_label[label]
        if len(part.vertices) != len(seg.parts[label]):
            raise AssemblyError('part {} has {} vertices, segmentation expects {}'.format(
                label.value, len(part.vertices), len(seg.parts[label])))
        for other in seg.neighbors(label):
            if other not in part.interfaces or len(part.interfaces[other]) != len(seg.interface(label, other)):
                raise AssemblyError('interface {}/{} does not match the segmentation'.format(label.value, other.value))
    order = seg.traversal()
    root = by_label[order[0]]
    placed = {root.label: root.vertices + root.center}  # type: Dict[PartLabel, np.ndarray]
    for label in order[1:]:
        parent = seg.parent(label)
        part = by_label[label]
        transform = procrustes_align(part.interface_points(parent), placed[parent][by_label[parent].interfaces[label]])
        if transform.degenerate:
            logger.warning('interface %s/%s is collinear, alignment is underdetermined', label.value, parent.value)
        placed[label] = transform.apply(part.vertices)
    final = {label: vertices.copy() for label, vertices in placed.items()}
    averaged = {}
    reports = []
    for label in order[1:]:
        parent = seg.parent(label)
        child_rows = by_label[label].interfaces[parent]
        parent_rows = by_label[parent].interfaces[label]
        aligned = placed[label][child_rows]
        target = placed[parent][parent_rows]
        average = 0.5 * (aligned + target)
        averaged[label] = average
        child_vertices, child_side = stitch_deformation(by_label[label].with_vertices(placed[label]), parent,
                                                        average, aligned, epsilon)
        parent_vertices, parent_side = stitch_deformation(by_label[parent].with_vertices(placed[parent]), label,
                                                          average, target, epsilon)
        final[label] += child_vertices - placed[label]
        final[parent] += parent_vertices - placed[parent]
        gap = float(np.max(np.linalg.norm(aligned - average, axis=1)))
        reports.append(StitchReport(label, parent, child_side, parent_side, gap))
    for label in order[1:]:
        parent = seg.parent(label)
        final[label][by_label[label].interfaces[parent]] = averaged[label]
        final[parent][by_label[parent].interfaces[label]] = averaged[label]
    vertices = np.zeros((seg.vertex_count, 3))
    for label in order:
        vertices[by_label[label].global_indices] = final[label]
    return TriMesh(vertices, _merged_faces([by_label[label] for label in order]), check=False), reports


def _merged_faces(parts: Sequence[PartMesh]) -> np.ndarray:
    faces = np.concatenate([part.global_indices[part.faces] for part in parts], axis=0)
    _, first = np.unique(np.sort(faces, axis=1), axis=0, return_index=True)
    return faces[np.sort(first)]
