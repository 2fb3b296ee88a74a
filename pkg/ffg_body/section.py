# -*- coding: utf-8 -*-
"""section.py

Plane sections of triangle meshes. Every triangle straddling the plane contributes one segment whose endpoints are
the crossings of its two straddling edges. Crossings are keyed by mesh edge, so segments of neighboring triangles share
endpoints exactly and chain into loops without any distance tolerance.

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import logging
import pathlib
from typing import List, Optional, Tuple, Union

import cv2
import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from .errors import OpenSectionError, SectionError
from .ifs3 import TriMesh
from .plane3 import CuttingPlane, orthonormal_frame

logger = logging.getLogger(__name__)


class CrossSection(object):
    """Closed loops cut from a mesh by a plane.

    Attributes:
        loops: Ordered (N_k, 3) point arrays; each loop closes from its last point back to its first.
        selected: Index of the loop whose centroid is nearest to the plane point.
        perimeter: Length of the selected loop, millimeters.
        plane: The cutting plane."""
    def __init__(self, loops: List[np.ndarray], selected: int, plane: CuttingPlane) -> None:
        self.loops = loops
        self.selected = selected
        self.plane = plane
        self.perimeter = loop_length(loops[selected])

    @property
    def loop(self) -> np.ndarray:
        return self.loops[self.selected]


def loop_length(points: np.ndarray) -> float:
    return float(np.sum(np.linalg.norm(np.roll(points, -1, axis=0) - points, axis=1)))


class Sectioner(object):
    """Cuts one mesh by many planes. Edge tables are built once per mesh."""
    def __init__(self, mesh: TriMesh) -> None:
        self.__vertices = mesh.vertices
        faces = mesh.faces
        self.__edges = np.stack([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]], axis=1)
        lo = np.minimum(self.__edges[..., 0], self.__edges[..., 1])
        hi = np.maximum(self.__edges[..., 0], self.__edges[..., 1])
        self.__keys = lo * max(mesh.vertex_count, 1) + hi
        self.__lo = lo
        self.__hi = hi

    def __segments(self, plane: CuttingPlane) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Returns node positions, segment node pairs and node degrees."""
        d = plane.distance(self.__vertices)
        positive = d > 0.0
        crossing = positive[self.__edges[..., 0]] != positive[self.__edges[..., 1]]
        rows = np.nonzero(np.any(crossing, axis=1))[0]
        if len(rows) == 0:
            return np.zeros((0, 3)), np.zeros((0, 2), dtype=np.int64), np.zeros(0, dtype=np.int64)
        face_idx, edge_idx = np.nonzero(crossing[rows])
        keys = self.__keys[rows][face_idx, edge_idx].reshape(-1, 2)
        unique, inverse = np.unique(keys.reshape(-1), return_inverse=True)
        first = np.zeros(len(unique), dtype=np.int64)
        first[inverse] = np.arange(len(inverse))
        lo = self.__lo[rows][face_idx, edge_idx][first]
        hi = self.__hi[rows][face_idx, edge_idx][first]
        t = d[lo] / (d[lo] - d[hi])
        nodes = self.__vertices[lo] + t[:, None] * (self.__vertices[hi] - self.__vertices[lo])
        segments = inverse.reshape(-1, 2)
        degrees = np.bincount(segments.reshape(-1), minlength=len(unique))
        return nodes, segments, degrees

    def __components(self, plane: CuttingPlane):
        nodes, segments, degrees = self.__segments(plane)
        if len(segments) == 0:
            raise SectionError('plane does not intersect the mesh')
        n = len(nodes)
        graph = scipy.sparse.coo_matrix((np.ones(len(segments)), (segments[:, 0], segments[:, 1])), shape=(n, n))
        count, labels = scipy.sparse.csgraph.connected_components(graph, directed=False)
        sizes = np.bincount(labels, minlength=count).astype(np.float64)
        centroids = np.stack([np.bincount(labels, weights=nodes[:, k], minlength=count) for k in range(3)], axis=1)
        centroids /= sizes[:, None]
        selected = int(np.argmin(np.linalg.norm(centroids - plane.point, axis=1)))
        return nodes, segments, degrees, labels, selected

    def perimeter(self, plane: CuttingPlane) -> float:
        """Returns the length of the selected loop without building ordered loops."""
        nodes, segments, degrees, labels, selected = self.__components(plane)
        mine = labels == selected
        if np.any(degrees[mine] != 2):
            raise OpenSectionError('selected section chain is open', nodes[mine].tolist())
        lengths = np.linalg.norm(nodes[segments[:, 0]] - nodes[segments[:, 1]], axis=1)
        return float(np.sum(lengths[mine[segments[:, 0]]]))

    def section(self, plane: CuttingPlane) -> CrossSection:
        nodes, segments, degrees, labels, selected = self.__components(plane)
        loops = []
        chosen = 0
        for component in range(labels.max() + 1):
            members = np.nonzero(labels == component)[0]
            closed = np.all(degrees[members] == 2)
            if not closed:
                if component == selected:
                    raise OpenSectionError('selected section chain is open', nodes[members].tolist())
                logger.debug('skipping open section chain of %d points', len(members))
                continue
            if component == selected:
                chosen = len(loops)
            loops.append(nodes[_walk(segments[labels[segments[:, 0]] == component], members[0])])
        return CrossSection(loops, chosen, plane)


def _walk(segments: np.ndarray, start: int) -> List[int]:
    neighbors = {}
    for a, b in segments:
        neighbors.setdefault(int(a), []).append(int(b))
        neighbors.setdefault(int(b), []).append(int(a))
    order = [int(start)]
    previous, current = None, int(start)
    while True:
        options = neighbors[current]
        following = options[0] if options[0] != previous else options[1]
        if following == start:
            break
        order.append(following)
        previous, current = current, following
    return order


def cross_section(mesh: TriMesh, plane: CuttingPlane) -> CrossSection:
    """Cuts a mesh with a plane.

    Args:
        mesh: The mesh, or the mesh of a PartMesh.
        plane: The cutting plane.

    Returns:
        All closed loops, the one nearest the plane point selected."""
    return Sectioner(mesh).section(plane)


def save_svg(section: CrossSection, path: Union[str, pathlib.Path], margin: float = 10.0) -> None:
    """Writes the loops of a section, projected into the plane, as SVG. The selected loop is drawn in red."""
    u, v = orthonormal_frame(section.plane.normal)
    projected = [np.stack([(loop - section.plane.point) @ u, -(loop - section.plane.point) @ v], axis=1)
                 for loop in section.loops]
    everything = np.concatenate(projected)
    lo = everything.min(axis=0) - margin
    size = everything.max(axis=0) + margin - lo
    lines = ['<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.3f} {:.3f} {:.3f} {:.3f}">'.format(
        lo[0], lo[1], size[0], size[1])]
    for i, points in enumerate(projected):
        color = 'red' if i == section.selected else 'black'
        coordinates = ' '.join('{:.3f},{:.3f}'.format(x, y) for x, y in points)
        lines.append('<polygon points="{}" fill="none" stroke="{}" stroke-width="1"/>'.format(coordinates, color))
    lines.append('<text x="{:.3f}" y="{:.3f}" font-size="12">{:.2f} mm</text>'.format(
        lo[0] + 2.0, lo[1] + 14.0, section.perimeter))
    lines.append('</svg>')
    with open(str(path), 'w') as f:
        f.write('\n'.join(lines) + '\n')


def save_png(section: CrossSection, path: Union[str, pathlib.Path], size: int = 400,
             scale: Optional[float] = None) -> None:
    """Writes a raster preview of a section, selected loop in red.

    Args:
        section: The section.
        path: Destination image file.
        size: Width and height in pixels.
        scale: Pixels per millimeter. Chosen to fit all loops when None."""
    u, v = orthonormal_frame(section.plane.normal)
    projected = [np.stack([(loop - section.plane.point) @ u, -(loop - section.plane.point) @ v], axis=1)
                 for loop in section.loops]
    everything = np.concatenate(projected)
    center = 0.5 * (everything.min(axis=0) + everything.max(axis=0))
    if scale is None:
        span = float(np.max(everything.max(axis=0) - everything.min(axis=0)))
        scale = 0.9 * size / span if span > 0.0 else 1.0
    screen = np.full((size, size, 3), 255, np.uint8)
    for i, points in enumerate(projected):
        pixels = np.round((points - center) * scale + size * 0.5).astype(np.int32)
        color = (0, 0, 255) if i == section.selected else (0, 0, 0)
        cv2.polylines(screen, [pixels.reshape(-1, 1, 2)], isClosed=True, color=color, thickness=1, lineType=cv2.LINE_AA)
    if not cv2.imwrite(str(path), screen):
        raise SectionError('cannot write {}'.format(path))
