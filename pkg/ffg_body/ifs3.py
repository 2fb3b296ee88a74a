# -*- coding: utf-8 -*-
"""ifs3.py

Indexed face set (IFS) representation of a triangulated surface in 3D, in millimeters, together with the structural
inspection used to validate meshes before they enter the pipeline.

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import collections
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .errors import MeshError

DEGENERATE_AREA = 1e-9


class TriMesh(object):
    """Immutable triangle mesh.

    Attributes:
        vertices: (V, 3) float array of positions in millimeters.
        faces: (F, 3) int array of vertex indices, counter-clockwise."""
    def __init__(self, vertices: Iterable, faces: Iterable, check: bool = True) -> None:
        """Initializes the TriMesh.

        Args:
            vertices: Vertex positions, anything convertible to a (V, 3) array.
            faces: Vertex index triples, anything convertible to a (F, 3) array.
            check: If the invariants should be verified. Raises MeshError when they do not hold."""
        vertices = np.array(vertices, dtype=np.float64).reshape(-1, 3)
        faces = np.array(faces, dtype=np.int64).reshape(-1, 3)
        vertices.setflags(write=False)
        faces.setflags(write=False)
        self.__vertices = vertices
        self.__faces = faces
        if check:
            self.check()

    @property
    def vertices(self) -> np.ndarray:
        return self.__vertices

    @property
    def faces(self) -> np.ndarray:
        return self.__faces

    @property
    def vertex_count(self) -> int:
        return self.__vertices.shape[0]

    @property
    def face_count(self) -> int:
        return self.__faces.shape[0]

    def check(self) -> None:
        """Raises MeshError if an invariant is violated."""
        if not np.all(np.isfinite(self.__vertices)):
            raise MeshError('mesh has non-finite vertex coordinates')
        if self.face_count == 0:
            return
        if self.__faces.min() < 0 or self.__faces.max() >= self.vertex_count:
            raise MeshError('face index out of range for {} vertices'.format(self.vertex_count))
        degenerate = degenerate_faces(self.__vertices, self.__faces)
        if len(degenerate) > 0:
            raise MeshError('mesh has {} degenerate faces, first is {}'.format(len(degenerate), degenerate[0]))

    def face_areas(self) -> np.ndarray:
        a, b, c = (self.__vertices[self.__faces[:, k]] for k in range(3))
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    def transformed(self, rotation: np.ndarray, translation: Optional[np.ndarray] = None) -> 'TriMesh':
        """Returns a copy with every vertex mapped by x -> R x + t."""
        vertices = self.__vertices @ np.asarray(rotation, dtype=np.float64).T
        if translation is not None:
            vertices = vertices + np.asarray(translation, dtype=np.float64)
        return TriMesh(vertices, self.__faces, check=False)

    def scaled(self, factor: float) -> 'TriMesh':
        return TriMesh(self.__vertices * factor, self.__faces, check=False)

    def extent(self) -> np.ndarray:
        """Returns the axis aligned size of the mesh."""
        if self.vertex_count == 0:
            return np.zeros(3)
        return self.__vertices.max(axis=0) - self.__vertices.min(axis=0)

    def edges(self) -> np.ndarray:
        """Returns the (3F, 2) array of undirected face edges, sorted within each row."""
        f = self.__faces
        e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]], axis=0)
        return np.sort(e, axis=1)

    @staticmethod
    def empty() -> 'TriMesh':
        return TriMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64), check=False)


class ValidationReport(object):
    """Findings of a structural inspection of a mesh.

    Attributes:
        degenerate_faces: Indices of faces with repeated indices or area at or below 1e-9 mm².
        non_manifold_edges: Edges shared by more than two faces.
        boundary_edges: Edges used by exactly one face."""
    def __init__(self, degenerate_faces: List[int], non_manifold_edges: List[Tuple[int, int]],
                 boundary_edges: List[Tuple[int, int]]) -> None:
        self.degenerate_faces = degenerate_faces
        self.non_manifold_edges = non_manifold_edges
        self.boundary_edges = boundary_edges

    @property
    def boundary_edge_count(self) -> int:
        return len(self.boundary_edges)

    @property
    def manifold(self) -> bool:
        return len(self.non_manifold_edges) == 0

    @property
    def watertight(self) -> bool:
        return self.manifold and self.boundary_edge_count == 0

    def to_dict(self) -> Dict[str, object]:
        return {'degenerate_faces': self.degenerate_faces,
                'non_manifold_edges': [list(e) for e in self.non_manifold_edges],
                'boundary_edge_count': self.boundary_edge_count,
                'manifold': self.manifold,
                'watertight': self.watertight}


def degenerate_faces(vertices: np.ndarray, faces: np.ndarray) -> List[int]:
    if len(faces) == 0:
        return []
    repeated = (faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2]) | (faces[:, 2] == faces[:, 0])
    a, b, c = (vertices[faces[:, k]] for k in range(3))
    areas = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    return [int(i) for i in np.nonzero(repeated | (areas <= DEGENERATE_AREA))[0]]


def validate(mesh: TriMesh) -> ValidationReport:
    """Inspects a mesh without modifying it.

    Args:
        mesh: The mesh to inspect. Built with check=False when inspecting meshes that may be broken.

    Returns:
        The validation report."""
    counts = collections.Counter(tuple(int(v) for v in e) for e in mesh.edges())
    non_manifold = sorted(e for e, n in counts.items() if n > 2)
    boundary = sorted(e for e, n in counts.items() if n == 1)
    return ValidationReport(degenerate_faces(mesh.vertices, mesh.faces), non_manifold, boundary)
