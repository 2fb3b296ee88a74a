# -*- coding: utf-8 -*-
"""mesh_io.py

Reading and writing of meshes. Wavefront OBJ (v and f records) is the exchange format of the pipeline; ASCII STL is
offered as an export for viewers.

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import logging
import pathlib
from typing import List, Union

import numpy as np

from .errors import MeshError
from .ifs3 import TriMesh

logger = logging.getLogger(__name__)

PathLike = Union[str, pathlib.Path]


def load_obj(path: PathLike) -> TriMesh:
    """Loads a mesh from a Wavefront OBJ file.

    Note:
        Only v and f records are read. Faces with more than three corners are fan-triangulated around their first
        corner. Texture and normal references in face corners (1/2/3) are ignored, as are all other records.

    Args:
        path: The file to read.

    Returns:
        The mesh, with 0-based face indices."""
    vertices = []  # type: List[List[float]]
    faces = []  # type: List[List[int]]
    try:
        with open(str(path), 'r') as f:
            lines = f.readlines()
    except OSError as e:
        raise MeshError('cannot read {}: {}'.format(path, e))
    for number, line in enumerate(lines, start=1):
        fields = line.split()
        if not fields:
            continue
        if fields[0] == 'v':
            if len(fields) < 4:
                raise MeshError('{}:{}: vertex record needs three coordinates'.format(path, number))
            try:
                vertices.append([float(value) for value in fields[1:4]])
            except ValueError:
                raise MeshError('{}:{}: malformed vertex record'.format(path, number))
        elif fields[0] == 'f':
            if len(fields) < 4:
                raise MeshError('{}:{}: face record needs at least three corners'.format(path, number))
            try:
                corners = [_corner_index(value, len(vertices)) for value in fields[1:]]
            except ValueError:
                raise MeshError('{}:{}: malformed face record'.format(path, number))
            # Fan.
            for i in range(2, len(corners)):
                faces.append([corners[0], corners[i - 1], corners[i]])
    if len(vertices) == 0:
        raise MeshError('{} contains no vertices'.format(path))
    face_array = np.array(faces, dtype=np.int64).reshape(-1, 3)
    if len(face_array) > 0 and (face_array.min() < 0 or face_array.max() >= len(vertices)):
        raise MeshError('{}: face index out of range for {} vertices'.format(path, len(vertices)))
    logger.debug('Loaded %s: %d vertices, %d faces', path, len(vertices), len(face_array))
    return TriMesh(vertices, face_array)


def _corner_index(field: str, vertex_count: int) -> int:
    index = int(field.split('/')[0])
    if index < 0:
        # Relative index.
        return vertex_count + index
    return index - 1


def save_obj(mesh: TriMesh, path: PathLike) -> None:
    """Writes a mesh as Wavefront OBJ with six decimal places per coordinate.

    Args:
        mesh: The mesh to write.
        path: The destination file."""
    lines = ['v {:.6f} {:.6f} {:.6f}\n'.format(*v) for v in mesh.vertices]
    lines += ['f {} {} {}\n'.format(a + 1, b + 1, c + 1) for a, b, c in mesh.faces]
    try:
        with open(str(path), 'w') as f:
            f.writelines(lines)
    except OSError as e:
        raise MeshError('cannot write {}: {}'.format(path, e))


def save_stl(mesh: TriMesh, path: PathLike) -> None:
    """Writes a mesh as ASCII STL with per-face normals.

    Args:
        mesh: The mesh to write.
        path: The destination file."""
    import stl
    data = np.zeros(mesh.face_count, dtype=stl.mesh.Mesh.dtype)
    triangles = mesh.vertices[mesh.faces]
    normals = np.cross(triangles[:, 1] - triangles[:, 0], triangles[:, 2] - triangles[:, 0])
    lengths = np.linalg.norm(normals, axis=1, keepdims=True)
    data['vectors'] = triangles
    data['normals'] = normals / np.where(lengths > 0.0, lengths, 1.0)
    stl_mesh = stl.mesh.Mesh(data)
    try:
        stl_mesh.save(str(path), mode=stl.Mode.ASCII, update_normals=False)
    except OSError as e:
        raise MeshError('cannot write {}: {}'.format(path, e))
