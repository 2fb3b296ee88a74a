# -*- coding: utf-8 -*-
"""test_mesh_io.py

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import numpy as np
import pytest

from conftest import tetrahedron
from ffg_body.errors import MeshError
from ffg_body.mesh_io import load_obj, save_obj, save_stl


def test_obj_round_trip(tmp_path, cylinder):
    path = tmp_path / 'cylinder.obj'
    save_obj(cylinder, path)
    loaded = load_obj(path)
    np.testing.assert_allclose(loaded.vertices, cylinder.vertices, atol=1e-6)
    np.testing.assert_array_equal(loaded.faces, cylinder.faces)


def test_quads_and_corner_references(tmp_path):
    path = tmp_path / 'quad.obj'
    path.write_text('# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\n')
    mesh = load_obj(path)
    np.testing.assert_array_equal(mesh.faces, [[0, 1, 2], [0, 2, 3]])


def test_relative_indices(tmp_path):
    path = tmp_path / 'relative.obj'
    path.write_text('v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n')
    np.testing.assert_array_equal(load_obj(path).faces, [[0, 1, 2]])


@pytest.mark.parametrize('text', [
    'v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n',
    'v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n',
    'v 0 0\n',
    'v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2\n',
    'v 0 0 x\n',
    '# nothing here\n',
])
def test_malformed_obj(tmp_path, text):
    path = tmp_path / 'bad.obj'
    path.write_text(text)
    with pytest.raises(MeshError):
        load_obj(path)


def test_missing_file(tmp_path):
    with pytest.raises(MeshError):
        load_obj(tmp_path / 'absent.obj')


def test_stl_export(tmp_path):
    path = tmp_path / 'tetra.stl'
    save_stl(tetrahedron(), path)
    text = path.read_text()
    assert text.startswith('solid')
    assert text.count('facet normal') == 4
