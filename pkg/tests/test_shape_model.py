# -*- coding: utf-8 -*-
"""test_shape_model.py

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import json

import numpy as np
import pytest

from conftest import toy_body
from ffg_body.errors import ModelError
from ffg_body.ifs3 import TriMesh
from ffg_body.segmentation import PartLabel, extract_part
from ffg_body.shape_model import ShapeCoeffs, explained_variance, fit_body_model, fit_part_pca, load_model, \
    project_part, save_model, synthesize_part


@pytest.fixture
def toy_corpus():
    base, seg = toy_body()
    rng = np.random.default_rng(11)
    meshes = [TriMesh(base.vertices + rng.normal(scale=2.0, size=base.vertices.shape), base.faces)
              for _ in range(6)]
    return meshes, seg


def test_full_rank_reconstruction(toy_corpus):
    meshes, seg = toy_corpus
    samples = [extract_part(mesh, seg, PartLabel.LOWER_TORSO) for mesh in meshes]
    pca = fit_part_pca(samples, k=len(samples) - 1)
    for sample in samples:
        rebuilt = synthesize_part(pca, project_part(pca, sample.vertices))
        np.testing.assert_allclose(rebuilt, sample.vertices, atol=1e-8)


def test_components_and_eigenvalues(toy_corpus):
    meshes, seg = toy_corpus
    pca = fit_part_pca([extract_part(mesh, seg, PartLabel.PELVIS) for mesh in meshes], k=3)
    np.testing.assert_allclose(pca.components.T @ pca.components, np.eye(3), atol=1e-10)
    assert np.all(np.diff(pca.eigenvalues) <= 0.0)
    assert np.all(pca.eigenvalues >= 0.0)
    ratios = explained_variance(pca)
    assert 0.0 < ratios.sum() <= 1.0 + 1e-12
    rows = np.argmax(np.abs(pca.components), axis=0)
    assert np.all(pca.components[rows, np.arange(3)] > 0.0)


def test_mean_is_zero_coefficients(toy_corpus):
    meshes, seg = toy_corpus
    samples = [extract_part(mesh, seg, PartLabel.PELVIS) for mesh in meshes]
    pca = fit_part_pca(samples, k=2)
    np.testing.assert_allclose(synthesize_part(pca, np.zeros(2)).reshape(-1), pca.mean)
    np.testing.assert_allclose(project_part(pca, pca.mean), 0.0, atol=1e-9)


@pytest.mark.parametrize('k', [0, 6])
def test_component_count_bounds(toy_corpus, k):
    meshes, seg = toy_corpus
    with pytest.raises(ModelError):
        fit_part_pca([extract_part(mesh, seg, PartLabel.PELVIS) for mesh in meshes], k=k)


def test_single_sample(toy_corpus):
    meshes, seg = toy_corpus
    with pytest.raises(ModelError):
        fit_part_pca([extract_part(meshes[0], seg, PartLabel.PELVIS)], k=1)


def test_coefficient_shape(toy_corpus):
    meshes, seg = toy_corpus
    pca = fit_part_pca([extract_part(mesh, seg, PartLabel.PELVIS) for mesh in meshes], k=2)
    with pytest.raises(ModelError):
        synthesize_part(pca, [1.0, 2.0, 3.0])
    with pytest.raises(ModelError):
        project_part(pca, np.zeros((5, 3)))


def test_body_model(toy_corpus):
    meshes, seg = toy_corpus
    model = fit_body_model(meshes, seg, k=3)
    assert model.coefficient_count() == 6
    coeffs = model.project(extract_part(meshes[2], seg, label) for label in seg.labels)
    assert coeffs.as_vector().shape == (6,)
    parts = model.synthesize(model.zero_coeffs())
    assert [part.label for part in parts] == seg.labels
    with pytest.raises(ModelError):
        ShapeCoeffs({PartLabel.PELVIS: np.array([np.nan])})


def test_save_and_load(tmp_path, toy_corpus):
    meshes, seg = toy_corpus
    model = fit_body_model(meshes, seg, k=2)
    path = tmp_path / 'model.json'
    save_model(model, path)
    loaded = load_model(path, seg)
    for label in seg.labels:
        np.testing.assert_allclose(loaded.parts[label].components, model.parts[label].components)
        np.testing.assert_allclose(loaded.parts[label].eigenvalues, model.parts[label].eigenvalues)
    np.testing.assert_array_equal(loaded.faces, model.faces)
    np.testing.assert_allclose(loaded.root_center, model.root_center)


def test_tampered_model(tmp_path, toy_corpus):
    meshes, seg = toy_corpus
    path = tmp_path / 'model.json'
    save_model(fit_body_model(meshes, seg, k=2), path)
    document = json.loads(path.read_text())
    document['root_center'][0] += 1.0
    path.write_text(json.dumps(document))
    with pytest.raises(ModelError):
        load_model(path)


def test_model_segmentation_mismatch(tmp_path, toy_corpus):
    meshes, seg = toy_corpus
    path = tmp_path / 'model.json'
    save_model(fit_body_model(meshes, seg, k=2), path)
    _, other = toy_body(n=16)
    with pytest.raises(ModelError):
        load_model(path, other)


def test_model_needs_two_bodies(toy_corpus):
    meshes, seg = toy_corpus
    with pytest.raises(ModelError):
        fit_body_model(meshes[:1], seg)


def test_unreadable_model(tmp_path):
    path = tmp_path / 'model.json'
    path.write_text('{not json')
    with pytest.raises(ModelError):
        load_model(path)
