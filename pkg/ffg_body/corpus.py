# -*- coding: utf-8 -*-
"""corpus.py

On-disk body corpora: one OBJ per subject, one segmentation shared by all subjects, an optional ground-truth
measurement table, and a manifest tying them together.

    corpus/
        manifest.json
        segmentation.json
        ground_truth.csv
        body_0000.obj
        ...

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import json
import logging
import pathlib
from typing import Dict, Iterable, List, Optional, Sequence, Union

from .errors import ConfigError
from .ifs3 import TriMesh
from .measurements import MeasurementVector, read_csv, write_csv
from .mesh_io import load_obj, save_obj
from .segmentation import PartSegmentation, load_segmentation, save_segmentation

logger = logging.getLogger(__name__)

MANIFEST = 'manifest.json'
SEGMENTATION = 'segmentation.json'
GROUND_TRUTH = 'ground_truth.csv'


class Corpus(object):
    """A corpus directory.

    Attributes:
        root: The directory.
        names: Subject names in manifest order.
        segmentation: The segmentation shared by every subject."""
    def __init__(self, root: pathlib.Path, names: List[str], segmentation: PartSegmentation,
                 truth: Optional[Dict[str, MeasurementVector]] = None) -> None:
        self.root = root
        self.names = names
        self.segmentation = segmentation
        self.__truth = truth if truth is not None else {}

    def __len__(self) -> int:
        return len(self.names)

    def mesh_path(self, name: str) -> pathlib.Path:
        return self.root / '{}.obj'.format(name)

    def mesh(self, name: str) -> TriMesh:
        return load_obj(self.mesh_path(name))

    def meshes(self) -> Iterable[TriMesh]:
        for name in self.names:
            yield self.mesh(name)

    def truth(self, name: str) -> Optional[MeasurementVector]:
        return self.__truth.get(name)

    @property
    def has_truth(self) -> bool:
        return all(name in self.__truth for name in self.names)

    @staticmethod
    def load(root: Union[str, pathlib.Path]) -> 'Corpus':
        """Reads a corpus manifest, its segmentation and, when present, its ground truth."""
        root = pathlib.Path(root)
        try:
            with open(str(root / MANIFEST), 'r') as f:
                manifest = json.load(f)
            names = [str(name) for name in manifest['subjects']]
        except (OSError, ValueError, KeyError, TypeError) as e:
            raise ConfigError('{} is not a corpus directory: {!r}'.format(root, e))
        segmentation = load_segmentation(root / manifest.get('segmentation', SEGMENTATION))
        truth = {}
        truth_path = root / manifest.get('ground_truth', GROUND_TRUTH)
        if truth_path.exists():
            subjects, vectors = read_csv(truth_path)
            truth = {subject: vector for subject, vector in zip(subjects, vectors) if subject is not None}
        logger.info('Corpus %s: %d subjects, ground truth for %d', root, len(names), len(truth))
        return Corpus(root, names, segmentation, truth)


def write_corpus(root: Union[str, pathlib.Path], meshes: Sequence[TriMesh], segmentation: PartSegmentation,
                 truth: Optional[Sequence[MeasurementVector]] = None, prefix: str = 'body') -> Corpus:
    """Writes meshes, their shared segmentation and optional ground truth as a corpus.

    Args:
        root: Target directory, created when missing.
        meshes: Subject meshes, all on the segmentation's topology.
        segmentation: The shared segmentation.
        truth: Ground-truth measurements per mesh.
        prefix: Subject name prefix; subjects are named prefix_0000, prefix_0001, ...

    Returns:
        The written corpus."""
    root = pathlib.Path(root)
    root.mkdir(parents=True, exist_ok=True)
    names = ['{}_{:04d}'.format(prefix, i) for i in range(len(meshes))]
    for name, mesh in zip(names, meshes):
        save_obj(mesh, root / '{}.obj'.format(name))
    save_segmentation(segmentation, root / SEGMENTATION)
    manifest = {'subjects': names, 'segmentation': SEGMENTATION}
    if truth is not None:
        write_csv(root / GROUND_TRUTH, truth, names)
        manifest['ground_truth'] = GROUND_TRUTH
    with open(str(root / MANIFEST), 'w') as f:
        json.dump(manifest, f, indent=2)
    logger.info('Wrote %d subjects to %s', len(names), root)
    return Corpus(root, names, segmentation, dict(zip(names, truth)) if truth is not None else None)
