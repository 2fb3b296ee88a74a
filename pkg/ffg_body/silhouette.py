# -*- coding: utf-8 -*-
"""silhouette.py

Binary two-view silhouettes of bodies and the width-profile features computed from them. Bodies are projected
orthographically, scaled so the subject's height fills 95% of the image height, centered, and rasterized by testing
every pixel center against the three edges of each projected triangle.

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import enum
import json
import logging
import pathlib
from typing import Optional, Union

import cv2
import numpy as np

from .errors import MeshError, RegressorError
from .ifs3 import TriMesh

logger = logging.getLogger(__name__)

HEIGHT = 480
WIDTH = 200
FILL = 0.95
FEATURES_PER_VIEW = 2 * HEIGHT + 2


class View(enum.Enum):
    FRONTAL = 'frontal'
    LATERAL = 'lateral'

    @property
    def horizontal(self) -> int:
        """Mesh coordinate shown along the image rows: x from the front, z from the side."""
        return 0 if self == View.FRONTAL else 2


class SilhouetteImage(object):
    """A binary silhouette.

    Attributes:
        pixels: (480, 200) uint8 array of 0 and 1, row 0 at the top.
        view: The view it was rendered from.
        mm_per_pixel: Physical size of one pixel."""
    def __init__(self, pixels: np.ndarray, view: View, mm_per_pixel: float) -> None:
        pixels = np.asarray(pixels)
        if pixels.shape != (HEIGHT, WIDTH):
            raise RegressorError('silhouettes are {}x{}, got {}'.format(HEIGHT, WIDTH, pixels.shape))
        if not np.all((pixels == 0) | (pixels == 1)):
            raise RegressorError('silhouette pixels must be 0 or 1')
        if not mm_per_pixel > 0.0:
            raise RegressorError('mm per pixel must be positive, got {}'.format(mm_per_pixel))
        self.pixels = pixels.astype(np.uint8)
        self.pixels.setflags(write=False)
        self.view = view
        self.mm_per_pixel = float(mm_per_pixel)

    @staticmethod
    def blank(view: View, mm_per_pixel: float = 1.0) -> 'SilhouetteImage':
        return SilhouetteImage(np.zeros((HEIGHT, WIDTH), np.uint8), view, mm_per_pixel)


def render_silhouette(mesh: TriMesh, view: Union[View, str], subject_height: Optional[float] = None) -> \
        SilhouetteImage:
    """Renders the binary silhouette of a y-up body.

    Args:
        mesh: The body, facing +z.
        view: frontal (drops z) or lateral (drops x).
        subject_height: Height mapped to 95% of the image height. The mesh's y-extent when None.

    Returns:
        The silhouette."""
    view = View(view)
    if mesh.vertex_count == 0 or mesh.face_count == 0:
        raise MeshError('cannot render an empty mesh')
    if subject_height is None:
        subject_height = float(mesh.extent()[1])
    if not subject_height > 0.0:
        raise MeshError('subject height must be positive, got {}'.format(subject_height))
    scale = FILL * HEIGHT / subject_height
    h = mesh.vertices[:, view.horizontal]
    y = mesh.vertices[:, 1]
    h_center = 0.5 * (h.min() + h.max())
    y_center = 0.5 * (y.min() + y.max())
    points = np.stack([WIDTH * 0.5 + (h - h_center) * scale, HEIGHT * 0.5 - (y - y_center) * scale], axis=1)
    return SilhouetteImage(_rasterize(points[mesh.faces]), view, 1.0 / scale)


def _rasterize(triangles: np.ndarray) -> np.ndarray:
    """Marks every pixel whose center lies inside or on the boundary of a (T, 3, 2) triangle in pixel
    coordinates."""
    screen = np.zeros((HEIGHT, WIDTH), np.uint8)
    a, b, c = triangles[:, 0], triangles[:, 1], triangles[:, 2]
    area = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    lo = np.ceil(triangles.min(axis=1) - 0.5).astype(np.int64)
    hi = np.floor(triangles.max(axis=1) - 0.5).astype(np.int64)
    lo = np.maximum(lo, 0)
    hi = np.minimum(hi, [WIDTH - 1, HEIGHT - 1])
    visible = (area != 0.0) & np.all(hi >= lo, axis=1)
    for t in np.nonzero(visible)[0]:
        cols = np.arange(lo[t, 0], hi[t, 0] + 1) + 0.5
        rows = np.arange(lo[t, 1], hi[t, 1] + 1) + 0.5
        px, py = np.meshgrid(cols, rows)
        sign = np.sign(area[t])
        inside = np.ones(px.shape, dtype=bool)
        for p, q in ((a[t], b[t]), (b[t], c[t]), (c[t], a[t])):
            edge = (q[0] - p[0]) * (py - p[1]) - (q[1] - p[1]) * (px - p[0])
            inside &= sign * edge >= 0.0
        block = screen[lo[t, 1]:hi[t, 1] + 1, lo[t, 0]:hi[t, 0] + 1]
        block[inside] = 1
    return screen


def extract_features(img: SilhouetteImage) -> np.ndarray:
    """Returns the 962 features of one view: 480 row widths, 480 row centroid offsets from the image center, the
    foreground area and the foreground height, all in millimeters."""
    pixels = img.pixels.astype(bool)
    filled = pixels.any(axis=1)
    columns = np.arange(WIDTH)
    widths = np.zeros(HEIGHT)
    offsets = np.zeros(HEIGHT)
    if np.any(filled):
        first = np.argmax(pixels, axis=1)
        last = WIDTH - 1 - np.argmax(pixels[:, ::-1], axis=1)
        widths[filled] = (last[filled] - first[filled] + 1) * img.mm_per_pixel
        counts = pixels.sum(axis=1)
        centroids = (pixels * (columns + 0.5)).sum(axis=1)[filled] / counts[filled]
        offsets[filled] = (centroids - WIDTH * 0.5) * img.mm_per_pixel
        rows = np.nonzero(filled)[0]
        height = (rows[-1] - rows[0] + 1) * img.mm_per_pixel
    else:
        height = 0.0
    area = float(pixels.sum()) * img.mm_per_pixel ** 2
    return np.concatenate([widths, offsets, [area, height]])


def two_view_features(frontal: SilhouetteImage, lateral: SilhouetteImage) -> np.ndarray:
    if frontal.view != View.FRONTAL or lateral.view != View.LATERAL:
        raise RegressorError('expected a frontal and a lateral silhouette, got {} and {}'.format(
            frontal.view.value, lateral.view.value))
    return np.concatenate([extract_features(frontal), extract_features(lateral)])


def body_features(mesh: TriMesh, subject_height: Optional[float] = None) -> np.ndarray:
    """Renders both views of a body and returns their concatenated features."""
    return two_view_features(render_silhouette(mesh, View.FRONTAL, subject_height),
                             render_silhouette(mesh, View.LATERAL, subject_height))


def save_pgm(img: SilhouetteImage, path: Union[str, pathlib.Path]) -> None:
    """Writes a silhouette as an 8-bit PGM, foreground white, and its view and scale to a JSON file beside it."""
    path = pathlib.Path(path)
    if not cv2.imwrite(str(path), img.pixels * np.uint8(255)):
        raise MeshError('cannot write {}'.format(path))
    with open(str(path.with_suffix('.json')), 'w') as f:
        json.dump({'view': img.view.value, 'mm_per_pixel': img.mm_per_pixel}, f)


def load_pgm(path: Union[str, pathlib.Path], view: Optional[Union[View, str]] = None,
             mm_per_pixel: Optional[float] = None) -> SilhouetteImage:
    """Reads a silhouette written by save_pgm. Explicit view and scale override the JSON file beside it."""
    path = pathlib.Path(path)
    pixels = cv2.imread(str(path), cv2.IMREAD_GRAYSCALE)
    if pixels is None:
        raise MeshError('cannot read {}'.format(path))
    meta = {}
    sidecar = path.with_suffix('.json')
    if sidecar.exists():
        with open(str(sidecar), 'r') as f:
            meta = json.load(f)
    view = View(view if view is not None else meta.get('view', View.FRONTAL.value))
    mm_per_pixel = mm_per_pixel if mm_per_pixel is not None else meta.get('mm_per_pixel', 1.0)
    return SilhouetteImage((pixels > 127).astype(np.uint8), view, mm_per_pixel)
