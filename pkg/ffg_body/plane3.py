# -*- coding: utf-8 -*-
"""plane3.py

Representation of a directed cutting plane in 3D, given by a point on the plane and a unit normal.

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

from typing import Iterable, Tuple

import numpy as np

from .errors import InvariantError, MeasurementError


class CuttingPlane(object):
    def __init__(self, point: Iterable[float], normal: Iterable[float]) -> None:
        point = np.array(point, dtype=np.float64).reshape(3)
        normal = np.array(normal, dtype=np.float64).reshape(3)
        length = np.linalg.norm(normal)
        if not np.isfinite(length) or length == 0.0:
            raise InvariantError('cutting plane normal must be a nonzero finite vector')
        point.setflags(write=False)
        normal = normal / length
        normal.setflags(write=False)
        self.__point = point
        self.__normal = normal

    @property
    def point(self) -> np.ndarray:
        return self.__point

    @property
    def normal(self) -> np.ndarray:
        return self.__normal

    @property
    def w(self) -> float:
        return float(self.__normal.dot(self.__point))

    def flipped(self) -> 'CuttingPlane':
        return CuttingPlane(self.__point, -self.__normal)

    def moved(self, offset: float) -> 'CuttingPlane':
        return CuttingPlane(self.__point + offset * self.__normal, self.__normal)

    def distance(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points) - self.__point) @ self.__normal

    def coplanar(self, points: np.ndarray, epsilon: float = 0.000001) -> bool:
        return bool(np.all(np.abs(self.distance(points)) < epsilon))

    def transformed(self, rotation: np.ndarray, translation: np.ndarray) -> 'CuttingPlane':
        return CuttingPlane(rotation @ self.__point + translation, rotation @ self.__normal)

    def to_dict(self) -> dict:
        return {'point': self.__point.tolist(), 'normal': self.__normal.tolist()}

    @staticmethod
    def fit(points: np.ndarray, collinear_ratio: float = 1e-6) -> 'CuttingPlane':
        """Least-squares plane through a point set.

        Args:
            points: (N, 3) points, N >= 3.
            collinear_ratio: Smallest accepted ratio of the second to the first singular value.

        Returns:
            The plane through the centroid whose normal is the direction of least spread. Raises MeasurementError
            when the points are collinear, as the plane is then undetermined."""
        centered, centroid = _centered(points)
        if len(centered) < 3:
            raise MeasurementError('a plane needs at least three points, got {}'.format(len(centered)))
        _, s, vt = np.linalg.svd(centered, full_matrices=False)
        if s[0] == 0.0 or s[1] <= collinear_ratio * s[0]:
            raise MeasurementError('points are collinear, plane is undetermined')
        return CuttingPlane(centroid, vt[2])


def _centered(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    centroid = points.mean(axis=0) if len(points) > 0 else np.zeros(3)
    return points - centroid, centroid


def orthonormal_frame(axis: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Returns two unit vectors completing axis to a right-handed orthonormal frame.

    Note:
        The first vector is the projection of whichever world axis is least aligned with the input, so the frame is
        a deterministic function of the axis."""
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    helper = np.eye(3)[int(np.argmin(np.abs(axis)))]
    u = helper - helper.dot(axis) * axis
    u /= np.linalg.norm(u)
    v = np.cross(axis, u)
    return u, v
