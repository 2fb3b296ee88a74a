# -*- coding: utf-8 -*-
"""tailor.py

Virtual tailor. Circumferences are perimeters of plane sections of a part, found in two stages: for a given cut
point, the plane normal minimizing the perimeter (a tape pulled tight around a limb); over a range of cut points along
the part axis, the point maximizing that minimal perimeter (the widest girth). Lengths come from interface centers.

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.optimize

from .config import TailorConfig
from .errors import MeasurementError, SectionError, SegmentationError
from .ifs3 import TriMesh
from .measurements import SLOTS, MeasurementVector
from .plane3 import CuttingPlane, orthonormal_frame
from .section import CrossSection, Sectioner
from .segmentation import PartLabel, PartMesh, PartSegmentation, extract_part

logger = logging.getLogger(__name__)


class PartMeasurements(object):
    """Tailor measurements of one part.

    Attributes:
        circumference: Girth at the optimized cut, millimeters.
        length: Part length, millimeters.
        interface_circumferences: Neighbor label to the girth at the shared interface.
        plane: The plane the circumference was taken on.
        section: The section on that plane, in the part frame, when kept."""
    def __init__(self, circumference: float, length: float, interface_circumferences: Dict[PartLabel, float],
                 plane: CuttingPlane, section: Optional[CrossSection] = None) -> None:
        self.circumference = circumference
        self.length = length
        self.interface_circumferences = interface_circumferences
        self.plane = plane
        self.section = section

    def as_row(self) -> List[float]:
        """Returns [circumference, length, interface girths...], interfaces in label order."""
        ordered = sorted(self.interface_circumferences, key=lambda label: label.order)
        return [self.circumference, self.length] + [self.interface_circumferences[label] for label in ordered]


def _perimeter(sectioner: Sectioner, plane: CuttingPlane) -> float:
    try:
        return sectioner.perimeter(plane)
    except SectionError:
        return np.inf


def _direction(axis: np.ndarray, u: np.ndarray, v: np.ndarray, tilt: float, azimuth: float) -> np.ndarray:
    return np.cos(tilt) * axis + np.sin(tilt) * (np.cos(azimuth) * u + np.sin(azimuth) * v)


def optimize_normal(part: PartMesh, p_cut: np.ndarray, config: Optional[TailorConfig] = None,
                    hint: Optional[np.ndarray] = None, sectioner: Optional[Sectioner] = None) -> CuttingPlane:
    """Stage 1: the plane through p_cut with the smallest section perimeter.

    Note:
        Normals are searched in a cone around the hint (the part axis by default): a coarse azimuth by tilt grid,
        then step halvings around the best candidate, then optionally a simplex polish. A candidate replaces the best
        only when strictly shorter, so among equal perimeters the hint direction wins.

    Args:
        part: The part.
        p_cut: The cut point, in the part frame.
        config: Search parameters.
        hint: Center of the searched cone of normals.
        sectioner: Prepared sectioner of the part mesh, reused across calls.

    Returns:
        The best plane."""
    config = config or TailorConfig.load()
    sectioner = sectioner or Sectioner(part.mesh)
    axis = np.asarray(part.axis if hint is None else hint, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    u, v = orthonormal_frame(axis)
    cap = np.radians(config.cap_half_angle_deg)
    p_cut = np.asarray(p_cut, dtype=np.float64)
    cache = {}

    def evaluate(tilt: float, azimuth: float) -> float:
        tilt = float(np.clip(tilt, 0.0, cap))
        key = (round(tilt, 12), round(azimuth % (2.0 * np.pi), 12) if tilt > 0.0 else 0.0)
        if key not in cache:
            cache[key] = _perimeter(sectioner, CuttingPlane(p_cut, _direction(axis, u, v, tilt, azimuth)))
        return cache[key]

    best = (evaluate(0.0, 0.0), 0.0, 0.0)
    tilt_step = cap / config.tilt_steps
    azimuth_step = 2.0 * np.pi / config.azimuth_steps
    for j in range(1, config.tilt_steps + 1):
        for i in range(config.azimuth_steps):
            value = evaluate(j * tilt_step, i * azimuth_step)
            if value < best[0]:
                best = (value, j * tilt_step, i * azimuth_step)
    for _ in range(config.refinements):
        tilt_step *= 0.5
        azimuth_step *= 0.5
        _, tilt, azimuth = best
        if tilt == 0.0:
            candidates = [(tilt_step, k * np.pi / 4.0) for k in range(8)]
        else:
            candidates = [(tilt + a * tilt_step, azimuth + b * azimuth_step)
                          for a in (-1, 0, 1) for b in (-1, 0, 1) if (a, b) != (0, 0)]
        for tilt, azimuth in candidates:
            tilt = float(np.clip(tilt, 0.0, cap))
            value = evaluate(tilt, azimuth)
            if value < best[0]:
                best = (value, tilt, azimuth)
    if not np.isfinite(best[0]):
        raise SectionError('no plane through the cut point yields a closed section of {}'.format(part.label.value))
    normal = _direction(axis, u, v, best[1], best[2])
    if config.polish:
        normal = _polish(sectioner, p_cut, normal, axis, cap, best[0])
    return CuttingPlane(p_cut, normal)


def _polish(sectioner: Sectioner, p_cut: np.ndarray, normal: np.ndarray, axis: np.ndarray, cap: float,
            start_value: float) -> np.ndarray:
    u, v = orthonormal_frame(normal)

    def direction(x: np.ndarray) -> np.ndarray:
        n = normal + x[0] * u + x[1] * v
        return n / np.linalg.norm(n)

    def objective(x: np.ndarray) -> float:
        n = direction(x)
        if np.arccos(np.clip(n.dot(axis), -1.0, 1.0)) > cap:
            return start_value * 2.0 + 1.0
        value = _perimeter(sectioner, CuttingPlane(p_cut, n))
        return value if np.isfinite(value) else start_value * 2.0 + 1.0

    result = scipy.optimize.minimize(objective, np.zeros(2), method='Nelder-Mead',
                                     options={'xatol': 1e-9, 'fatol': 1e-12, 'maxfev': 200,
                                              'initial_simplex': np.array([[0.0, 0.0], [0.02, 0.0], [0.0, 0.02]])})
    if result.fun < start_value:
        return direction(result.x)
    return normal


def axial_extent(part: PartMesh) -> Tuple[float, float]:
    """Returns the (lo, hi) projections onto the part axis spanned by the part, lo on the parent side.

    Note:
        With two or more interfaces this is the span of the interface centers; a terminal part spans from its
        interface center to its farthest vertex; a part without interfaces spans all its vertices."""
    centers = [part.interface_center(label) @ part.axis for label in part.interfaces]
    projections = part.vertices @ part.axis
    if len(centers) >= 2:
        return float(min(centers)), float(max(centers))
    if len(centers) == 1:
        # the root's axis points toward its only child, so its far end lies below the interface
        if centers[0] > projections.mean():
            return float(projections.min()), float(centers[0])
        return float(centers[0]), float(projections.max())
    return float(projections.min()), float(projections.max())


def optimize_cut_point(part: PartMesh, plane_normal_hint: Optional[np.ndarray] = None,
                       search_range: Tuple[float, float] = (0.1, 0.9), config: Optional[TailorConfig] = None,
                       sectioner: Optional[Sectioner] = None) -> Tuple[CuttingPlane, CrossSection]:
    """Stage 2: the cut point along the axis maximizing the stage-1 perimeter.

    Args:
        part: The part.
        plane_normal_hint: Center of the stage-1 cone, the part axis by default.
        search_range: Sampled interval as fractions of the axial extent.
        config: Search parameters.
        sectioner: Prepared sectioner of the part mesh.

    Returns:
        The winning plane and its section. Ties within the configured tolerance go to the sample nearest the
        middle of the range."""
    config = config or TailorConfig.load()
    lo, hi = search_range
    if not 0.0 <= lo <= hi <= 1.0:
        raise MeasurementError('search range [{}, {}] is not inside [0, 1]'.format(lo, hi))
    sectioner = sectioner or Sectioner(part.mesh)
    start, stop = axial_extent(part)
    samples = config.cut_samples
    fractions = np.array([lo]) if samples == 1 or lo == hi else np.linspace(lo, hi, samples)
    planes = []
    values = []
    for fraction in fractions:
        p_cut = part.axis * (start + fraction * (stop - start))
        try:
            plane = optimize_normal(part, p_cut, config, plane_normal_hint, sectioner)
            values.append(sectioner.perimeter(plane))
            planes.append(plane)
        except SectionError:
            values.append(-np.inf)
            planes.append(None)
    values = np.array(values)
    if not np.any(np.isfinite(values)):
        raise MeasurementError('no cut point of {} yields a valid section'.format(part.label.value))
    best = values.max()
    tied = np.nonzero(values >= best - config.tie_tolerance * abs(best))[0]
    middle = 0.5 * (lo + hi)
    winner = int(tied[np.argmin(np.abs(fractions[tied] - middle))])
    plane = planes[winner]
    return plane, sectioner.section(plane)


def part_length(part: PartMesh) -> float:
    """Returns the distance between the interface centers of a two-interface part, the axial span of the
    interface centers for junction parts, and the axial distance from the interface center to the farthest vertex for
    terminal parts."""
    labels = list(part.interfaces)
    if len(labels) == 0:
        raise MeasurementError('part {} has no interface to measure its length from'.format(part.label.value))
    if len(labels) == 2:
        length = float(np.linalg.norm(part.interface_center(labels[0]) - part.interface_center(labels[1])))
    else:
        lo, hi = axial_extent(part)
        length = hi - lo
    if length <= 1e-9:
        logger.warning('part %s is degenerate along its axis, length %.3g', part.label.value, length)
        return 0.0
    return length


def interface_circumference(part: PartMesh, neighbor: PartLabel, config: Optional[TailorConfig] = None,
                            sectioner: Optional[Sectioner] = None) -> float:
    """Returns the girth at the interface shared with neighbor.

    Note:
        The plane is the best-fit plane of the interface points, moved toward the part center by
        config.interface_offset times the part length so it crosses edges next to the interface ring rather than
        its vertices."""
    config = config or TailorConfig.load()
    points = part.interface_points(neighbor)
    plane = CuttingPlane.fit(points)
    inward = -plane.point
    if inward.dot(plane.normal) < 0.0:
        plane = plane.flipped()
    lo, hi = axial_extent(part)
    scale = hi - lo if hi > lo else float(np.max(np.linalg.norm(points - plane.point, axis=1)))
    plane = plane.moved(config.interface_offset * scale)
    sectioner = sectioner or Sectioner(part.mesh)
    return sectioner.section(plane).perimeter


def measure_part(part: PartMesh, config: Optional[TailorConfig] = None) -> PartMeasurements:
    config = config or TailorConfig.load()
    sectioner = Sectioner(part.mesh)
    plane, section = optimize_cut_point(part, None, config.range_for(part.label.value), config, sectioner)
    interfaces = {label: interface_circumference(part, label, config, sectioner) for label in part.interfaces}
    measured = PartMeasurements(section.perimeter, part_length(part), interfaces, plane, section)
    logger.debug('%s: circumference %.2f, length %.2f', part.label.value, measured.circumference, measured.length)
    return measured


def measure_parts(mesh: TriMesh, seg: PartSegmentation, config: Optional[TailorConfig] = None) -> \
        Dict[PartLabel, PartMeasurements]:
    """Measures every part, collecting failures.

    Raises MeasurementError carrying the successful parts when any part fails."""
    config = config or TailorConfig.load()
    measured = {}
    failures = {}
    for label in seg.labels:
        try:
            measured[label] = measure_part(extract_part(mesh, seg, label), config)
        except (SectionError, MeasurementError, SegmentationError) as e:
            failures[label.value] = str(e)
    if failures:
        raise MeasurementError('{} parts failed: {}'.format(len(failures), failures), partial=measured)
    return measured


def _check_frame(mesh: TriMesh, config: TailorConfig) -> None:
    extent = mesh.extent()
    if extent[1] < config.frame_check_ratio * max(extent[0], extent[2]):
        logger.warning('mesh y-extent %.1f is not dominant (x %.1f, z %.1f); the body is probably not in the '
                       'y-up frame and height will be wrong', extent[1], extent[0], extent[2])


def measure_body(mesh: TriMesh, seg: PartSegmentation, config: Optional[TailorConfig] = None) -> MeasurementVector:
    """Computes the 34-slot measurement vector of a body in the y-up frame.

    Args:
        mesh: The body.
        seg: Its 17-part segmentation.
        config: Tailor parameters.

    Returns:
        The measurement vector."""
    return measure_body_detailed(mesh, seg, config)[0]


def measure_body_detailed(mesh: TriMesh, seg: PartSegmentation, config: Optional[TailorConfig] = None) -> \
        Tuple[MeasurementVector, Dict[PartLabel, PartMeasurements]]:
    config = config or TailorConfig.load()
    missing = [label.value for label in PartLabel if label not in seg.parts]
    if missing:
        raise MeasurementError('measuring a body needs all 17 parts, missing {}'.format(', '.join(missing)))
    _check_frame(mesh, config)
    parts = measure_parts(mesh, seg, config)
    return assemble_vector(mesh, seg, parts), parts


def assemble_vector(mesh: TriMesh, seg: PartSegmentation, parts: Dict[PartLabel, PartMeasurements]) -> \
        MeasurementVector:
    """Arranges part measurements into the slot order."""
    values = {
        'head_circumference': parts[PartLabel.HEAD].circumference,
        'neck_circumference': parts[PartLabel.NECK].circumference,
        'chest_circumference': parts[PartLabel.UPPER_TORSO].circumference,
        'waist_circumference': parts[PartLabel.LOWER_TORSO].circumference,
        'pelvis_circumference': parts[PartLabel.PELVIS].circumference,
        'shoulder_crotch_length': sum(parts[label].length for label in (PartLabel.UPPER_TORSO,
                                                                       PartLabel.LOWER_TORSO, PartLabel.PELVIS)),
        'overall_height': float(mesh.extent()[1]),
        'head_length': parts[PartLabel.HEAD].length,
        'neck_length': parts[PartLabel.NECK].length,
    }
    arm_centers = []
    for side, name in (('l', 'left'), ('r', 'right')):
        upper_arm, lower_arm, hand = (PartLabel('{}-{}'.format(name, p)) for p in ('upper-arm', 'lower-arm', 'hand'))
        upper_leg, lower_leg, foot = (PartLabel('{}-{}'.format(name, p)) for p in ('upper-leg', 'lower-leg', 'foot'))
        values['bicep_circumference_' + side] = parts[upper_arm].circumference
        values['forearm_circumference_' + side] = parts[lower_arm].circumference
        values['wrist_circumference_' + side] = parts[lower_arm].interface_circumferences[hand]
        values['hand_circumference_' + side] = parts[hand].circumference
        values['thigh_circumference_' + side] = parts[upper_leg].circumference
        values['calf_circumference_' + side] = parts[lower_leg].circumference
        values['ankle_circumference_' + side] = parts[lower_leg].interface_circumferences[foot]
        values['foot_circumference_' + side] = parts[foot].circumference
        values['arm_length_' + side] = parts[upper_arm].length + parts[lower_arm].length + parts[hand].length
        values['inside_leg_length_' + side] = parts[upper_leg].length + parts[lower_leg].length + parts[foot].length
        values['hand_length_' + side] = parts[hand].length
        values['foot_length_' + side] = parts[foot].length
        arm_centers.append(mesh.vertices[seg.interface(PartLabel.UPPER_TORSO, upper_arm)].mean(axis=0))
    values['shoulder_breadth'] = float(np.linalg.norm(arm_centers[0] - arm_centers[1]))
    vector = MeasurementVector(values)
    bad = [name for name, value in zip(SLOTS, vector.values) if not value > 0.0]
    if bad:
        raise MeasurementError('non-positive measurements: {}'.format(', '.join(bad)), partial=vector.to_dict())
    return vector
