# -*- coding: utf-8 -*-
"""config.py

Configuration models. The tailor configuration holds the cutting plane search parameters and the per-part sampling
ranges; the pipeline configuration wires file locations and numeric defaults for the command line front end.

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import json
import logging
import pathlib
from typing import Dict, Optional, Tuple, Union

import pydantic
from pydantic import BaseModel, ConfigDict, Field

from .errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_TAILOR_CONFIG = pathlib.Path(__file__).parent / 'data' / 'tailor_config.json'


class TailorConfig(BaseModel):
    """Parameters of the two-stage cutting plane search.

    Attributes:
        part_ranges: Stage-2 sampling range per part label, as fractions of the part's axial extent.
        default_range: Range used for parts missing from part_ranges.
        cap_half_angle_deg: Half-angle of the cone of normals searched in stage 1.
        azimuth_steps: Coarse grid size around the axis.
        tilt_steps: Coarse grid size away from the axis.
        refinements: Number of step halvings after the coarse grid.
        cut_samples: Number of cut points sampled in stage 2.
        interface_offset: Shift applied to interface planes toward the part center, as a fraction of the part length.
        polish: If the stage-1 result is refined by a local simplex search after the grid halvings.
        tie_tolerance: Relative perimeter difference below which stage-2 samples count as tied.
        frame_check_ratio: Minimum ratio of the y-extent to the other extents before measure_body warns."""
    model_config = ConfigDict(frozen=True, extra='forbid')

    part_ranges: Dict[str, Tuple[float, float]] = Field(default_factory=dict)
    default_range: Tuple[float, float] = (0.1, 0.9)
    cap_half_angle_deg: float = Field(45.0, gt=0.0, le=90.0)
    azimuth_steps: int = Field(16, ge=1)
    tilt_steps: int = Field(8, ge=1)
    refinements: int = Field(2, ge=0)
    cut_samples: int = Field(32, ge=1)
    interface_offset: float = Field(1e-5, ge=0.0, lt=0.5)
    polish: bool = True
    tie_tolerance: float = Field(1e-7, ge=0.0)
    frame_check_ratio: float = Field(1.2, gt=0.0)

    @pydantic.field_validator('part_ranges')
    @classmethod
    def _check_ranges(cls, value: Dict[str, Tuple[float, float]]) -> Dict[str, Tuple[float, float]]:
        for label, (lo, hi) in value.items():
            if not 0.0 <= lo <= hi <= 1.0:
                raise ValueError('range for {} must satisfy 0 <= lo <= hi <= 1, got [{}, {}]'.format(label, lo, hi))
        return value

    def range_for(self, label: str) -> Tuple[float, float]:
        return self.part_ranges.get(label, self.default_range)

    @staticmethod
    def load(path: Optional[Union[str, pathlib.Path]] = None) -> 'TailorConfig':
        """Loads a tailor configuration.

        Args:
            path: JSON file to read. The packaged defaults are used when None.

        Returns:
            The validated configuration."""
        path = DEFAULT_TAILOR_CONFIG if path is None else pathlib.Path(path)
        return _load_model(TailorConfig, path)


class PipelineConfig(BaseModel):
    """Locations and defaults shared by the command line sub-commands."""
    model_config = ConfigDict(extra='forbid')

    corpus_dir: Optional[str] = None
    model_path: Optional[str] = None
    map_path: Optional[str] = None
    output_dir: str = 'results'
    tailor_config: Optional[str] = None
    k: int = Field(4, ge=1)
    map_ridge: float = Field(0.0, ge=0.0)
    regressor_ridge: float = Field(1.0, gt=0.0)
    epsilon: float = Field(0.1, gt=0.0, le=1.0)
    seed: int = 0
    jobs: int = Field(1, ge=1)

    def tailor(self) -> TailorConfig:
        return TailorConfig.load(self.tailor_config)

    @staticmethod
    def load(path: Optional[Union[str, pathlib.Path]] = None) -> 'PipelineConfig':
        if path is None:
            return PipelineConfig()
        return _load_model(PipelineConfig, pathlib.Path(path))


def _load_model(cls, path: pathlib.Path):
    try:
        with open(str(path), 'r') as f:
            document = json.load(f)
    except OSError as e:
        raise ConfigError('cannot read configuration {}: {}'.format(path, e))
    except json.JSONDecodeError as e:
        raise ConfigError('configuration {} is not valid JSON: {}'.format(path, e))
    try:
        config = cls.model_validate(document)
    except pydantic.ValidationError as e:
        raise ConfigError('configuration {} is invalid: {}'.format(path, e))
    logger.debug('Loaded %s from %s', cls.__name__, path)
    return config
