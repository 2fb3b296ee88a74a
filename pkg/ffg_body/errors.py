# -*- coding: utf-8 -*-
"""errors.py

Exception hierarchy for the body modelling toolkit. Every exception carries the exit code the command line front end
reports when it escapes a command.

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

from typing import Any, Dict, List, Optional


class BodyModelError(Exception):
    """Base class of all toolkit errors.

    Attributes:
        exit_code: The process exit code used by the command line front end."""
    exit_code = 1

    def to_dict(self) -> Dict[str, Any]:
        return {'error': type(self).__name__, 'message': str(self), 'exit_code': self.exit_code}


class ConfigError(BodyModelError):
    """Invalid configuration file or command line arguments."""
    exit_code = 1


class MeshError(BodyModelError):
    """Malformed mesh file or a mesh violating the TriMesh invariants."""
    exit_code = 1


class SegmentationError(BodyModelError):
    """Malformed segmentation document or a segmentation violating its invariants."""
    exit_code = 1


class ModelError(BodyModelError):
    """Shape model or linear map inconsistent with its inputs or its serialized form."""
    exit_code = 1


class SectionError(BodyModelError):
    """A cutting plane produced no usable cross-section."""
    exit_code = 2


class OpenSectionError(SectionError):
    """The plane crossed a boundary of the surface, so a chain of section segments does not close.

    Attributes:
        chain: The points of the partial chain that was found."""
    def __init__(self, message: str, chain: Optional[List[Any]] = None) -> None:
        super().__init__(message)
        self.chain = chain if chain is not None else []


class MeasurementError(BodyModelError):
    """A measurement could not be taken.

    Attributes:
        partial: Whatever was measured before the failure, keyed by part or slot name."""
    exit_code = 2

    def __init__(self, message: str, partial: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.partial = partial if partial is not None else {}


class AssemblyError(BodyModelError):
    """Parts could not be stitched into a body."""
    exit_code = 2


class HumanoidError(BodyModelError):
    """Humanoid parameters do not describe a valid body."""
    exit_code = 2


class RegressorError(BodyModelError):
    """The silhouette regressor was given unusable data."""
    exit_code = 2


class PartialFailureError(BodyModelError):
    """A corpus level command finished but some subjects failed.

    Attributes:
        failures: Subject name to failure message."""
    exit_code = 2

    def __init__(self, message: str, failures: Optional[Dict[str, str]] = None) -> None:
        super().__init__(message)
        self.failures = failures if failures is not None else {}


class InvariantError(BodyModelError):
    """An internal numerical invariant did not hold."""
    exit_code = 3
