# -*- coding: utf-8 -*-
"""ffg_body

Part-based statistical body shape modelling: a 17-part shape model with per-part PCA, stitching of parts into
watertight bodies, tape-style measurement of meshes by optimized planar cuts, linear maps from measurements to shape,
synthetic humanoids with known dimensions, and a silhouette regressor.

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

from ffg_body.assembler import RigidTransform, StitchReport, procrustes_align, stitch_body, stitch_deformation
from ffg_body.config import PipelineConfig, TailorConfig
from ffg_body.errors import BodyModelError
from ffg_body.generator import Generator, HumanoidParams, PartProfile, generate_humanoid, sample_population
from ffg_body.ifs3 import TriMesh, validate
from ffg_body.measurements import SLOTS, MeasurementVector
from ffg_body.mesh_io import load_obj, save_obj, save_stl
from ffg_body.plane3 import CuttingPlane
from ffg_body.regressor import RegressorModel, evaluate, predict_measurements, train_regressor
from ffg_body.section import CrossSection, cross_section
from ffg_body.segmentation import PartLabel, PartMesh, PartSegmentation, extract_part, load_segmentation
from ffg_body.semantic_map import LinearMap, MappingDataset, build_mapping_dataset, edit_body, fit_linear_map, \
    generate_population, measurements_to_coeffs, reconstruct_body
from ffg_body.shape_model import BodyShapeModel, PartPCA, ShapeCoeffs, fit_body_model, fit_part_pca, project_part, \
    synthesize_part
from ffg_body.silhouette import SilhouetteImage, View, extract_features, render_silhouette
from ffg_body.tailor import interface_circumference, measure_body, optimize_cut_point, optimize_normal, part_length
