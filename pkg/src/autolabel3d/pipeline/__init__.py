"""Dataset formats, pipeline orchestration, synthetic scenes, and the
review service."""

from .annotate import AnnotateConfig, AnnotateResult, annotate_image
from .annotations import (
    AnnotationRecord,
    AnnotationSet,
    ImageInfo,
    atomic_write_json,
    load_annotations,
    save_annotations,
)
from .manifest import (
    FilterConfig,
    FilterDecision,
    ImageManifest,
    ObjectManifest,
    RenderSettings,
    filter_instance,
    load_correspondences,
    load_manifest,
    save_correspondences,
    save_manifest,
)
from .service import ReviewStore, create_app, serve_review
from .synthetic import (
    SynthConfig,
    SyntheticObject,
    SyntheticScene,
    box_mesh,
    cylinder_mesh,
    generate_synthetic_scene,
    sphere_mesh,
    write_scene,
)

__all__ = [
    "AnnotateConfig",
    "AnnotateResult",
    "annotate_image",
    "AnnotationRecord",
    "AnnotationSet",
    "ImageInfo",
    "atomic_write_json",
    "load_annotations",
    "save_annotations",
    "FilterConfig",
    "FilterDecision",
    "ImageManifest",
    "ObjectManifest",
    "RenderSettings",
    "filter_instance",
    "load_correspondences",
    "load_manifest",
    "save_correspondences",
    "save_manifest",
    "ReviewStore",
    "create_app",
    "serve_review",
    "SynthConfig",
    "SyntheticObject",
    "SyntheticScene",
    "box_mesh",
    "cylinder_mesh",
    "generate_synthetic_scene",
    "sphere_mesh",
    "write_scene",
]
