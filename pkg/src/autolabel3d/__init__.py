"""autolabel3d: geometry engine, evaluation harness, and review service for
3D bounding-box auto-labeling.

Converts externally supplied depth maps, masks, meshes, and pixel
correspondences into metric, gravity-aligned 3D box annotations, and
scores predictions with standard and scale-normalized 3D detection
metrics.
"""

from . import boxfit, depth_align, depthio, errors, geometry, meshio, metrics, pipeline, pose, rasterizer

__version__ = "0.1.0"

__all__ = [
    "boxfit",
    "depth_align",
    "depthio",
    "errors",
    "geometry",
    "meshio",
    "metrics",
    "pipeline",
    "pose",
    "rasterizer",
    "__version__",
]
