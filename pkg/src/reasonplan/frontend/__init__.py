from .frontend import (
    ProjectedFeatures,
    anyres_partition,
    encode_context,
    encode_grid,
    frontend_features,
    init_frontend_params,
    project,
    resize_nearest,
)

__all__ = [
    "ProjectedFeatures", "anyres_partition", "encode_context", "encode_grid",
    "frontend_features", "init_frontend_params", "project", "resize_nearest",
]
