"""Python bindings for the lesionkit C++ library.

Arrays are indexed [x, y, z]; spacing and origin are in millimetres.
"""

from ._lesionkit import (
    GeometryMismatch,
    NiftiError,
    cross_entropy_loss,
    dice_score,
    evaluate_case,
    filter_min_size,
    generate_phantom,
    label_components,
    min_voxels_for_volume,
    percentile,
    poly_lr,
    read_mask,
    read_volume,
    resample,
    run_cli,
    soft_dice_grad,
    soft_dice_loss,
    write_mask,
    write_volume,
)

__all__ = [
    "GeometryMismatch",
    "NiftiError",
    "cross_entropy_loss",
    "dice_score",
    "evaluate_case",
    "filter_min_size",
    "generate_phantom",
    "label_components",
    "min_voxels_for_volume",
    "percentile",
    "poly_lr",
    "read_mask",
    "read_volume",
    "resample",
    "run_cli",
    "soft_dice_grad",
    "soft_dice_loss",
    "write_mask",
    "write_volume",
]
