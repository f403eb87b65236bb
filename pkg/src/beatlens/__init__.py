"""Model reliability workbench for fixed-length beat classifiers.

Train a small 1D convolutional classifier, explain its predictions by
nearest training neighbors in the learned embedding space, probe it with
semantic signal edits, and compare against a perturbation saliency
baseline. The HTTP service and web UI sit on top of these pieces.
"""

from .signals import (
    Beat,
    ClassLabel,
    Dataset,
    Region,
    Transformation,
    TransformKind,
    apply_transformation,
)

__version__ = "0.1.0"

__all__ = [
    "Beat",
    "ClassLabel",
    "Dataset",
    "Region",
    "TransformKind",
    "Transformation",
    "apply_transformation",
    "__version__",
]
