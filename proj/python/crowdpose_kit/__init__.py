"""Python bindings for the crowdpose-kit toolkit.

Datasets cross the boundary as JSON (dicts on the Python side), heatmaps
and keypoints as float64 numpy arrays. Keypoint arrays have shape (K, 3)
with rows of x, y and the native visibility code (0 unlabeled, 1 occluded,
2 visible, 3 self-occluded).
"""

import json

from . import _core
from ._core import (
    CrowdPoseError,
    crowd_level,
    decode_heatmaps,
    encode_heatmaps,
    grad_check,
    loss,
    loss_grad,
    oks,
    run_cli,
)

__version__ = _core.__version__

__all__ = [
    "CrowdPoseError",
    "convert_to_crowdpose",
    "crowd_indices",
    "crowd_level",
    "decode_heatmaps",
    "encode_heatmaps",
    "evaluate",
    "generate_corpus",
    "grad_check",
    "loss",
    "loss_grad",
    "oks",
    "parse_dataset",
    "run_cli",
    "validate",
]


def _text(data):
    return data if isinstance(data, str) else json.dumps(data)


def parse_dataset(data, format="native"):
    """Parse a dataset (JSON text or an already-decoded object) into native form."""
    return json.loads(_core.parse_dataset(_text(data), format))


def convert_to_crowdpose(data, format="jta"):
    return json.loads(_core.convert_to_crowdpose(_text(data), format))


def validate(data, format="native"):
    return json.loads(_core.validate(_text(data), format))


def crowd_indices(data, format="native", counting="all"):
    """CrowdIndex per image id; images without persons are omitted."""
    return _core.crowd_indices(_text(data), format, counting)


def evaluate(pred, gt, pred_format="native", gt_format="native", counting="all", jobs=1):
    return json.loads(_core.evaluate(_text(pred), _text(gt), pred_format, gt_format, counting, jobs))


def generate_corpus(seed=0, scenes=100, bins=10, tolerance=0.03, jobs=1):
    return json.loads(_core.generate_corpus(seed, scenes, bins, tolerance, jobs))
