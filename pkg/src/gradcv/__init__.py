"""gradcv: differentiable computer vision on a numpy-backed autodiff tape.

The tensor core (Tensor/Var/Tape plus the primitive kernels) lives at the top
level; vision operators are grouped into :mod:`gradcv.color`,
:mod:`gradcv.filters`, :mod:`gradcv.geometry`, :mod:`gradcv.losses`,
:mod:`gradcv.features` and :mod:`gradcv.augment`.  Executable demos are under
:mod:`gradcv.demos` and the ``gradcv`` CLI.
"""

from .errors import (
    DegenerateError,
    EstimationError,
    GradcvError,
    NoConsensusError,
    OptimizationError,
    ParameterError,
    ShapeError,
    UsageError,
)
from .tensor import Tensor
from .tape import (
    Tape,
    Var,
    abs_,
    add,
    as_var,
    atan2,
    backward,
    clamp,
    concat,
    cos,
    div,
    exp,
    log,
    matmul,
    max_,
    maximum,
    mean,
    min_,
    minimum,
    mul,
    neg,
    pow_,
    reshape,
    sin,
    sqrt,
    stack,
    sub,
    sum_,
    transpose,
    where,
)
from .kernels import (
    conv2d,
    extract_patches,
    grid_sample_bilinear,
    identity_grid,
    pad2d,
    sample_bilinear,
    upsample_bilinear,
)
from .imgio import load_image, read_pnm, save_image, write_pnm

__all__ = [
    "GradcvError",
    "ShapeError",
    "ParameterError",
    "UsageError",
    "EstimationError",
    "NoConsensusError",
    "DegenerateError",
    "OptimizationError",
    "Tensor",
    "Tape",
    "Var",
    "as_var",
    "backward",
    "add",
    "sub",
    "mul",
    "div",
    "neg",
    "abs_",
    "exp",
    "log",
    "pow_",
    "sqrt",
    "sin",
    "cos",
    "atan2",
    "maximum",
    "minimum",
    "clamp",
    "where",
    "sum_",
    "mean",
    "min_",
    "max_",
    "reshape",
    "transpose",
    "concat",
    "stack",
    "matmul",
    "pad2d",
    "conv2d",
    "grid_sample_bilinear",
    "sample_bilinear",
    "identity_grid",
    "upsample_bilinear",
    "extract_patches",
    "load_image",
    "save_image",
    "read_pnm",
    "write_pnm",
]

__version__ = "0.1.0"
