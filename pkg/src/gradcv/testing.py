"""Finite-difference gradient checking used throughout the test suite."""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tape import Var, backward


def numeric_grad(f: Callable[[np.ndarray], float], x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function, elementwise."""
    # explicit flat C-order buffer: never trust reshape(-1) to be a view
    flat = np.zeros(x.size, dtype=np.float64)
    xf = np.ascontiguousarray(x, dtype=np.float64).reshape(-1)
    for i in range(xf.size):
        hi = xf.copy()
        lo = xf.copy()
        hi[i] += eps
        lo[i] -= eps
        flat[i] = (f(hi.reshape(x.shape)) - f(lo.reshape(x.shape))) / (2 * eps)
    return flat.reshape(x.shape)


def gradcheck(
    f: Callable[..., Var],
    inputs: Sequence[np.ndarray],
    wrt: Sequence[int] | None = None,
    eps: float = 1e-5,
    rtol: float = 1e-4,
) -> float:
    """Compare tape gradients of scalar-valued f against central differences.

    Returns the worst relative error over the checked inputs; raises
    AssertionError when it exceeds rtol.  Relative error is the max absolute
    deviation scaled by the largest gradient magnitude (floored at 1e-6 so
    near-zero gradients compare absolutely).
    """
    inputs = [np.asarray(x, dtype=np.float64) for x in inputs]
    wrt = list(range(len(inputs))) if wrt is None else list(wrt)
    leaves = [Var(x, requires_grad=(i in wrt)) for i, x in enumerate(inputs)]
    out = f(*leaves)
    grads = backward(out)
    worst = 0.0
    for i in wrt:
        analytic = grads[leaves[i]].data

        def scalar(x, i=i):
            args = [Var(v) for v in inputs]
            args[i] = Var(x)
            return float(f(*args).data)

        numeric = numeric_grad(scalar, inputs[i], eps=eps)
        scale = max(np.abs(numeric).max(), np.abs(analytic).max(), 1e-6)
        rel = float(np.abs(analytic - numeric).max() / scale)
        worst = max(worst, rel)
        assert rel < rtol, (
            f"gradient mismatch for input {i}: rel err {rel:.3e} >= {rtol:.0e}\n"
            f"analytic range [{analytic.min():.6g},{analytic.max():.6g}], "
            f"numeric range [{numeric.min():.6g},{numeric.max():.6g}]"
        )
    return worst
