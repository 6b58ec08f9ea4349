"""Shared helpers for the test suite: unit-vector generators and the central
finite-difference oracles used to check every hand-derived gradient."""

import numpy as np


def unit(v):
    v = np.asarray(v, dtype=np.float64)
    return v / np.linalg.norm(v)


def random_unit(rng, d):
    return unit(rng.standard_normal(d))


def random_unit_columns(rng, d, c):
    vecs = rng.standard_normal((d, c))
    return vecs / np.linalg.norm(vecs, axis=0, keepdims=True)


def central_diff(fn, x, step):
    """Central finite differences of a scalar function over a flat array."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = grad.ravel()
    for i in range(x.size):
        plus = x.copy()
        minus = x.copy()
        plus.ravel()[i] += step
        minus.ravel()[i] -= step
        flat[i] = (fn(plus) - fn(minus)) / (2.0 * step)
    return grad


def max_relative_error(analytic, numeric, floor=1e-10):
    """Worst per-entry relative error, guarding vanishing denominators."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.abs(numeric), floor)
    return float((np.abs(analytic - numeric) / denom).max())


def assert_gradients_close(analytic, numeric, rtol=1e-6, atol=1e-9):
    """Per-entry relative agreement at rtol, with an absolute allowance at the
    central-difference noise floor (~1e-16/step) for near-zero entries."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    assert np.allclose(analytic, numeric, rtol=rtol, atol=atol), (
        f"max abs err {np.abs(analytic - numeric).max():.3e}, "
        f"max rel err {max_relative_error(analytic, numeric):.3e}"
    )


def scale_relative_error(analytic, numeric):
    """Worst absolute deviation relative to the oracle vector's sup-norm scale
    (counts entries near zero against the overall gradient magnitude)."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = max(1.0, float(np.abs(numeric).max()))
    return float(np.abs(analytic - numeric).max() / scale)
