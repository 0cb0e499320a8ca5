'''Dense tensor kernels shared by the attention, loss and metric modules.

Tensors are float64 numpy arrays, row-major, validated finite and made
read-only by ``as_tensor``.
'''
from typing import Callable, Tuple

import numpy as np
import scipy.special

from .errors import AttrContrastError, ErrorReason


def as_tensor(data, name: str = 'tensor') -> np.ndarray:
    '''Copy data into an immutable, finite, C-ordered float64 array.

    Args:
        data: Anything numpy can convert.
        name(str, optional): Used in error messages. Defaults to 'tensor'.

    Raises:
        AttrContrastError: data holds NaN/Inf or has a zero-length dimension.

    Returns:
        np.ndarray: The read-only tensor.
    '''
    array = np.array(data, dtype=np.float64, order='C', copy=True)
    if array.size == 0 or 0 in array.shape:
        raise AttrContrastError(ErrorReason.EMPTY_INPUT, name=name)
    if not np.all(np.isfinite(array)):
        raise AttrContrastError(ErrorReason.NON_FINITE_VALUE, name=name)
    array.flags.writeable = False
    return array


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    '''Normalized exponential along axis, computed after max-subtraction.'''
    x = np.asarray(x, dtype=np.float64)
    if not -x.ndim <= axis < x.ndim:
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='axis', value=axis,
                                allowed=f'[{-x.ndim}, {x.ndim - 1}]')
    shifted = x - np.max(x, axis=axis, keepdims=True)
    exp = np.exp(shifted)
    return exp / np.sum(exp, axis=axis, keepdims=True)


def logsumexp(x: np.ndarray) -> float:
    return float(scipy.special.logsumexp(x))


def _norm_or_raise(vector: np.ndarray, name: str) -> float:
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:
        raise AttrContrastError(ErrorReason.DEGENERATE_VECTOR, name=name)
    return norm


def _check_same_length(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise AttrContrastError(ErrorReason.SHAPE_MISMATCH,
                                detail=f'vectors of shape {a.shape} and {b.shape} cannot be compared')


def cosine_sim(a: np.ndarray, b: np.ndarray) -> float:
    '''Cosine similarity of two equal-length vectors, clipped into [-1, 1].

    Raises:
        AttrContrastError: Lengths differ or either vector has zero norm.
    '''
    a = np.ravel(a)
    b = np.ravel(b)
    _check_same_length(a, b)
    value = float(np.dot(a, b)) / (_norm_or_raise(a, 'a') * _norm_or_raise(b, 'b'))
    return min(1.0, max(-1.0, value))


def cosine_sim_grad(a: np.ndarray, b: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
    '''Cosine similarity with its gradients w.r.t. a and b.

    Returns:
        tuple: (cos, d cos/d a, d cos/d b)
    '''
    a = np.ravel(a)
    b = np.ravel(b)
    _check_same_length(a, b)
    norm_a = _norm_or_raise(a, 'a')
    norm_b = _norm_or_raise(b, 'b')
    value = float(np.dot(a, b)) / (norm_a * norm_b)
    grad_a = b / (norm_a * norm_b) - value * a / norm_a ** 2
    grad_b = a / (norm_a * norm_b) - value * b / norm_b ** 2
    return value, grad_a, grad_b


def hadamard(a: np.ndarray, b: np.ndarray, broadcast: bool = False) -> np.ndarray:
    '''Elementwise product.

    With broadcast set, b may carry a singleton leading (channel) dimension,
    e.g. a spatial map of shape (1, h, w) applied to an image of shape (c, h, w).

    Raises:
        AttrContrastError: Shapes are incompatible.
    '''
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    compatible = a.shape == b.shape or (
        broadcast and b.ndim == a.ndim and b.shape[0] == 1 and b.shape[1:] == a.shape[1:])
    if not compatible:
        raise AttrContrastError(ErrorReason.SHAPE_MISMATCH,
                                detail=f'cannot multiply {a.shape} by {b.shape} (broadcast={broadcast})')
    return a * b


def finite_diff_grad(f: Callable[[np.ndarray], float], x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    '''Central-difference gradient of a scalar function, one element at a time.

    Args:
        f(Callable): Scalar function of a tensor shaped like x.
        x(np.ndarray): Point of evaluation.
        eps(float, optional): Step size. Defaults to 1e-5.

    Raises:
        AttrContrastError: eps is not positive or f is not finite near x.

    Returns:
        np.ndarray: Gradient with the shape of x.
    '''
    if not eps > 0:
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='eps', value=eps, allowed='(0, inf)')
    point = np.array(x, dtype=np.float64, copy=True)
    grad = np.zeros_like(point)
    flat_point = point.reshape(-1)
    flat_grad = grad.reshape(-1)
    for index in range(flat_point.size):
        original = flat_point[index]
        flat_point[index] = original + eps
        upper = float(f(point))
        flat_point[index] = original - eps
        lower = float(f(point))
        flat_point[index] = original
        if not (np.isfinite(upper) and np.isfinite(lower)):
            raise AttrContrastError(ErrorReason.NON_FINITE_VALUE, name=f'f near element {index}')
        flat_grad[index] = (upper - lower) / (2 * eps)
    return grad
