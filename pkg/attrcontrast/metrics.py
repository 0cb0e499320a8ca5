'''FID and LPIPS computed from raw feature sets.

Pretrained Inception/AlexNet features are not computed here; both metrics
consume feature tensors read from files.
'''
import logging
from string import Template
from typing import Sequence, Tuple

import numpy as np
import scipy.linalg
from attr import attrib, attrs

from .errors import AttrContrastError, ErrorReason
from .tensors import as_tensor


logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-10
FID_CLIP_TOLERANCE = 1e-8


def _check_symmetric(matrix: np.ndarray, name: str = 'matrix') -> None:
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise AttrContrastError(ErrorReason.SHAPE_MISMATCH, detail=f'{name} must be square, got {matrix.shape}')
    gap = float(np.max(np.abs(matrix - matrix.T))) if matrix.size else 0.0
    tolerance = SYMMETRY_TOLERANCE * max(1.0, float(np.max(np.abs(matrix))) if matrix.size else 0.0)
    if gap > tolerance:
        raise AttrContrastError(ErrorReason.ASYMMETRIC_MATRIX, gap=gap, tolerance=tolerance)


@attrs(frozen=True, slots=True)
class GaussianStats:
    '''Mean mu (d) and covariance sigma (d, d) of a feature distribution.'''

    mu: np.ndarray = attrib(converter=as_tensor, eq=False)
    sigma: np.ndarray = attrib(converter=as_tensor, eq=False)

    def __attrs_post_init__(self) -> None:
        if self.mu.ndim != 1 or self.sigma.shape != (self.mu.shape[0],) * 2:
            raise AttrContrastError(ErrorReason.SHAPE_MISMATCH,
                                    detail=f'mean {self.mu.shape} and covariance {self.sigma.shape} disagree')
        _check_symmetric(self.sigma, 'sigma')

    @property
    def dim(self) -> int:
        return self.mu.shape[0]


def gaussian_stats(features: np.ndarray) -> GaussianStats:
    '''Sample mean and unbiased (n - 1) covariance of (n, d) features, rows being samples.

    Raises:
        AttrContrastError: Fewer than two samples or not a rank-2 tensor.
    '''
    features = as_tensor(features, 'features')
    if features.ndim == 1:
        features = features[:, np.newaxis]
    if features.ndim != 2:
        raise AttrContrastError(ErrorReason.SHAPE_MISMATCH,
                                detail=f'features must be (n, d), got shape {features.shape}')
    n = features.shape[0]
    if n < 2:
        raise AttrContrastError(ErrorReason.INSUFFICIENT_SAMPLES, count=n)
    sigma = np.atleast_2d(np.cov(features, rowvar=False, ddof=1))
    return GaussianStats(features.mean(axis=0), (sigma + sigma.T) / 2.0)


def matrix_sqrt_psd(a: np.ndarray) -> np.ndarray:
    '''Symmetric PSD square root by eigendecomposition; negative eigenvalues are clipped to 0.

    Raises:
        AttrContrastError: The matrix is not square or asymmetric beyond tolerance.
    '''
    a = as_tensor(a, 'matrix')
    _check_symmetric(a)
    eigenvalues, eigenvectors = scipy.linalg.eigh((a + a.T) / 2.0)
    if eigenvalues.size and eigenvalues[0] < 0:
        logger.debug(Template('clipping eigenvalue(s) down to $lowest').substitute(lowest=eigenvalues[0]))
    root = (eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))) @ eigenvectors.T
    return (root + root.T) / 2.0


def fid(a: GaussianStats, b: GaussianStats) -> float:
    '''Frechet distance between two Gaussians.

    ||mu_a - mu_b||^2 + Tr(sigma_a + sigma_b) - 2 Tr((sigma_a^1/2 sigma_b sigma_a^1/2)^1/2)

    Raises:
        AttrContrastError: Dimensions differ, or the result is negative beyond rounding.

    Returns:
        float: The distance, at least 0.
    '''
    if a.dim != b.dim:
        raise AttrContrastError(ErrorReason.SHAPE_MISMATCH,
                                detail=f'feature dimensions differ: {a.dim} and {b.dim}')
    root_a = matrix_sqrt_psd(a.sigma)
    middle = root_a @ b.sigma @ root_a
    cross = float(np.trace(matrix_sqrt_psd((middle + middle.T) / 2.0)))
    diff = a.mu - b.mu
    distance = float(np.dot(diff, diff)) + float(np.trace(a.sigma) + np.trace(b.sigma)) - 2.0 * cross
    if distance < -FID_CLIP_TOLERANCE:
        raise AttrContrastError(ErrorReason.INTERNAL_ERROR, detail=f'FID evaluated to {distance!r}')
    return max(distance, 0.0)


def fid_from_features(a: np.ndarray, b: np.ndarray) -> float:
    '''FID between the Gaussian fits of two (n, d) feature sets.'''
    return fid(gaussian_stats(a), gaussian_stats(b))


def _as_feature_map(tensor: np.ndarray, name: str) -> np.ndarray:
    tensor = as_tensor(tensor, name)
    if tensor.ndim == 1:
        return tensor.reshape(-1, 1, 1)
    if tensor.ndim == 2:
        return tensor[:, np.newaxis, :]
    if tensor.ndim == 3:
        return tensor
    raise AttrContrastError(ErrorReason.SHAPE_MISMATCH, detail=f'{name} must be (c, h, w), got {tensor.shape}')


@attrs(frozen=True, slots=True)
class LpipsLayer:
    '''Paired (c, h, w) feature maps of one layer and its per-channel weights (c).'''

    v: np.ndarray = attrib(converter=lambda value: _as_feature_map(value, 'v'), eq=False)
    v_hat: np.ndarray = attrib(converter=lambda value: _as_feature_map(value, 'v_hat'), eq=False)
    omega: np.ndarray = attrib(converter=lambda value: as_tensor(np.ravel(value), 'omega'), eq=False)

    def __attrs_post_init__(self) -> None:
        if self.v.shape != self.v_hat.shape:
            raise AttrContrastError(ErrorReason.SHAPE_MISMATCH,
                                    detail=f'paired features differ: {self.v.shape} and {self.v_hat.shape}')
        if self.omega.shape != (self.v.shape[0],):
            raise AttrContrastError(ErrorReason.SHAPE_MISMATCH,
                                    detail=f'{self.omega.size} weight(s) for {self.v.shape[0]} channel(s)')


@attrs(frozen=True, slots=True)
class LpipsLayers:
    layers: Tuple[LpipsLayer, ...] = attrib(converter=tuple)

    def __attrs_post_init__(self) -> None:
        if not self.layers:
            raise AttrContrastError(ErrorReason.EMPTY_INPUT, name='LPIPS layers')

    @classmethod
    def from_triples(cls, triples: Sequence[Tuple[np.ndarray, np.ndarray, np.ndarray]]) -> 'LpipsLayers':
        return cls(LpipsLayer(v, v_hat, omega) for v, v_hat, omega in triples)


def _unit_normalize(features: np.ndarray, layer: int) -> np.ndarray:
    norms = np.linalg.norm(features, axis=0)
    zeros = np.argwhere(norms == 0)
    if zeros.size:
        raise AttrContrastError(ErrorReason.DEGENERATE_FEATURE, layer=layer, position=tuple(int(i) for i in zeros[0]))
    return features / norms


def lpips(layers: LpipsLayers) -> float:
    '''Sum over layers of the spatial mean of ||omega * (v - v_hat)||^2 on channel-normalized features.

    Raises:
        AttrContrastError: A channel vector is zero at some position.
    '''
    total = 0.0
    for index, layer in enumerate(layers.layers):
        diff = _unit_normalize(layer.v, index) - _unit_normalize(layer.v_hat, index)
        weighted = layer.omega[:, np.newaxis, np.newaxis] * diff
        total += float(np.mean(np.sum(weighted ** 2, axis=0)))
    return total
