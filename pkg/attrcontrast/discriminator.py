'''Attribute-level feedback: attribute-region correlation and BCE matching loss.'''
import logging
from string import Template
from typing import Iterable, List, Optional, Tuple

import numpy as np
import scipy.special
from attr import attrib, attrs
from attr.validators import in_
from django.conf import settings

from .errors import AttrContrastError, ErrorReason
from .features import CombinationEmbedding, ImageFeatures
from .tensors import as_tensor, softmax


logger = logging.getLogger(__name__)


def probability_clamp(clamp: Optional[float] = None) -> float:
    '''The given clamp, or settings.ATTRCONTRAST['PROBABILITY_CLAMP'] without one.'''
    return settings.ATTRCONTRAST['PROBABILITY_CLAMP'] if clamp is None else clamp


@attrs(frozen=True, slots=True)
class AttributeCorrelation:
    '''Per-position weights (p) of one combination and the weighted region feature (d).'''

    weights: np.ndarray = attrib(converter=as_tensor, eq=False)
    pooled: np.ndarray = attrib(converter=as_tensor, eq=False)


@attrs(frozen=True, slots=True)
class MatchLabel:
    '''1 for a true (image, combination) pair, 0 for a mismatched one.'''

    label: int = attrib(validator=in_((0, 1)))


def attribute_region_correlation(v: ImageFeatures, s: CombinationEmbedding) -> AttributeCorrelation:
    '''Softmax of s . v_i over the p positions, then attention-weighted pooling of v.

    Raises:
        AttrContrastError: The embedding length differs from d.
    '''
    if s.s.shape[0] != v.d:
        raise AttrContrastError(ErrorReason.SHAPE_MISMATCH,
                                detail=f'embedding length {s.s.shape[0]} does not match {v.d} feature channels')
    weights = softmax(s.s @ v.v)
    return AttributeCorrelation(weights, v.v @ weights)


def attribute_match_score(s: CombinationEmbedding, corr: AttributeCorrelation) -> float:
    '''Logistic of s . pooled, a probability that the pair matches.'''
    if s.s.shape != corr.pooled.shape:
        raise AttrContrastError(ErrorReason.SHAPE_MISMATCH,
                                detail=f'embedding {s.s.shape} and pooled feature {corr.pooled.shape} differ')
    return float(scipy.special.expit(np.dot(s.s, corr.pooled)))


def clamp_probability(p: float, clamp: Optional[float] = None) -> float:
    clamp = probability_clamp(clamp)
    return min(1.0 - clamp, max(clamp, float(p)))


def binary_cross_entropy(score: float, label: int, clamp: Optional[float] = None) -> float:
    score = clamp_probability(score, clamp)
    return -(label * np.log(score) + (1 - label) * np.log1p(-score))


def attr_loss(pairs: Iterable[Tuple[float, int]], clamp: Optional[float] = None) -> float:
    '''Sum of binary cross-entropies over (score, label) pairs.

    Args:
        pairs(Iterable[tuple]): (score in (0, 1), label in {0, 1}) pairs.
        clamp(float, optional): Scores are clamped to [clamp, 1 - clamp]. Defaults to the PROBABILITY_CLAMP setting.

    Raises:
        AttrContrastError: No pairs were given.

    Returns:
        float: The attribute loss.
    '''
    terms: List[float] = []
    for score, label in pairs:
        label = MatchLabel(int(label)).label
        terms.append(binary_cross_entropy(score, label, clamp))
    if not terms:
        raise AttrContrastError(ErrorReason.EMPTY_INPUT, name='attribute pairs')
    loss = float(sum(terms))
    logger.debug(Template('attribute loss over $n pair(s): $loss').substitute(n=len(terms), loss=loss))
    return loss


def attr_loss_and_grad(v: ImageFeatures, s: CombinationEmbedding, label: int,
                       clamp: Optional[float] = None) -> Tuple[float, float, np.ndarray, np.ndarray]:
    '''Loss of one (v, s) pair with gradients w.r.t. s (d) and v (d, p).

    With l = v^T s, w = softmax(l), z = s . (v w) and g = w + J l where
    J = diag(w) - w w^T, dz/ds = v g and dz/dv = s g^T.

    Raises:
        AttrContrastError: The score is clamped, where the gradient is not defined.

    Returns:
        tuple: (score, loss, d loss/d s, d loss/d v)
    '''
    clamp = probability_clamp(clamp)
    corr = attribute_region_correlation(v, s)
    score = attribute_match_score(s, corr)
    if not clamp < score < 1.0 - clamp:
        raise AttrContrastError(ErrorReason.DEGENERATE_FIXTURE,
                                detail=f'match score {score!r} is clamped at the probability boundary')
    logits = s.s @ v.v
    w = corr.weights
    g = w + w * logits - w * np.dot(w, logits)
    dz = score - label
    return score, binary_cross_entropy(score, label, clamp), dz * (v.v @ g), dz * np.outer(s.s, g)
