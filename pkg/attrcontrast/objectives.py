'''Generator and discriminator objectives composed from supplied component values.

Adversarial scores come from outside (the adversarial networks are not part
of this app), so both objectives are pure compositions:

    L_G = -1/2 log D(fake) - 1/2 log D(fake, S) + l1 L_diff + l2 L_per + l3 L_DAMSM
    L_D = -1/2 log D(real) - 1/2 log(1 - D(fake)) - 1/2 log(1 - D(fake, S))
          - 1/2 log D(real, S) + l4 L_attr
'''
import math
from typing import Dict, Sequence, Tuple

import numpy as np
from attr import attrib, attrs

from .discriminator import probability_clamp
from .errors import AttrContrastError, ErrorReason
from .tensors import as_tensor, cosine_sim, softmax


DEFAULT_GAMMA = 5.0


def _non_negative(instance, attribute, value: float) -> None:
    if not (math.isfinite(value) and value >= 0):
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name=attribute.name, value=value, allowed='[0, inf)')


@attrs(frozen=True, slots=True)
class LossWeights:
    lambda1: float = attrib(default=0.7, converter=float, validator=_non_negative)
    lambda2: float = attrib(default=0.6, converter=float, validator=_non_negative)
    lambda3: float = attrib(default=1.0, converter=float, validator=_non_negative)
    lambda4: float = attrib(default=0.9, converter=float, validator=_non_negative)
    gamma: float = attrib(default=DEFAULT_GAMMA, converter=float, validator=_non_negative)


# Hyperparameter sweep; "default" is the best-performing row.
LOSS_WEIGHT_PRESETS: Dict[str, Tuple[float, float, float, float]] = {
    'default': (0.7, 0.6, 1.0, 0.9),
    'unit': (1.0, 1.0, 1.0, 1.0),
    'half': (0.5, 0.5, 1.0, 0.5),
    'half-attr': (0.5, 0.5, 1.0, 1.0),
    'half-diff': (0.5, 1.0, 1.0, 1.0),
    'wide': (1.5, 1.5, 1.0, 1.5),
}


def preset_weights(name: str, gamma: float = DEFAULT_GAMMA) -> LossWeights:
    try:
        lambdas = LOSS_WEIGHT_PRESETS[name]
    except KeyError:
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='preset', value=name,
                                allowed='{' + ', '.join(LOSS_WEIGHT_PRESETS) + '}')
    return LossWeights(*lambdas, gamma=gamma)


def _probability(value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='adversarial score', value=value, allowed='[0, 1]')
    return value


def _log(p: float) -> float:
    return math.log(max(p, probability_clamp()))


def _log_complement(p: float) -> float:
    return math.log1p(-min(p, 1.0 - probability_clamp()))


@attrs(frozen=True, slots=True)
class AdversarialScores:
    '''D(fake), D(fake, S), D(real), D(real, S); each log is clamped on its singular side only.'''

    d_fake_uncond: float = attrib(converter=_probability)
    d_fake_cond: float = attrib(converter=_probability)
    d_real_uncond: float = attrib(default=1.0, converter=_probability)
    d_real_cond: float = attrib(default=1.0, converter=_probability)

    def generator_terms(self) -> float:
        return -0.5 * _log(self.d_fake_uncond) - 0.5 * _log(self.d_fake_cond)

    def discriminator_terms(self) -> float:
        return (
            -0.5 * _log(self.d_real_uncond)
            - 0.5 * _log_complement(self.d_fake_uncond)
            - 0.5 * _log_complement(self.d_fake_cond)
            - 0.5 * _log(self.d_real_cond)
        )


@attrs(frozen=True, slots=True)
class DamsmInputs:
    '''Matching scores R of M candidate pairs and the index of the true pair.'''

    r_scores: np.ndarray = attrib(converter=lambda value: as_tensor(np.atleast_1d(value), 'r_scores'), eq=False)
    matched_index: int = attrib(default=0)

    def __attrs_post_init__(self) -> None:
        if self.r_scores.ndim != 1:
            raise AttrContrastError(ErrorReason.SHAPE_MISMATCH, detail=f'r_scores must be a vector, got {self.r_scores.shape}')
        if not 0 <= self.matched_index < self.r_scores.shape[0]:
            raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='matched_index', value=self.matched_index,
                                    allowed=f'[0, {self.r_scores.shape[0] - 1}]')


def damsm(inputs: DamsmInputs, gamma: float = DEFAULT_GAMMA) -> Tuple[np.ndarray, float]:
    '''Smoothed softmax of gamma * R over the M candidates.

    Returns:
        tuple: (probabilities (M), -log probability of the matched candidate)
    '''
    probabilities = softmax(gamma * inputs.r_scores)
    return probabilities, -math.log(max(float(probabilities[inputs.matched_index]), probability_clamp()))


def damsm_from_features(image_features: np.ndarray, sentence: np.ndarray, matched_index: int = 0,
                        gamma: float = DEFAULT_GAMMA) -> Tuple[np.ndarray, float]:
    '''DAMSM term with R computed as cosine(c_k, e) for each candidate picture feature c_k.

    Args:
        image_features(np.ndarray): (M, d) picture features of the candidates.
        sentence(np.ndarray): (d,) sentence feature e.
        matched_index(int, optional): Index of the true pair. Defaults to 0.
        gamma(float, optional): Smoothing factor. Defaults to 5.0.
    '''
    image_features = np.atleast_2d(image_features)
    r_scores = [cosine_sim(candidate, sentence) for candidate in image_features]
    return damsm(DamsmInputs(r_scores, matched_index), gamma)


def mean_adversarial(scores: Sequence[AdversarialScores]) -> Tuple[float, float]:
    '''Arithmetic mean of the generator and discriminator adversarial terms over score sets.'''
    if not scores:
        raise AttrContrastError(ErrorReason.EMPTY_INPUT, name='adversarial scores')
    generator = sum(score.generator_terms() for score in scores) / len(scores)
    discriminator = sum(score.discriminator_terms() for score in scores) / len(scores)
    return generator, discriminator


def _as_score_list(adv) -> Sequence[AdversarialScores]:
    return [adv] if isinstance(adv, AdversarialScores) else list(adv)


def generator_loss(adv, l_diff: float, l_per: float, l_damsm: float, w: LossWeights) -> float:
    '''L_G for one score set (or the mean over several).'''
    adversarial, _ = mean_adversarial(_as_score_list(adv))
    return adversarial + w.lambda1 * l_diff + w.lambda2 * l_per + w.lambda3 * l_damsm


def discriminator_loss(adv, l_attr: float, w: LossWeights) -> float:
    '''L_D for one score set (or the mean over several).'''
    _, adversarial = mean_adversarial(_as_score_list(adv))
    return adversarial + w.lambda4 * l_attr
