'''Contrastive attention between two attribute combinations.

``cmam`` builds a spatial map (two-way softmax of s_j . v_i per position) and
a channel map (two-way softmax of s_j[m] * u_m per channel, u the spatially
averaged features). The spatial rows mask the original and the two edited
images into six attended images whose features enter the contrastive loss.
'''
import logging
from pathlib import Path
from string import Template
from typing import Dict, List, Sequence, Tuple

import numpy as np
from attr import attrib, attrs

from .errors import AttrContrastError, ErrorReason
from .features import CombinationEmbedding, FeatureExtractor, ImageFeatures, extract_features
from .tensorio import PathLike, read_tensor, write_tensor
from .tensors import as_tensor, cosine_sim_grad, hadamard, logsumexp, softmax


logger = logging.getLogger(__name__)

MAP_SUM_TOLERANCE = 1e-9
SEXTET_FIELDS = ('v1_pos', 'v1_neg', 'v2_pos', 'v2_neg', 'v_ori1', 'v_ori2')
BATCH_SUFFIX = '.catf'
# (numerator, denominator) of the two printed terms; both are anchored on v_ori1.
CONTRASTIVE_TERMS = (('v1_neg', 'v2_pos'), ('v2_neg', 'v1_pos'))


def _columns_sum_to_one(instance, attribute, value: np.ndarray) -> None:
    if value.ndim != 2 or value.shape[0] != 2:
        raise AttrContrastError(ErrorReason.SHAPE_MISMATCH,
                                detail=f'{attribute.name} map must have shape (2, n), got {value.shape}')
    gap = float(np.max(np.abs(value.sum(axis=0) - 1.0)))
    if gap > MAP_SUM_TOLERANCE:
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name=f'{attribute.name} column sum', value=1.0 + gap,
                                allowed=f'1 +/- {MAP_SUM_TOLERANCE}')


@attrs(frozen=True, slots=True)
class AttentionMaps:
    '''Row j of ``spatial`` (2, p) and ``channel`` (2, d) belongs to combination j.'''

    spatial: np.ndarray = attrib(converter=as_tensor, validator=_columns_sum_to_one, eq=False)
    channel: np.ndarray = attrib(converter=as_tensor, validator=_columns_sum_to_one, eq=False)

    def swapped(self) -> 'AttentionMaps':
        return AttentionMaps(self.spatial[::-1], self.channel[::-1])


@attrs(frozen=True, slots=True)
class AttendedSextet:
    v1_pos: np.ndarray = attrib(converter=as_tensor, eq=False)
    v1_neg: np.ndarray = attrib(converter=as_tensor, eq=False)
    v2_pos: np.ndarray = attrib(converter=as_tensor, eq=False)
    v2_neg: np.ndarray = attrib(converter=as_tensor, eq=False)
    v_ori1: np.ndarray = attrib(converter=as_tensor, eq=False)
    v_ori2: np.ndarray = attrib(converter=as_tensor, eq=False)

    def __attrs_post_init__(self) -> None:
        shapes = {getattr(self, name).shape for name in SEXTET_FIELDS}
        if len(shapes) != 1 or len(next(iter(shapes))) != 1:
            raise AttrContrastError(ErrorReason.SHAPE_MISMATCH,
                                    detail=f'attended features must be vectors of one length, got {sorted(shapes)}')


class ContrastiveBatch:
    '''N attended sextets of a uniform feature length.'''

    def __init__(self, sextets: Sequence[AttendedSextet]) -> None:
        if not sextets:
            raise AttrContrastError(ErrorReason.EMPTY_INPUT, name='contrastive batch')
        lengths = {sextet.v1_pos.shape for sextet in sextets}
        if len(lengths) != 1:
            raise AttrContrastError(ErrorReason.SHAPE_MISMATCH,
                                    detail=f'batch mixes feature lengths {sorted(lengths)}')
        self.sextets = list(sextets)

    @classmethod
    def from_arrays(cls, arrays: Dict[str, np.ndarray]) -> 'ContrastiveBatch':
        '''Build a batch from six (N, D) arrays, or six (D,) vectors for one anchor.'''
        missing = [name for name in SEXTET_FIELDS if name not in arrays]
        if missing:
            raise AttrContrastError(ErrorReason.EMPTY_INPUT, name=', '.join(missing))
        stacked = {name: np.atleast_2d(arrays[name]) for name in SEXTET_FIELDS}
        sizes = {array.shape[0] for array in stacked.values()}
        if len(sizes) != 1:
            raise AttrContrastError(ErrorReason.SHAPE_MISMATCH, detail=f'batch arrays disagree on N: {sorted(sizes)}')
        return cls([AttendedSextet(*(stacked[name][row] for name in SEXTET_FIELDS)) for row in range(sizes.pop())])

    def __len__(self) -> int:
        return len(self.sextets)

    def arrays(self) -> Dict[str, np.ndarray]:
        return {name: np.stack([getattr(sextet, name) for sextet in self.sextets]) for name in SEXTET_FIELDS}

    @classmethod
    def read(cls, directory: PathLike) -> 'ContrastiveBatch':
        '''Read ``v1_pos.catf`` ... ``v_ori2.catf``; rank 1 files hold one anchor, rank 2 files N anchors.'''
        directory = Path(directory)
        return cls.from_arrays({name: read_tensor(directory / f'{name}{BATCH_SUFFIX}') for name in SEXTET_FIELDS})

    def write(self, directory: PathLike) -> List[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for name, array in self.arrays().items():
            path = directory / f'{name}{BATCH_SUFFIX}'
            write_tensor(array[0] if len(self) == 1 else array, path)
            paths.append(path)
        return paths


def _check_dims(v: ImageFeatures, *embeddings: CombinationEmbedding) -> None:
    for embedding in embeddings:
        if embedding.s.shape[0] != v.d:
            raise AttrContrastError(ErrorReason.SHAPE_MISMATCH,
                                    detail=f'embedding length {embedding.s.shape[0]} does not match {v.d} feature channels')


def cmam(v: ImageFeatures, s1: CombinationEmbedding, s2: CombinationEmbedding) -> AttentionMaps:
    '''Spatial and channel attention of two combinations competing for each position/channel.

    Args:
        v(ImageFeatures): Image features (d, p).
        s1(CombinationEmbedding): First combination, length d.
        s2(CombinationEmbedding): Second combination, length d.

    Raises:
        AttrContrastError: Embedding lengths differ from d.

    Returns:
        AttentionMaps: spatial (2, p) and channel (2, d) maps.
    '''
    _check_dims(v, s1, s2)
    s = np.stack([s1.s, s2.s])
    spatial = softmax(s @ v.v, axis=0)
    u = v.v.mean(axis=1)
    channel = softmax(s * u, axis=0)
    return AttentionMaps(spatial, channel)


def _as_image(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64)
    return image[np.newaxis] if image.ndim == 2 else image


def attend(image: np.ndarray, maps: AttentionMaps, j: int, channel_attention: bool = False) -> np.ndarray:
    '''Mask an image (c, h, w) with the j-th (0-based) map, broadcasting over channels.'''
    c, h, w = image.shape
    masked = hadamard(image, maps.spatial[j].reshape(1, h, w), broadcast=True)
    if channel_attention:
        masked = hadamard(masked, np.broadcast_to(maps.channel[j][:, None, None], masked.shape))
    return masked


def attended_sextet(i_orig: np.ndarray, i_edit1: np.ndarray, i_edit2: np.ndarray, maps: AttentionMaps,
                    extractor: FeatureExtractor, channel_attention: bool = False) -> AttendedSextet:
    '''Features of the six attended images.

    v1_pos = E(I1 x C1), v1_neg = E(I1 x C2), v2_pos = E(I2 x C2),
    v2_neg = E(I2 x C1), v_ori1 = E(I x C1), v_ori2 = E(I x C2).

    Args:
        i_orig(np.ndarray): Original image (c, h, w) or (h, w).
        i_edit1(np.ndarray): Image edited with the first combination.
        i_edit2(np.ndarray): Image edited with the second combination.
        maps(AttentionMaps): Maps whose spatial width is h * w.
        extractor(FeatureExtractor): Feature extractor for the attended images.
        channel_attention(bool, optional): Also scale channels by the channel map. Defaults to False.

    Raises:
        AttrContrastError: Image shapes differ or do not match the maps.

    Returns:
        AttendedSextet: The six feature vectors.
    '''
    images = [_as_image(image) for image in (i_orig, i_edit1, i_edit2)]
    if len({image.shape for image in images}) != 1:
        raise AttrContrastError(ErrorReason.SHAPE_MISMATCH,
                                detail=f'images differ in shape: {[image.shape for image in images]}')
    c, h, w = images[0].shape
    if maps.spatial.shape[1] != h * w:
        raise AttrContrastError(ErrorReason.SHAPE_MISMATCH,
                                detail=f'maps cover {maps.spatial.shape[1]} positions, images have {h}*{w}')
    if channel_attention and maps.channel.shape[1] != c:
        raise AttrContrastError(ErrorReason.SHAPE_MISMATCH,
                                detail=f'channel map has {maps.channel.shape[1]} channels, images have {c}')

    original, edit1, edit2 = images

    def features(image: np.ndarray, j: int) -> np.ndarray:
        return extract_features(attend(image, maps, j, channel_attention), extractor)

    return AttendedSextet(
        v1_pos=features(edit1, 0),
        v1_neg=features(edit1, 1),
        v2_pos=features(edit2, 1),
        v2_neg=features(edit2, 0),
        v_ori1=features(original, 0),
        v_ori2=features(original, 1),
    )


def _contrastive_term(arrays: Dict[str, np.ndarray], grads: Dict[str, np.ndarray], anchor: int,
                      numerator: str, denominator: str, nce_standard: bool) -> float:
    anchor_vector = arrays['v_ori1'][anchor]
    positive, grad_positive, grad_anchor = cosine_sim_grad(arrays[numerator][anchor], anchor_vector)
    denominators = [cosine_sim_grad(vector, anchor_vector) for vector in arrays[denominator]]

    logits = np.array([cos for cos, _, _ in denominators] + ([positive] if nce_standard else []))
    weights = softmax(logits)

    coefficient = weights[-1] - 1.0 if nce_standard else -1.0
    grads[numerator][anchor] += coefficient * grad_positive
    grads['v_ori1'][anchor] += coefficient * grad_anchor
    for p, (_, grad_vector, grad_against_anchor) in enumerate(denominators):
        grads[denominator][p] += weights[p] * grad_vector
        grads['v_ori1'][anchor] += weights[p] * grad_against_anchor
    return -positive + logsumexp(logits)


def contrastive_loss_and_grad(batch: ContrastiveBatch, nce_standard: bool = False) -> Tuple[float, Dict[str, np.ndarray]]:
    '''Contrastive loss averaged over anchors, with its gradient w.r.t. every (N, D) array.

    Each anchor a contributes
        -log[exp(cos(v1_neg[a], v_ori1[a])) / sum_p exp(cos(v2_pos[p], v_ori1[a]))]
        -log[exp(cos(v2_neg[a], v_ori1[a])) / sum_p exp(cos(v1_pos[p], v_ori1[a]))].
    With nce_standard the numerator term is also added to each denominator.

    Raises:
        AttrContrastError: A feature vector has zero norm.
    '''
    arrays = batch.arrays()
    grads = {name: np.zeros_like(array) for name, array in arrays.items()}
    total = 0.0
    # Fixed summation order keeps the result bit-stable.
    for anchor in range(len(batch)):
        for numerator, denominator in CONTRASTIVE_TERMS:
            total += _contrastive_term(arrays, grads, anchor, numerator, denominator, nce_standard)
    scale = 1.0 / len(batch)
    return total * scale, {name: grad * scale for name, grad in grads.items()}


def contrastive_loss(batch: ContrastiveBatch, nce_standard: bool = False) -> float:
    loss, _ = contrastive_loss_and_grad(batch, nce_standard)
    logger.debug(Template('contrastive loss over $n anchor(s): $loss').substitute(n=len(batch), loss=loss))
    return loss


def _check_volume(c: int, h: int, w: int) -> int:
    for name, value in (('c', c), ('h', h), ('w', w)):
        if value < 1:
            raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name=name, value=value, allowed='[1, inf)')
    return c * h * w


def perceptual_loss_and_grad(v1_neg: np.ndarray, v2_neg: np.ndarray, c: int, h: int,
                             w: int) -> Tuple[float, np.ndarray, np.ndarray]:
    '''Perceptual loss ||v1_neg - v2_neg||^2 / (c*h*w) with gradients w.r.t. both inputs.'''
    a = np.ravel(np.asarray(v1_neg, dtype=np.float64))
    b = np.ravel(np.asarray(v2_neg, dtype=np.float64))
    if a.shape != b.shape:
        raise AttrContrastError(ErrorReason.SHAPE_MISMATCH,
                                detail=f'perceptual inputs have lengths {a.size} and {b.size}')
    volume = _check_volume(c, h, w)
    diff = a - b
    grad = 2.0 * diff / volume
    return float(np.dot(diff, diff)) / volume, grad, -grad


def perceptual_loss(v1_neg: np.ndarray, v2_neg: np.ndarray, c: int, h: int, w: int) -> float:
    '''Perceptual loss between the two negative attended features; zero iff they are equal.'''
    loss, _, _ = perceptual_loss_and_grad(v1_neg, v2_neg, c, h, w)
    return loss


def batch_perceptual_loss(batch: ContrastiveBatch, c: int, h: int, w: int) -> float:
    '''Perceptual loss averaged over the anchors of a batch.'''
    losses: List[float] = [perceptual_loss(sextet.v1_neg, sextet.v2_neg, c, h, w) for sextet in batch.sextets]
    return float(np.mean(losses))
