'''Image features, combination embeddings and deterministic feature extractors.

Pretrained encoders are replaced by deterministic stand-ins:

  * ``FeatureExtractor`` maps an attended image to a feature vector by
    identity (flatten), average pooling per channel, or a seeded linear
    projection;
  * ``embed_combination`` embeds a set of attributes as the mean of
    word-keyed seeded vectors.
'''
import hashlib
from typing import Iterable, Sequence

import numpy as np
from attr import attrib, attrs
from attr.validators import in_, instance_of

from .errors import AttrContrastError, ErrorReason
from .parser import Attribute
from .tensors import as_tensor


EXTRACTOR_KINDS = ('identity', 'average-pool', 'seeded-projection')


def _positive(instance, attribute, value: int) -> None:
    if value < 1:
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name=attribute.name, value=value, allowed='[1, inf)')


@attrs(frozen=True, slots=True)
class ImageFeatures:
    '''Feature map v of shape (d, p) with p = h * w spatial positions.'''

    v: np.ndarray = attrib(converter=as_tensor, hash=False, eq=False)
    h: int = attrib(validator=_positive)
    w: int = attrib(validator=_positive)

    def __attrs_post_init__(self) -> None:
        if self.v.ndim != 2 or self.v.shape[1] != self.h * self.w:
            raise AttrContrastError(ErrorReason.SHAPE_MISMATCH,
                                    detail=f'features {self.v.shape} do not match h*w = {self.h}*{self.w}')

    @classmethod
    def from_tensor(cls, tensor: np.ndarray) -> 'ImageFeatures':
        '''Accept (d, p) features, read as h=1, w=p, or (d, h, w) features.'''
        tensor = np.asarray(tensor)
        if tensor.ndim == 2:
            return cls(tensor, 1, tensor.shape[1])
        if tensor.ndim == 3:
            d, h, w = tensor.shape
            return cls(tensor.reshape(d, h * w), h, w)
        raise AttrContrastError(ErrorReason.SHAPE_MISMATCH,
                                detail=f'image features must be rank 2 or 3, got shape {tensor.shape}')

    @property
    def d(self) -> int:
        return self.v.shape[0]

    @property
    def p(self) -> int:
        return self.v.shape[1]


@attrs(frozen=True, slots=True)
class CombinationEmbedding:
    '''Embedding s of one attribute combination.'''

    s: np.ndarray = attrib(converter=as_tensor, hash=False, eq=False)

    def __attrs_post_init__(self) -> None:
        if self.s.ndim != 1:
            raise AttrContrastError(ErrorReason.SHAPE_MISMATCH, detail=f'embedding must be a vector, got shape {self.s.shape}')
        if not np.any(self.s):
            raise AttrContrastError(ErrorReason.DEGENERATE_VECTOR, name='combination embedding')


def word_vector(word: str, dim: int, seed: int) -> np.ndarray:
    '''Deterministic vector for a word; keyed by a blake2b digest, not by hash().'''
    key = int.from_bytes(hashlib.blake2b(word.encode('utf-8'), digest_size=8).digest(), 'little')
    return np.random.Generator(np.random.PCG64([seed, key])).standard_normal(dim)


def embed_combination(attributes: Sequence[Attribute], indices: Iterable[int], dim: int = 32,
                      seed: int = 0) -> CombinationEmbedding:
    '''Mean of the word vectors of the attributes at the given 1-based indices.

    Args:
        attributes(Sequence[Attribute]): Parsed attributes of one sentence.
        indices(Iterable[int]): 1-based attribute indices, e.g. a split's c1.
        dim(int, optional): Embedding dimension d. Defaults to 32.
        seed(int, optional): Seed of the word lookup. Defaults to 0.

    Raises:
        AttrContrastError: An index is out of range or no words were selected.

    Returns:
        CombinationEmbedding: The mean word vector.
    '''
    if dim < 1:
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='dim', value=dim, allowed='[1, inf)')
    indices = tuple(sorted(indices))
    if not indices:
        raise AttrContrastError(ErrorReason.EMPTY_INPUT, name='combination')
    for index in indices:
        if not 1 <= index <= len(attributes):
            raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='attribute index', value=index,
                                    allowed=f'[1, {len(attributes)}]')
    words = [word for index in indices for word in attributes[index - 1].words]
    vectors = np.stack([word_vector(word, dim, seed) for word in words])
    return CombinationEmbedding(vectors.mean(axis=0))


@attrs(frozen=True, slots=True)
class FeatureExtractor:
    '''Deterministic stand-in for a pretrained image encoder.'''

    kind: str = attrib(default='identity', validator=in_(EXTRACTOR_KINDS))
    seed: int = attrib(default=7, validator=instance_of(int))
    out_dim: int = attrib(default=8, validator=_positive)

    def projection(self, in_dim: int) -> np.ndarray:
        '''The (out_dim, in_dim) matrix of the seeded projection.'''
        generator = np.random.Generator(np.random.PCG64(self.seed))
        return generator.standard_normal((self.out_dim, in_dim)) / np.sqrt(in_dim)

    def __call__(self, image: np.ndarray) -> np.ndarray:
        return extract_features(image, self)


def _as_image(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        return image[np.newaxis]
    if image.ndim == 3:
        return image
    raise AttrContrastError(ErrorReason.SHAPE_MISMATCH, detail=f'image must be (h, w) or (c, h, w), got {image.shape}')


def extract_features(image: np.ndarray, extractor: FeatureExtractor) -> np.ndarray:
    '''Feature vector of an image under the extractor's configuration.

    identity flattens, average-pool returns the per-channel spatial mean, and
    seeded-projection multiplies the flattened image by a seeded Gaussian matrix.
    '''
    image = _as_image(image)
    if extractor.kind == 'average-pool':
        return image.mean(axis=(1, 2))
    flat = image.reshape(-1)
    if extractor.kind == 'seeded-projection':
        return extractor.projection(flat.size) @ flat
    return flat.copy()
