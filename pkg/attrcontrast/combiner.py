'''Random attribute combinations for augmentation.

A sentence with M attributes is split into two disjoint, non-empty
combinations. c1 is the subset of {1..M} encoded by an M-bit mask drawn
uniformly, redrawing the all-zero and all-one masks; c2 is its complement.
Every unordered bipartition is hit by exactly two masks (one per
orientation), so the draw is uniform over unordered splits and each index
lands in c1 half the time.

Mask bits come from ``random()`` draws of a numpy PCG64 generator seeded
with the 64-bit seed: a draw u gives the k-bit chunk floor(u * 2^k), k <= 53,
filling the mask from its lowest bit up.
'''
import itertools
import logging
from string import Template
from typing import FrozenSet, List, Tuple

import numpy as np
from attr import attrib, attrs

from .errors import AttrContrastError, ErrorReason


logger = logging.getLogger(__name__)

MIN_ATTRIBUTES = 2
MAX_ENUMERATED_ATTRIBUTES = 16
MAX_SEED = 2 ** 64 - 1
# random() returns n / 2^53, so floor(u * 2^k) is exactly uniform for k <= 53
CHUNK_BITS = 53


@attrs(frozen=True, slots=True)
class CombinationSplit:
    '''Two disjoint, non-empty sets of 1-based attribute indices covering 1..m.'''

    c1: FrozenSet[int] = attrib(converter=frozenset)
    c2: FrozenSet[int] = attrib(converter=frozenset)
    m: int = attrib()

    def __attrs_post_init__(self) -> None:
        if not self.c1 or not self.c2 or self.c1 & self.c2 or self.c1 | self.c2 != set(range(1, self.m + 1)):
            raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='split', value=f'{sorted(self.c1)}|{sorted(self.c2)}',
                                    allowed=f'disjoint non-empty sets covering 1..{self.m}')

    def as_dict(self) -> dict:
        return {'c1': sorted(self.c1), 'c2': sorted(self.c2)}


class SeededRng:
    '''PCG64 stream from numpy; the same seed always yields the same stream.'''

    def __init__(self, seed: int) -> None:
        if not 0 <= seed <= MAX_SEED:
            raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='seed', value=seed, allowed='[0, 2^64 - 1]')
        self.seed = seed
        self.generator = np.random.Generator(np.random.PCG64(seed))

    def bits(self, count: int) -> int:
        '''Uniform count-bit integer, at most CHUNK_BITS bits per random() draw.'''
        value, filled = 0, 0
        while filled < count:
            chunk = min(CHUNK_BITS, count - filled)
            value |= int(self.generator.random() * 2 ** chunk) << filled
            filled += chunk
        return value


def _split_from_mask(mask: int, m: int) -> CombinationSplit:
    c1 = [index + 1 for index in range(m) if mask >> index & 1]
    return CombinationSplit(c1, set(range(1, m + 1)) - set(c1), m)


def combine(m: int, rng: SeededRng) -> CombinationSplit:
    '''Draw one split of m attributes uniformly over all unordered bipartitions.

    The orientation is random too: either side may hold attribute m.

    Args:
        m(int): Number of attributes.
        rng(SeededRng): Generator owned by this call.

    Raises:
        AttrContrastError: m < 2, the sentence cannot support contrastive pairing.

    Returns:
        CombinationSplit: The drawn split.
    '''
    if m < MIN_ATTRIBUTES:
        raise AttrContrastError(ErrorReason.INSUFFICIENT_ATTRIBUTES, count=m)
    full = 2 ** m - 1
    mask = rng.bits(m)
    while mask in (0, full):
        mask = rng.bits(m)
    split = _split_from_mask(mask, m)
    logger.debug(Template('combine(m=$m, seed=$seed) -> $split').substitute(
        m=m, seed=rng.seed, split=split.as_dict()))
    return split


def enumerate_splits(m: int) -> List[CombinationSplit]:
    '''All 2^(m-1) - 1 unordered splits, ordered lexicographically by c1.

    Raises:
        AttrContrastError: m is outside [2, 16].
    '''
    if not MIN_ATTRIBUTES <= m <= MAX_ENUMERATED_ATTRIBUTES:
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='m', value=m,
                                allowed=f'[{MIN_ATTRIBUTES}, {MAX_ENUMERATED_ATTRIBUTES}]')
    c1_choices: List[Tuple[int, ...]] = []
    for size in range(1, m):
        c1_choices.extend(itertools.combinations(range(1, m), size))
    return [CombinationSplit(c1, set(range(1, m + 1)) - set(c1), m) for c1 in sorted(c1_choices)]
