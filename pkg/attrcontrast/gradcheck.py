'''Analytic gradients of the three losses checked against central finite differences.

A fixture is either read from a directory or drawn from a seeded generator:

  * l_diff: the six attended arrays ``v1_pos.catf`` ... ``v_ori2.catf``;
  * l_per: ``v1_neg.catf`` and ``v2_neg.catf``;
  * l_attr: ``v.catf`` (d, p) or (d, h, w) features and ``s.catf``.
'''
import logging
from pathlib import Path
from string import Template
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from attr import attrib, attrs
from attr.validators import in_
from django.conf import settings

from .attention import SEXTET_FIELDS, ContrastiveBatch, contrastive_loss_and_grad, perceptual_loss_and_grad
from .combiner import MAX_SEED
from .discriminator import MatchLabel, attr_loss_and_grad
from .errors import AttrContrastError, ErrorReason
from .features import CombinationEmbedding, ImageFeatures
from .tensorio import PathLike, read_tensor
from .tensors import finite_diff_grad


logger = logging.getLogger(__name__)

GRADCHECK_TARGETS = ('l_diff', 'l_per', 'l_attr')
RELATIVE_ERROR_FLOOR = 1e-4


@attrs(frozen=True, slots=True)
class PerceptualFixture:
    v1_neg: np.ndarray = attrib(eq=False)
    v2_neg: np.ndarray = attrib(eq=False)
    chw: Tuple[int, int, int] = attrib(converter=tuple)


@attrs(frozen=True, slots=True)
class AttributeFixture:
    v: ImageFeatures = attrib()
    s: CombinationEmbedding = attrib()
    label: int = attrib(validator=in_((0, 1)))


Fixture = Union[ContrastiveBatch, PerceptualFixture, AttributeFixture]


@attrs(frozen=True, slots=True)
class GradcheckReport:
    target: str = attrib(validator=in_(GRADCHECK_TARGETS))
    eps: float = attrib()
    tol: float = attrib()
    max_rel_error: float = attrib()
    passed: bool = attrib()

    def as_dict(self) -> Dict[str, object]:
        return {
            'target': self.target,
            'eps': self.eps,
            'tol': self.tol,
            'max_rel_error': self.max_rel_error,
            'passed': self.passed,
        }


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    '''|a - n| / max(|a|, |n|, 1e-4), elementwise.'''
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), RELATIVE_ERROR_FLOOR)
    return np.abs(analytic - numeric) / scale


def _check_target(target: str) -> None:
    if target not in GRADCHECK_TARGETS:
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='target', value=target,
                                allowed='{' + ', '.join(GRADCHECK_TARGETS) + '}')


def _degenerate(exc: AttrContrastError) -> AttrContrastError:
    if exc.reason in (ErrorReason.DEGENERATE_VECTOR, ErrorReason.NON_FINITE_VALUE):
        return AttrContrastError(ErrorReason.DEGENERATE_FIXTURE, detail=exc.detail)
    return exc


def _l_diff_pairs(batch: ContrastiveBatch, eps: float, nce_standard: bool) -> List[Tuple[np.ndarray, np.ndarray]]:
    arrays = batch.arrays()
    _, grads = contrastive_loss_and_grad(batch, nce_standard)
    pairs = []
    for name in SEXTET_FIELDS:
        def loss_of(x: np.ndarray, name: str = name) -> float:
            loss, _ = contrastive_loss_and_grad(ContrastiveBatch.from_arrays({**arrays, name: x}), nce_standard)
            return loss
        pairs.append((grads[name], finite_diff_grad(loss_of, arrays[name], eps)))
    return pairs


def _l_per_pairs(fixture: PerceptualFixture, eps: float) -> List[Tuple[np.ndarray, np.ndarray]]:
    _, grad_a, grad_b = perceptual_loss_and_grad(fixture.v1_neg, fixture.v2_neg, *fixture.chw)

    def loss_of_a(x: np.ndarray) -> float:
        return perceptual_loss_and_grad(x, fixture.v2_neg, *fixture.chw)[0]

    def loss_of_b(x: np.ndarray) -> float:
        return perceptual_loss_and_grad(fixture.v1_neg, x, *fixture.chw)[0]

    return [
        (grad_a, finite_diff_grad(loss_of_a, fixture.v1_neg, eps)),
        (grad_b, finite_diff_grad(loss_of_b, fixture.v2_neg, eps)),
    ]


def _l_attr_pairs(fixture: AttributeFixture, eps: float) -> List[Tuple[np.ndarray, np.ndarray]]:
    v, s, label = fixture.v, fixture.s, fixture.label
    _, _, grad_s, grad_v = attr_loss_and_grad(v, s, label)

    def loss_of_s(x: np.ndarray) -> float:
        return attr_loss_and_grad(v, CombinationEmbedding(x), label)[1]

    def loss_of_v(x: np.ndarray) -> float:
        return attr_loss_and_grad(ImageFeatures(x, v.h, v.w), s, label)[1]

    return [
        (grad_s, finite_diff_grad(loss_of_s, s.s, eps)),
        (grad_v, finite_diff_grad(loss_of_v, v.v, eps)),
    ]


def gradcheck(target: str, fixture: Fixture, eps: Optional[float] = None, tol: Optional[float] = None,
              nce_standard: bool = False) -> GradcheckReport:
    '''Compare the analytic gradient of a loss with central finite differences.

    Args:
        target(str): One of l_diff, l_per or l_attr.
        fixture(Fixture): Inputs matching the target.
        eps(float, optional): Finite-difference step. Defaults to the GRADCHECK_EPS setting.
        tol(float, optional): Largest accepted relative error. Defaults to the GRADCHECK_TOL setting.
        nce_standard(bool, optional): Check the standard InfoNCE variant of l_diff. Defaults to False.

    Raises:
        AttrContrastError: The fixture has zero-norm vectors or a clamped score.

    Returns:
        GradcheckReport: Largest elementwise relative error and whether it is within tol.
    '''
    _check_target(target)
    eps = settings.ATTRCONTRAST['GRADCHECK_EPS'] if eps is None else eps
    tol = settings.ATTRCONTRAST['GRADCHECK_TOL'] if tol is None else tol
    if not tol > 0:
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='tol', value=tol, allowed='(0, inf)')
    checks: Dict[str, Callable[[], List[Tuple[np.ndarray, np.ndarray]]]] = {
        'l_diff': lambda: _l_diff_pairs(fixture, eps, nce_standard),
        'l_per': lambda: _l_per_pairs(fixture, eps),
        'l_attr': lambda: _l_attr_pairs(fixture, eps),
    }
    try:
        pairs = checks[target]()
    except AttrContrastError as exc:
        raise _degenerate(exc)

    max_rel_error = max(float(np.max(relative_error(analytic, numeric))) for analytic, numeric in pairs)
    report = GradcheckReport(target, float(eps), float(tol), max_rel_error, max_rel_error < tol)
    logger.debug(Template('gradcheck $target: max relative error $error').substitute(
        target=target, error=max_rel_error))
    return report


def random_fixture(target: str, seed: int, n: int = 3, dim: int = 8) -> Fixture:
    '''A seeded, well-conditioned fixture for the target.'''
    _check_target(target)
    if not 0 <= seed <= MAX_SEED:
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='seed', value=seed, allowed='[0, 2^64 - 1]')
    generator = np.random.Generator(np.random.PCG64(seed))
    if target == 'l_diff':
        return ContrastiveBatch.from_arrays({name: generator.standard_normal((n, dim)) for name in SEXTET_FIELDS})
    if target == 'l_per':
        return PerceptualFixture(generator.standard_normal(dim), generator.standard_normal(dim), (2, 2, dim // 4 or 1))
    # Small magnitudes keep the match score away from the clamp.
    v = ImageFeatures(0.5 * generator.standard_normal((4, 6)), 2, 3)
    s = CombinationEmbedding(0.5 * generator.standard_normal(4))
    return AttributeFixture(v, s, int(generator.integers(0, 2)))


def load_fixture(target: str, directory: PathLike, label: int = 1,
                 chw: Optional[Tuple[int, int, int]] = None) -> Fixture:
    '''Read the fixture files of a target from a directory.

    Args:
        target(str): One of l_diff, l_per or l_attr.
        directory(PathLike): Directory holding the fixture files.
        label(int, optional): Match label of an l_attr fixture. Defaults to 1.
        chw(tuple, optional): Volume (c, h, w) of an l_per fixture. Defaults to (length, 1, 1).

    Raises:
        AttrContrastError: Missing or malformed files, or zero-norm vectors.
    '''
    _check_target(target)
    directory = Path(directory)
    try:
        if target == 'l_diff':
            return ContrastiveBatch.read(directory)
        if target == 'l_per':
            v1_neg = read_tensor(directory / 'v1_neg.catf')
            v2_neg = read_tensor(directory / 'v2_neg.catf')
            return PerceptualFixture(v1_neg, v2_neg, chw or (v1_neg.size, 1, 1))
        return AttributeFixture(
            ImageFeatures.from_tensor(read_tensor(directory / 'v.catf')),
            CombinationEmbedding(read_tensor(directory / 's.catf')),
            MatchLabel(label).label,
        )
    except AttrContrastError as exc:
        raise _degenerate(exc)
