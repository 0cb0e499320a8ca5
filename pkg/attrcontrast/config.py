'''Run configuration: settings.ATTRCONTRAST defaults merged with an optional JSON file.'''
import json
from pathlib import Path
from typing import Any, Dict, Optional, Type

from attr import attrib, attrs, evolve
from django.conf import settings
from rest_framework import serializers

from .errors import AttrContrastError, ErrorReason
from .features import FeatureExtractor
from .objectives import LossWeights, preset_weights
from .serializers import ConfigSerializer
from .tensorio import PathLike


def _positive(instance, attribute, value: int) -> None:
    if value < 1:
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name=attribute.name, value=value, allowed='[1, inf)')


@attrs(frozen=True, slots=True)
class Config:
    embedding_dim: int = attrib(validator=_positive)
    extractor: FeatureExtractor = attrib()
    loss_weights: LossWeights = attrib()
    seed: int = attrib()
    nce_standard: bool = attrib()
    lexicon_path: Path = attrib(converter=Path)

    @property
    def gamma(self) -> float:
        return self.loss_weights.gamma


def read_json(path: PathLike) -> Any:
    '''Parse a JSON file; a missing file and a malformed one are both I/O errors.'''
    try:
        with open(path, encoding='utf-8') as f:
            return json.load(f)
    except OSError:
        raise AttrContrastError(ErrorReason.MISSING_FILE, path=path)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise AttrContrastError(ErrorReason.MALFORMED_FILE, path=path, detail=f'invalid JSON ({exc})')


def validate_json(data: Any, serializer_class: Type[serializers.Serializer], path: PathLike,
                  context: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    '''Run a serializer over parsed JSON, turning its errors into an invalid config error.'''
    if not isinstance(data, dict):
        raise AttrContrastError(ErrorReason.INVALID_CONFIG, detail=f'{path}: expected a JSON object')
    serializer = serializer_class(data=data, context=context or {})
    if not serializer.is_valid():
        errors = json.dumps(serializer.errors, sort_keys=True, default=str)
        raise AttrContrastError(ErrorReason.INVALID_CONFIG, detail=f'{path}: {errors}')
    return serializer.validated_data


def _loss_weights(defaults: Dict[str, float], gamma: float, data: Dict[str, Any]) -> LossWeights:
    if 'preset' in data:
        base = preset_weights(data['preset'], gamma)
    else:
        base = LossWeights(gamma=gamma, **defaults)
    return evolve(base, **{name: value for name, value in data.items() if name != 'preset'})


def build_config(data: Dict[str, Any]) -> Config:
    '''Merge validated config fields over the settings defaults.'''
    defaults = settings.ATTRCONTRAST
    extractor = {**defaults['EXTRACTOR'], **data.get('extractor', {})}
    return Config(
        embedding_dim=data.get('embedding_dim', defaults['EMBEDDING_DIM']),
        extractor=FeatureExtractor(**extractor),
        loss_weights=_loss_weights(defaults['LOSS_WEIGHTS'], data.get('gamma', defaults['GAMMA']),
                                   data.get('loss_weights', {})),
        seed=data.get('seed', defaults['SEED']),
        nce_standard=data.get('nce_standard', defaults['NCE_STANDARD']),
        lexicon_path=data.get('lexicon', defaults['LEXICON_PATH']),
    )


def load_config(path: Optional[PathLike] = None,
                serializer_class: Type[serializers.Serializer] = ConfigSerializer) -> Dict[str, Any]:
    '''Validated fields of a config file, or an empty dict without one.

    Relative lexicon paths are resolved against the config file's directory.

    Raises:
        AttrContrastError: The file is missing, not JSON, or fails validation.
    '''
    if path is None:
        return {}
    return validate_json(read_json(path), serializer_class, path, {'base_dir': Path(path).parent})
