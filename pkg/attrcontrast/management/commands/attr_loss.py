from pathlib import Path
from typing import Any, Dict, List

from ...config import Config
from ...discriminator import attr_loss, attribute_match_score, attribute_region_correlation
from ...features import CombinationEmbedding, ImageFeatures
from ...tensorio import read_tensor
from ..base import AttrContrastCommand


class Command(AttrContrastCommand):
    help = 'Attribute match score of (v, s) and its binary cross-entropy against a label.'

    def add_arguments(self, parser) -> None:
        super().add_arguments(parser)
        parser.add_argument('--features', required=True, help='image features, (d, p) or (d, h, w)')
        parser.add_argument('--s', required=True, help='combination embedding, length d')
        parser.add_argument('--label', type=int, choices=(0, 1), required=True)

    def input_paths(self, options: Dict[str, Any]) -> List[Path]:
        return super().input_paths(options) + [Path(options['features']), Path(options['s'])]

    def run(self, config: Config, fields: Dict[str, Any], /, **options: Any) -> Dict[str, Any]:
        v = ImageFeatures.from_tensor(read_tensor(options['features']))
        s = CombinationEmbedding(read_tensor(options['s']))
        score = attribute_match_score(s, attribute_region_correlation(v, s))
        loss = attr_loss([(score, options['label'])])
        return {'score': score, 'l_attr': loss}
