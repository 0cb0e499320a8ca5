from pathlib import Path
from typing import Any, Dict, List

from ...attention import ContrastiveBatch, batch_perceptual_loss, contrastive_loss
from ...config import Config
from ..base import AttrContrastCommand


class Command(AttrContrastCommand):
    help = 'Contrastive and perceptual losses of an attended batch directory.'

    def add_arguments(self, parser) -> None:
        super().add_arguments(parser)
        parser.add_argument('--batch', required=True, help='directory with v1_pos.catf ... v_ori2.catf')
        parser.add_argument('--chw', type=int, nargs=3, metavar=('C', 'H', 'W'),
                            help='feature volume of the perceptual loss; defaults to (length, 1, 1)')

    def input_paths(self, options: Dict[str, Any]) -> List[Path]:
        return super().input_paths(options) + [Path(options['batch'])]

    def run(self, config: Config, fields: Dict[str, Any], /, **options: Any) -> Dict[str, Any]:
        batch = ContrastiveBatch.read(options['batch'])
        chw = options['chw'] or (batch.sextets[0].v1_neg.size, 1, 1)
        return {
            'l_diff': contrastive_loss(batch, config.nce_standard),
            'l_per': batch_perceptual_loss(batch, *chw),
        }
