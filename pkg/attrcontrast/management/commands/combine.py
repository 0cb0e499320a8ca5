from typing import Any, Dict

from ...combiner import SeededRng, combine
from ...config import Config
from ..base import AttrContrastCommand


class Command(AttrContrastCommand):
    help = 'Draw one split of M attributes into two disjoint, non-empty combinations.'

    def add_arguments(self, parser) -> None:
        super().add_arguments(parser)
        parser.add_argument('--m', type=int, required=True, help='number of attributes')
        parser.add_argument('--seed', type=int, required=True, help='seed in [0, 2^64 - 1]')

    def run(self, config: Config, fields: Dict[str, Any], /, **options: Any) -> Dict[str, Any]:
        return combine(options['m'], SeededRng(options['seed'])).as_dict()
