from pathlib import Path
from typing import Any, Dict, List

from ...config import Config
from ...metrics import fid_from_features
from ...tensorio import read_tensor
from ..base import AttrContrastCommand


class Command(AttrContrastCommand):
    help = 'FID between two (n, d) feature sets, rows being samples.'

    def add_arguments(self, parser) -> None:
        super().add_arguments(parser)
        parser.add_argument('--a', required=True, help='first feature set (CATF or CSV)')
        parser.add_argument('--b', required=True, help='second feature set (CATF or CSV)')

    def input_paths(self, options: Dict[str, Any]) -> List[Path]:
        return super().input_paths(options) + [Path(options['a']), Path(options['b'])]

    def run(self, config: Config, fields: Dict[str, Any], /, **options: Any) -> Dict[str, Any]:
        return {'fid': fid_from_features(read_tensor(options['a']), read_tensor(options['b']))}
