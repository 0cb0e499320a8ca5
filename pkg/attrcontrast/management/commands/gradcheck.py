from pathlib import Path
from typing import Any, Dict, List

from ...config import Config
from ...gradcheck import GRADCHECK_TARGETS, gradcheck, load_fixture, random_fixture
from ..base import AttrContrastCommand


class Command(AttrContrastCommand):
    help = 'Check the analytic gradient of l_diff, l_per or l_attr against central finite differences.'

    def add_arguments(self, parser) -> None:
        super().add_arguments(parser)
        parser.add_argument('--target', choices=GRADCHECK_TARGETS, required=True)
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--fixture', help='directory holding the fixture files of the target')
        source.add_argument('--seed', type=int, help='draw a random fixture from this seed')
        parser.add_argument('--eps', type=float, help='finite-difference step; defaults to the GRADCHECK_EPS setting')
        parser.add_argument('--tol', type=float, help='largest accepted relative error; defaults to the GRADCHECK_TOL setting')
        parser.add_argument('--label', type=int, choices=(0, 1), default=1, help='label of an l_attr fixture')
        parser.add_argument('--chw', type=int, nargs=3, metavar=('C', 'H', 'W'), help='volume of an l_per fixture')

    def input_paths(self, options: Dict[str, Any]) -> List[Path]:
        fixture = [Path(options['fixture'])] if options['fixture'] else []
        return super().input_paths(options) + fixture

    def run(self, config: Config, fields: Dict[str, Any], /, **options: Any) -> Dict[str, Any]:
        target = options['target']
        if options['fixture']:
            fixture = load_fixture(target, options['fixture'], options['label'], options['chw'])
        else:
            fixture = random_fixture(target, options['seed'])
        return gradcheck(target, fixture, options['eps'], options['tol'], config.nce_standard).as_dict()
