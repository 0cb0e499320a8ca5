from pathlib import Path
from typing import Any, Dict, List

from ...config import Config, read_json, validate_json
from ...metrics import LpipsLayers
from ...metrics import lpips as lpips_distance
from ...serializers import LpipsManifestSerializer
from ...tensorio import read_tensor
from ..base import AttrContrastCommand


def read_manifest(path: Path) -> LpipsLayers:
    '''Layers listed in a manifest, e.g. {"layers": [{"v": "v1.catf", "v_hat": "w1.catf", "omega": "o1.catf"}]}.

    File names are resolved against the manifest's directory.
    '''
    entries = validate_json(read_json(path), LpipsManifestSerializer, path)['layers']
    return LpipsLayers.from_triples(
        [tuple(read_tensor(path.parent / entry[key]) for key in ('v', 'v_hat', 'omega')) for entry in entries])


class Command(AttrContrastCommand):
    help = 'LPIPS distance from per-layer feature maps and channel weights.'

    def add_arguments(self, parser) -> None:
        super().add_arguments(parser)
        parser.add_argument('--layers', required=True, help='JSON manifest of per-layer tensor files')

    def input_paths(self, options: Dict[str, Any]) -> List[Path]:
        manifest = Path(options['layers'])
        layers = read_json(manifest)['layers']
        tensors = [manifest.parent / entry[key] for entry in layers for key in ('v', 'v_hat', 'omega')]
        return super().input_paths(options) + [manifest] + tensors

    def run(self, config: Config, fields: Dict[str, Any], /, **options: Any) -> Dict[str, Any]:
        return {'lpips': lpips_distance(read_manifest(Path(options['layers'])))}
