import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from ...attention import ContrastiveBatch, attended_sextet, cmam
from ...combiner import CombinationSplit
from ...config import Config, read_json, validate_json
from ...errors import AttrContrastError, ErrorReason
from ...features import CombinationEmbedding, ImageFeatures, embed_combination
from ...parser import Attribute
from ...serializers import ParsedSentenceSerializer, SplitSerializer
from ...tensorio import read_tensor
from ..base import AttrContrastCommand


IMAGE_FILES = ('orig.catf', 'edit1.catf', 'edit2.catf')


def read_parsed_line(path: Path, line: int) -> Dict[str, Any]:
    '''The line-th (0-based) object of a parse output file.'''
    try:
        lines = [text for text in path.read_text(encoding='utf-8').splitlines() if text.strip()]
    except OSError:
        raise AttrContrastError(ErrorReason.MISSING_FILE, path=path)
    except UnicodeDecodeError as exc:
        raise AttrContrastError(ErrorReason.MALFORMED_FILE, path=path, detail=f'not UTF-8 ({exc.reason})')
    if not 0 <= line < len(lines):
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='line', value=line, allowed=f'[0, {len(lines) - 1}]')
    try:
        data = json.loads(lines[line])
    except json.JSONDecodeError as exc:
        raise AttrContrastError(ErrorReason.MALFORMED_FILE, path=path, detail=f'line {line} is not JSON ({exc})')
    return validate_json(data, ParsedSentenceSerializer, path)


def embeddings_from_parse(parsed: Dict[str, Any], split: Optional[Dict[str, Any]], config: Config,
                          path: Path) -> Tuple[CombinationEmbedding, CombinationEmbedding]:
    '''s1 and s2 of a parsed sentence under a split, with the configured dimension and seed.'''
    split = split or parsed.get('split')
    if split is None:
        raise AttrContrastError(ErrorReason.INVALID_ARGUMENTS, detail=f'{path} has no split; pass --split')
    attributes = [Attribute(tuple(text.split())) for text in parsed['attributes']]
    CombinationSplit(split['c1'], split['c2'], len(attributes))
    return tuple(
        embed_combination(attributes, split[name], config.embedding_dim, config.seed) for name in ('c1', 'c2'))


class Command(AttrContrastCommand):
    help = 'Spatial and channel attention maps of two combinations, optionally the attended sextet.'

    def add_arguments(self, parser) -> None:
        super().add_arguments(parser)
        parser.add_argument('--features', required=True, help='image features, (d, p) or (d, h, w)')
        parser.add_argument('--s1', help='first combination embedding')
        parser.add_argument('--s2', help='second combination embedding')
        parser.add_argument('--attributes', help='parse output; embeds s1 and s2 from its attributes')
        parser.add_argument('--line', type=int, default=0, help='0-based line of --attributes')
        parser.add_argument('--split', help='combine output; defaults to the split stored on the parse line')
        parser.add_argument('--images', help=f'directory with {", ".join(IMAGE_FILES)}')
        parser.add_argument('--out-dir', help='where the attended sextet is written')
        parser.add_argument('--channel-attention', action='store_true', help='also scale channels by the channel map')

    def input_paths(self, options: Dict[str, Any]) -> List[Path]:
        names = ('features', 's1', 's2', 'attributes', 'split')
        paths = [Path(options[name]) for name in names if options[name]]
        if options['images']:
            paths.extend(Path(options['images']) / name for name in IMAGE_FILES)
        return super().input_paths(options) + paths

    def embeddings(self, config: Config, options: Dict[str, Any]) -> Tuple[CombinationEmbedding, CombinationEmbedding]:
        if options['attributes']:
            path = Path(options['attributes'])
            split = None
            if options['split']:
                split = validate_json(read_json(options['split']), SplitSerializer, options['split'])
            return embeddings_from_parse(read_parsed_line(path, options['line']), split, config, path)
        if not (options['s1'] and options['s2']):
            raise AttrContrastError(ErrorReason.INVALID_ARGUMENTS, detail='give --s1 and --s2, or --attributes')
        return CombinationEmbedding(read_tensor(options['s1'])), CombinationEmbedding(read_tensor(options['s2']))

    def run(self, config: Config, fields: Dict[str, Any], /, **options: Any) -> Dict[str, Any]:
        if bool(options['images']) != bool(options['out_dir']):
            raise AttrContrastError(ErrorReason.INVALID_ARGUMENTS, detail='--images and --out-dir go together')
        v = ImageFeatures.from_tensor(read_tensor(options['features']))
        s1, s2 = self.embeddings(config, options)
        maps = cmam(v, s1, s2)
        output = {'spatial': maps.spatial.tolist(), 'channel': maps.channel.tolist()}

        if options['images']:
            images = [read_tensor(Path(options['images']) / name) for name in IMAGE_FILES]
            sextet = attended_sextet(*images, maps, config.extractor, options['channel_attention'])
            written = ContrastiveBatch([sextet]).write(options['out_dir'])
            output['sextet'] = [path.name for path in written]
        return output
