from pathlib import Path
from typing import Any, Dict, List

from ...combiner import SeededRng, combine
from ...config import Config
from ...errors import AttrContrastError, ErrorReason
from ...parser import STRATEGIES, Lexicon, parse_sentence, read_pretagged
from ..base import AttrContrastCommand


def read_sentences(path: Path) -> List[str]:
    '''Non-blank lines of a UTF-8 text file, one sentence each.'''
    try:
        text = path.read_text(encoding='utf-8')
    except OSError:
        raise AttrContrastError(ErrorReason.MISSING_FILE, path=path)
    except UnicodeDecodeError as exc:
        raise AttrContrastError(ErrorReason.MALFORMED_FILE, path=path, detail=f'not UTF-8 ({exc.reason})')
    return [line for line in text.splitlines() if line.strip()]


class Command(AttrContrastCommand):
    help = 'Parse each sentence of a file into attributes; one JSON line per sentence.'
    jsonl = True

    def add_arguments(self, parser) -> None:
        super().add_arguments(parser)
        parser.add_argument('--in', dest='input', required=True, help='UTF-8 file, one sentence per line')
        parser.add_argument('--lexicon', help='"word<TAB>TAG" lexicon; defaults to the configured one')
        parser.add_argument('--pretagged', action='store_true', help='lines are "word_TAG" items')
        parser.add_argument('--strategy', choices=list(STRATEGIES), default='rules')
        parser.add_argument('--split', action='store_true', help='also draw a combination split per sentence')
        parser.add_argument('--seed', type=int, help='seed of the splits, required with --split')

    def input_paths(self, options: Dict[str, Any]) -> List[Path]:
        paths = super().input_paths(options) + [Path(options['input'])]
        if not options['pretagged']:
            paths.append(Path(options['lexicon'] or self.config.lexicon_path))
        return paths

    def run(self, config: Config, fields: Dict[str, Any], /, **options: Any) -> List[Dict[str, Any]]:
        if options['split'] and options['seed'] is None:
            raise AttrContrastError(ErrorReason.INVALID_ARGUMENTS, detail='--split needs --seed')
        sentences = read_sentences(Path(options['input']))
        strategy = STRATEGIES[options['strategy']]
        if options['pretagged']:
            parsed = [strategy(read_pretagged(sentence)) for sentence in sentences]
        else:
            lexicon = Lexicon.load(options['lexicon'] or config.lexicon_path)
            parsed = [parse_sentence(sentence, lexicon, options['strategy']) for sentence in sentences]

        lines = [{'attributes': [attribute.text for attribute in attributes]} for attributes in parsed]
        if options['split']:
            rng = SeededRng(options['seed'])
            for line, attributes in zip(lines, parsed):
                line['split'] = combine(len(attributes), rng).as_dict() if len(attributes) >= 2 else None
        return lines
