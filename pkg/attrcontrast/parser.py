'''Sentence parsing into editable attributes.

A query sentence is tokenized, POS-tagged from a lexicon and then split
left-to-right into "adjective-noun" attributes by a small state machine.
Flush rules:

  1. a comma after a token flushes the buffer;
  2. "has" and "with" flush the buffer;
  3. "and" flushes only when the buffer already holds a noun and the next
     content word is an adjective, otherwise it is skipped;
  4. adjectives and nouns are appended to the buffer;
  5. the end of the sentence flushes the buffer.

A flush emits the buffer unless it is empty or the single word "bird"
(whatever its tag). A buffer of repeated "bird" nouns is dropped too.
'''
import enum
import logging
from pathlib import Path
from string import Template
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from attr import attrib, attrs
from attr.validators import instance_of
from nltk.tag import DefaultTagger, SequentialBackoffTagger, UnigramTagger, str2tuple
from nltk.tokenize import RegexpTokenizer

from .errors import AttrContrastError, ErrorReason


logger = logging.getLogger(__name__)


@enum.unique
class PosTag(enum.Enum):
    '''The five lexical categories the parser distinguishes.'''

    NN = 'NN'
    NNS = 'NNS'
    JJ = 'JJ'
    CC = 'CC'
    OTHER = 'OTHER'

    @classmethod
    def fold(cls, tag: str) -> 'PosTag':
        '''Fold a Penn Treebank tag (or one of our own) onto the five categories.

        Args:
            tag(str): Tag such as "NNP", "JJR" or "VBZ".

        Returns:
            PosTag: NN, NNS, JJ, CC, or OTHER for anything else.
        '''
        return PENN_FOLDING.get(tag.strip().upper(), cls.OTHER)


PENN_FOLDING = {
    'NN': PosTag.NN,
    'NNP': PosTag.NN,
    'NNS': PosTag.NNS,
    'NNPS': PosTag.NNS,
    'JJ': PosTag.JJ,
    'JJR': PosTag.JJ,
    'JJS': PosTag.JJ,
    'CC': PosTag.CC,
    'OTHER': PosTag.OTHER,
}

CONTENT_TAGS = frozenset({PosTag.NN, PosTag.NNS, PosTag.JJ})
STOP_WORDS = frozenset({'has', 'with', 'and', 'is'})
FLUSH_WORDS = frozenset({'has', 'with'})
CONJUNCTION = 'and'
SUBJECT_WORD = 'bird'

TRAILING_PUNCTUATION = '.,;:!?"\')]}'

# Words keep internal hyphens/apostrophes ("eye-ring"); commas are kept as
# separate pieces so they can be folded into the preceding token.
WORD_TOKENIZER = RegexpTokenizer(r"[^\W_]+(?:['-][^\W_]+)*|,")


def _is_bare_word(instance, attribute, value: str) -> None:
    if not value or any(ch.isspace() for ch in value) or value[-1] in TRAILING_PUNCTUATION:
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='token', value=value,
                                allowed='non-empty words without whitespace or trailing punctuation')


def _is_attribute_words(instance, attribute, value: Tuple[str, ...]) -> None:
    if not value:
        raise AttrContrastError(ErrorReason.EMPTY_INPUT, name='attribute')
    if STOP_WORDS.intersection(value):
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='attribute', value=' '.join(value),
                                allowed='words outside {has, with, and, is}')
    if value == (SUBJECT_WORD,):
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='attribute', value=SUBJECT_WORD,
                                allowed='attributes other than a bare subject word')


@attrs(frozen=True, slots=True)
class Token:
    '''A lowercased word, flagged when the original text had a comma after it.'''

    text: str = attrib(validator=[instance_of(str), _is_bare_word])
    is_comma_boundary: bool = attrib(default=False, validator=instance_of(bool))


@attrs(frozen=True, slots=True)
class TaggedToken:
    token: Token = attrib(validator=instance_of(Token))
    tag: PosTag = attrib(validator=instance_of(PosTag))

    @property
    def text(self) -> str:
        return self.token.text


@attrs(frozen=True, slots=True)
class Attribute:
    '''One editable "adjective-noun" unit, e.g. ("black", "eye", "rings").'''

    words: Tuple[str, ...] = attrib(converter=tuple, validator=_is_attribute_words)

    @property
    def text(self) -> str:
        return ' '.join(self.words)

    def __str__(self) -> str:
        return self.text


@attrs(slots=True)
class ParserState:
    '''f1 is set once a noun is buffered, f2 once an adjective is buffered.'''

    f1: int = attrib(default=0)
    f2: int = attrib(default=0)
    buffer: List[str] = attrib(factory=list)

    def push(self, word: str, tag: PosTag) -> None:
        self.buffer.append(word)
        if tag is PosTag.JJ:
            self.f2 = 1
        else:
            self.f1 = 1

    def flush_into(self, attributes: List[Attribute]) -> None:
        bare_subject = self.buffer == [SUBJECT_WORD]
        if self.buffer and not bare_subject and (self.f2 or any(word != SUBJECT_WORD for word in self.buffer)):
            attributes.append(Attribute(self.buffer))
        self.f1 = 0
        self.f2 = 0
        self.buffer = []


class PluralSuffixTagger(SequentialBackoffTagger):
    '''Tags a word ending in "s" as NNS when its stem is a lexicon noun.'''

    def __init__(self, entries: Mapping[str, PosTag], backoff: Optional[SequentialBackoffTagger] = None) -> None:
        super().__init__(backoff)
        self._entries = entries

    def choose_tag(self, tokens, index, history):
        word = tokens[index]
        if len(word) > 1 and word.endswith('s') and self._entries.get(word[:-1]) is PosTag.NN:
            return PosTag.NNS.value
        return None


def _nn_default(instance, attribute, value: PosTag) -> None:
    if value is not PosTag.NN:
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='default_tag', value=value, allowed='{NN}')


def _lowercased_entries(entries: Mapping[str, PosTag]) -> Dict[str, PosTag]:
    return {word.lower(): tag for word, tag in entries.items()}


@attrs(frozen=True, slots=True)
class Lexicon:
    '''Word to PosTag lookup standing in for a statistical POS tagger.'''

    entries: Dict[str, PosTag] = attrib(converter=_lowercased_entries, hash=False)
    default_tag: PosTag = attrib(default=PosTag.NN, validator=_nn_default)

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'Lexicon':
        '''Read a UTF-8 lexicon file with one "word<TAB>TAG" entry per line.

        Blank lines and lines starting with "#" are ignored.

        Args:
            path(str | Path): The lexicon file.

        Raises:
            AttrContrastError: The file is missing or a line is malformed.

        Returns:
            Lexicon: The loaded lexicon.
        '''
        path = Path(path)
        try:
            lines = path.read_text(encoding='utf-8').splitlines()
        except OSError:
            raise AttrContrastError(ErrorReason.MISSING_FILE, path=path)
        except UnicodeDecodeError as exc:
            raise AttrContrastError(ErrorReason.MALFORMED_FILE, path=path, detail=f'not UTF-8 ({exc.reason})')

        entries = {}
        for number, line in enumerate(lines, start=1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            fields = line.split('\t')
            if len(fields) != 2 or not fields[0]:
                raise AttrContrastError(ErrorReason.MALFORMED_FILE, path=path,
                                        detail=f'line {number} is not "word<TAB>TAG"')
            entries[fields[0]] = PosTag.fold(fields[1])

        logger.debug(Template('Loaded $count lexicon entries from $path').substitute(
            count=len(entries), path=path))
        return cls(entries)

    def tagger(self) -> SequentialBackoffTagger:
        '''Exact lookup, then the plural suffix rule, then the default tag.'''
        default = DefaultTagger(self.default_tag.value)
        suffix = PluralSuffixTagger(self.entries, backoff=default)
        model = {word: tag.value for word, tag in self.entries.items()}
        return UnigramTagger(model=model, backoff=suffix)


def tokenize(sentence: str) -> List[Token]:
    '''Split a sentence into lowercased words, recording commas on the preceding word.

    Args:
        sentence(str): The query sentence, possibly empty.

    Returns:
        list[Token]: The tokens in sentence order.
    '''
    tokens: List[Token] = []
    for piece in WORD_TOKENIZER.tokenize(sentence.lower()):
        if piece == ',':
            if tokens:
                tokens[-1] = Token(tokens[-1].text, is_comma_boundary=True)
            continue
        tokens.append(Token(piece))
    return tokens


def pos_tag(tokens: Sequence[Token], lexicon: Lexicon) -> List[TaggedToken]:
    '''Tag each token by lexicon lookup, plural suffix rule, or the default tag.'''
    tagged = lexicon.tagger().tag([token.text for token in tokens])
    return [TaggedToken(token, PosTag.fold(tag)) for token, (_, tag) in zip(tokens, tagged)]


def read_pretagged(line: str) -> List[TaggedToken]:
    '''Read "word_TAG" items separated by spaces, bypassing the lexicon.

    A trailing comma on an item (or a standalone "," / ",_," item) marks a
    comma boundary on the preceding word.

    Args:
        line(str): e.g. "grey_JJ head_NN and_CC wings_NNS".

    Returns:
        list[TaggedToken]: The tagged tokens.
    '''
    tagged: List[TaggedToken] = []
    for item in line.split():
        word, tag = str2tuple(item.rstrip(','), sep='_')
        comma = item.endswith(',') or word.endswith(',')
        word = word.lower().rstrip(TRAILING_PUNCTUATION)
        if not word:
            if comma and tagged:
                previous = tagged[-1]
                tagged[-1] = TaggedToken(Token(previous.text, is_comma_boundary=True), previous.tag)
            continue
        tagged.append(TaggedToken(Token(word, is_comma_boundary=comma), PosTag.fold(tag or 'OTHER')))
    return tagged


def _next_content_tag(tagged: Sequence[TaggedToken], index: int) -> Optional[PosTag]:
    for item in tagged[index + 1:]:
        if item.tag is PosTag.OTHER or item.text in STOP_WORDS:
            continue
        return item.tag
    return None


def parse_attributes(tagged: Sequence[TaggedToken]) -> List[Attribute]:
    '''Split a tagged sentence into attributes, in sentence order.

    Args:
        tagged(Sequence[TaggedToken]): The tagged sentence.

    Returns:
        list[Attribute]: The attributes; empty when the sentence has no content words.
    '''
    attributes: List[Attribute] = []
    state = ParserState()
    for index, item in enumerate(tagged):
        word = item.text
        if word in FLUSH_WORDS:
            state.flush_into(attributes)
        elif word == CONJUNCTION:
            if state.f1 and _next_content_tag(tagged, index) is PosTag.JJ:
                state.flush_into(attributes)
        elif word not in STOP_WORDS and item.tag in CONTENT_TAGS:
            state.push(word, item.tag)

        if item.token.is_comma_boundary:
            state.flush_into(attributes)
    state.flush_into(attributes)
    return attributes


def parse_neighbour_pairs(tagged: Sequence[TaggedToken]) -> List[Attribute]:
    '''Baseline without parsing rules: every two neighbouring content words form one attribute.

    Only content words are paired; stop words and OTHER-tagged words are
    dropped first, so no pair can hold a stop word. A leftover single word is
    kept unless it is the bare subject word.
    '''
    words = [item.text for item in tagged if item.tag in CONTENT_TAGS and item.text not in STOP_WORDS]
    attributes = []
    for start in range(0, len(words), 2):
        pair = words[start:start + 2]
        if pair != [SUBJECT_WORD]:
            attributes.append(Attribute(pair))
    return attributes


STRATEGIES = {
    'rules': parse_attributes,
    'neighbour-pairs': parse_neighbour_pairs,
}


def parse_sentence(sentence: str, lexicon: Lexicon, strategy: str = 'rules') -> List[Attribute]:
    '''Tokenize, tag and parse one sentence with the chosen strategy.'''
    try:
        parse = STRATEGIES[strategy]
    except KeyError:
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='strategy', value=strategy,
                                allowed='{' + ', '.join(STRATEGIES) + '}')
    return parse(pos_tag(tokenize(sentence), lexicon))
