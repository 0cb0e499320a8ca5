import enum
from string import Template
from typing import Any, Dict


VALIDATION_ERROR_STATUS = 1
IO_ERROR_STATUS = 2


@enum.unique
class ErrorReason(enum.Enum):
    '''Aggregated class for error codes. 1xxx are validation errors, 2xxx are I/O errors.'''

    INTERNAL_ERROR = 1000
    INSUFFICIENT_ATTRIBUTES = 1001
    OUT_OF_RANGE = 1002
    SHAPE_MISMATCH = 1003
    DEGENERATE_VECTOR = 1004
    DEGENERATE_FEATURE = 1005
    NON_FINITE_VALUE = 1006
    INSUFFICIENT_SAMPLES = 1007
    ASYMMETRIC_MATRIX = 1008
    EMPTY_INPUT = 1009
    DEGENERATE_FIXTURE = 1010
    INVALID_CONFIG = 1011
    UNKNOWN_SUBCOMMAND = 1012
    INVALID_ARGUMENTS = 1013
    MALFORMED_FILE = 2001
    MISSING_FILE = 2002


class AttrContrastError(ValueError):
    '''Error raised by every module of this app, tagged with an ErrorReason.'''

    ATTRIBUTES_FOR_REASON = {
        ErrorReason.INTERNAL_ERROR: {
            'title': 'internal error',
            'detail_template': Template('$detail'),
            'status': VALIDATION_ERROR_STATUS,
        },
        ErrorReason.INSUFFICIENT_ATTRIBUTES: {
            'title': 'insufficient attributes',
            'detail_template': Template('$count attribute(s) cannot form two non-empty combinations'),
            'status': VALIDATION_ERROR_STATUS,
        },
        ErrorReason.OUT_OF_RANGE: {
            'title': 'out of range',
            'detail_template': Template('$name=`$value` is outside $allowed'),
            'status': VALIDATION_ERROR_STATUS,
        },
        ErrorReason.SHAPE_MISMATCH: {
            'title': 'shape mismatch',
            'detail_template': Template('$detail'),
            'status': VALIDATION_ERROR_STATUS,
        },
        ErrorReason.DEGENERATE_VECTOR: {
            'title': 'degenerate vector',
            'detail_template': Template('$name has zero norm'),
            'status': VALIDATION_ERROR_STATUS,
        },
        ErrorReason.DEGENERATE_FEATURE: {
            'title': 'degenerate feature',
            'detail_template': Template('layer $layer has a zero channel vector at position $position'),
            'status': VALIDATION_ERROR_STATUS,
        },
        ErrorReason.NON_FINITE_VALUE: {
            'title': 'non-finite value',
            'detail_template': Template('$name contains NaN or Inf'),
            'status': VALIDATION_ERROR_STATUS,
        },
        ErrorReason.INSUFFICIENT_SAMPLES: {
            'title': 'insufficient samples',
            'detail_template': Template('$count sample(s) given, at least 2 are needed'),
            'status': VALIDATION_ERROR_STATUS,
        },
        ErrorReason.ASYMMETRIC_MATRIX: {
            'title': 'asymmetric matrix',
            'detail_template': Template('max |A - A^T| = $gap exceeds $tolerance'),
            'status': VALIDATION_ERROR_STATUS,
        },
        ErrorReason.EMPTY_INPUT: {
            'title': 'empty input',
            'detail_template': Template('$name must not be empty'),
            'status': VALIDATION_ERROR_STATUS,
        },
        ErrorReason.DEGENERATE_FIXTURE: {
            'title': 'degenerate fixture',
            'detail_template': Template('$detail'),
            'status': VALIDATION_ERROR_STATUS,
        },
        ErrorReason.INVALID_CONFIG: {
            'title': 'invalid config',
            'detail_template': Template('$detail'),
            'status': VALIDATION_ERROR_STATUS,
        },
        ErrorReason.UNKNOWN_SUBCOMMAND: {
            'title': 'unknown subcommand',
            'detail_template': Template('`$name` is not one of: $choices'),
            'status': VALIDATION_ERROR_STATUS,
        },
        ErrorReason.INVALID_ARGUMENTS: {
            'title': 'invalid arguments',
            'detail_template': Template('$detail'),
            'status': VALIDATION_ERROR_STATUS,
        },
        ErrorReason.MALFORMED_FILE: {
            'title': 'malformed file',
            'detail_template': Template('$path: $detail'),
            'status': IO_ERROR_STATUS,
        },
        ErrorReason.MISSING_FILE: {
            'title': 'missing file',
            'detail_template': Template('$path cannot be opened'),
            'status': IO_ERROR_STATUS,
        },
    }

    def __init__(self, reason: ErrorReason, **context: Any) -> None:
        '''Build the error message according to reason.

        Args:
            reason(ErrorReason): The reason causing this error.
            **context: Values substituted into the reason's detail template.
        '''
        attributes = type(self).ATTRIBUTES_FOR_REASON[reason]
        self.reason = reason
        self.title = attributes['title']
        self.status = attributes['status']
        self.detail = attributes['detail_template'].safe_substitute(**context)
        self.context = context
        super().__init__(f'{self.title}: {self.detail}')

    def as_error(self) -> Dict[str, str]:
        '''Error object in the same layout the CLI prints to standard error.'''
        return {
            'code': str(self.reason.value),
            'title': self.title,
            'detail': self.detail,
            'status': str(self.status),
        }
