'''``run_cli``: the public subcommand names mapped onto the app's management commands.

    python -m attrcontrast parse --in sentences.txt
    python -m attrcontrast combine --m 4 --seed 42

Exit status is 0 on success, 1 on a validation error and 2 on an I/O error;
errors are printed to standard error as {"errors": [...]}.
'''
import logging
import os
import sys
from typing import Optional, Sequence, TextIO

import django


SUBCOMMANDS = {
    'parse': 'parse',
    'combine': 'combine',
    'attention': 'attention',
    'losses': 'losses',
    'attr-loss': 'attr_loss',
    'objective': 'objective',
    'fid': 'fid',
    'lpips': 'lpips',
    'gradcheck': 'gradcheck',
}

USAGE = 'usage: attrcontrast {' + ','.join(SUBCOMMANDS) + '} [options]\n'

logger = logging.getLogger(__name__)


def setup() -> None:
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'editbench.settings')
    django.setup()


def run_cli(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None,
            stderr: Optional[TextIO] = None) -> int:
    '''Run one subcommand.

    Args:
        argv(Sequence[str], optional): Subcommand name and its flags. Defaults to sys.argv[1:].
        stdout(TextIO, optional): Receives the JSON/JSONL result. Defaults to sys.stdout.
        stderr(TextIO, optional): Receives usage text and errors. Defaults to sys.stderr.

    Returns:
        int: The exit status.
    '''
    setup()
    from django.core.management import call_command
    from django.core.management.base import CommandError

    from .errors import AttrContrastError, ErrorReason
    from .management.base import AttrCommandError, render_errors

    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr

    if not argv or argv[0] not in SUBCOMMANDS:
        error = AttrContrastError(ErrorReason.UNKNOWN_SUBCOMMAND, name=argv[0] if argv else '',
                                  choices=', '.join(SUBCOMMANDS))
        stderr.write(USAGE)
        stderr.write(render_errors(error) + '\n')
        return error.status

    try:
        call_command(SUBCOMMANDS[argv[0]], *argv[1:], stdout=stdout, stderr=stderr)
    except AttrCommandError as exc:
        stderr.write(str(exc) + '\n')
        return exc.returncode
    except CommandError as exc:
        # argparse errors inside the subcommand
        error = AttrContrastError(ErrorReason.INVALID_ARGUMENTS, detail=str(exc))
        stderr.write(render_errors(error) + '\n')
        return error.status
    return 0


def main() -> None:
    sys.exit(run_cli())
