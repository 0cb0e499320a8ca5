import hashlib
import json
import logging
import time
from pathlib import Path
from string import Template
from typing import Any, Dict, Iterable, List, Type, Union

from attr import attrib, attrs
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers
from rest_framework.renderers import JSONRenderer

from ..config import Config, build_config, load_config
from ..errors import AttrContrastError
from ..serializers import ConfigSerializer, RunReportSerializer


logging.basicConfig(
    format='[%(asctime)s] %(levelname)s {%(name)s:%(lineno)d} %(message)s',
    datefmt='%d/%b/%Y %H:%M:%S',
    level=settings.ATTRCONTRAST['LOG_LEVEL']
)

logger = logging.getLogger(__name__)

# Options Django adds to every command; they do not change a run's result.
DJANGO_OPTIONS = frozenset((
    'verbosity', 'settings', 'pythonpath', 'traceback', 'no_color', 'force_color', 'skip_checks', 'stdout', 'stderr',
))

Output = Union[Dict[str, Any], List[Dict[str, Any]]]


def render_json(data: Any) -> str:
    return JSONRenderer().render(data).decode('utf-8')


def render_errors(*errors: AttrContrastError) -> str:
    '''Errors in the layout printed on standard error: {"errors": [...]}.'''
    return render_json({'errors': [error.as_error() for error in errors]})


class AttrCommandError(CommandError):
    '''CommandError carrying the AttrContrastError that ended the run.'''

    def __init__(self, error: AttrContrastError) -> None:
        self.error = error
        super().__init__(render_errors(error), returncode=error.status)


@attrs(frozen=True, slots=True)
class RunReport:
    subcommand: str = attrib()
    inputs_digest: str = attrib()
    outputs: Output = attrib()
    wall_time: float = attrib()


def inputs_digest(subcommand: str, options: Dict[str, Any], paths: Iterable[Path]) -> str:
    '''sha256 over the subcommand, its result-affecting options and the bytes of every input file.'''
    digest = hashlib.sha256(subcommand.encode('utf-8'))
    relevant = {name: value for name, value in options.items() if name not in DJANGO_OPTIONS}
    digest.update(json.dumps(relevant, sort_keys=True, default=str).encode('utf-8'))
    for path in paths:
        files = sorted(p for p in path.rglob('*') if p.is_file()) if path.is_dir() else [path]
        for file in files:
            digest.update(file.name.encode('utf-8'))
            digest.update(file.read_bytes())
    return digest.hexdigest()


class AttrContrastCommand(BaseCommand):
    '''Base of every subcommand.

    Subclasses implement ``run`` and return one JSON object, or a list of
    objects when ``jsonl`` is set. Results go to standard output; the run
    report and diagnostics go to standard error through logging.
    '''

    requires_system_checks = []
    jsonl = False
    config_serializer_class: Type[serializers.Serializer] = ConfigSerializer
    config_required = False

    def add_arguments(self, parser) -> None:
        parser.add_argument('--config', required=self.config_required, help='JSON file overriding the defaults')

    def run(self, config: Config, fields: Dict[str, Any], /, **options: Any) -> Output:
        raise NotImplementedError

    def input_paths(self, options: Dict[str, Any]) -> List[Path]:
        '''Files and directories whose contents determine the result.'''
        return [Path(options['config'])] if options.get('config') else []

    def write_output(self, output: Output) -> None:
        if self.jsonl:
            for line in output:
                self.stdout.write(render_json(line))
        else:
            self.stdout.write(render_json(output))

    def handle(self, *args: Any, **options: Any) -> None:
        started = time.perf_counter()
        try:
            fields = load_config(options.get('config'), self.config_serializer_class)
            self.config = build_config(fields)
            output = self.run(self.config, fields, **options)
            digest = inputs_digest(self.name, options, self.input_paths(options))
        except AttrContrastError as error:
            logger.error(Template('$name failed: $error').substitute(name=self.name, error=error))
            raise AttrCommandError(error) from error
        self.write_output(output)

        report = RunReport(self.name, digest, output, time.perf_counter() - started)
        logger.info(Template('run report: $report').substitute(report=render_json(RunReportSerializer(report).data)))

    @property
    def name(self) -> str:
        return self.__module__.rsplit('.', 1)[-1].replace('_', '-')
