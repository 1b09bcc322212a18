import csv
import io
import json
import sys
from typing import Any, Dict, Iterable, List

from django.core.exceptions import ValidationError as DjangoValidationError
from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError

from exchange_lab.core.const import (
    EVALUATION_MODES,
    EXPERIMENTS,
    OUTPUT_FORMATS,
    RING_TURNS,
)

BAD_INPUT = 2
INVALID_RESULT = 3
VERIFICATION_FAILED = 1

# Options forwarded to RunConfigSerializer when given on the command line
CONFIG_OPTIONS = (
    "experiment",
    "modes",
    "n",
    "statistics",
    "mode",
    "turns",
    "theta",
    "shots",
    "seed",
    "format",
)


def dumps(data: Any) -> str:
    """Stable JSON text: sorted keys, UTF-8 kets kept readable"""
    return json.dumps(data, sort_keys=True, ensure_ascii=False, indent=2)


def to_csv(rows: Iterable[Dict[str, Any]], fieldnames: List[str]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames)
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


def read_json(path: str, stdin=None) -> Any:
    """
    Reads a JSON document from a file, or from stdin when path is "-"
    Args:
        path: File path or "-"
        stdin: Stream used for "-", sys.stdin by default

    Returns: Parsed JSON

    Raises:
        CommandError: unreadable file or malformed JSON, exit code 2

    """
    try:
        if path == "-":
            return json.load(stdin or sys.stdin)
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as error:
        raise CommandError(
            f"Cannot read {path}: {error.strerror}", returncode=BAD_INPUT
        )
    except json.JSONDecodeError as error:
        raise CommandError(
            f"Malformed JSON in {path}: {error}", returncode=BAD_INPUT
        )


class LabCommand(BaseCommand):
    """
    Command base translating input errors into exit code 2

    Subclasses implement `run_command`; whatever it returns is written to
    stdout by BaseCommand.execute.
    """

    stealth_options = ("stdin",)

    def handle(self, *args, **options):
        try:
            return self.run_command(*args, **options)
        except DjangoValidationError as error:
            raise CommandError(
                "; ".join(error.messages), returncode=BAD_INPUT
            )
        except ValidationError as error:
            raise CommandError(
                f"Invalid input: {json.dumps(error.detail, sort_keys=True)}",
                returncode=BAD_INPUT,
            )

    def run_command(self, *args, **options):
        raise NotImplementedError

    @staticmethod
    def add_config_arguments(parser):
        parser.add_argument("experiment", choices=EXPERIMENTS)
        parser.add_argument("--modes", type=int)
        parser.add_argument("--n", type=int, help="Ring particle count")
        parser.add_argument(
            "--statistics",
            help="fermion, boson or mixed:<matrix>[@<assignment>]",
        )
        parser.add_argument("--mode", choices=EVALUATION_MODES)
        parser.add_argument("--turns", choices=RING_TURNS)
        parser.add_argument("--theta", type=float, help="Pulse angle")
        parser.add_argument(
            "--schedule", help="JSON file with branch0/branch1 pulses"
        )
        parser.add_argument("--shots", type=int)
        parser.add_argument("--seed", type=int)
        parser.add_argument(
            "--format", choices=OUTPUT_FORMATS, default="json"
        )

    def config_from_options(self, options: Dict[str, Any]) -> Dict[str, Any]:
        config = {
            key: options[key]
            for key in CONFIG_OPTIONS
            if options.get(key) is not None
        }
        if options.get("schedule"):
            config["schedule"] = read_json(options["schedule"], self.stdin)
        return config

    def execute(self, *args, **options):
        self.stdin = options.get("stdin", sys.stdin)
        return super().execute(*args, **options)
