import json
import logging

from django.core.management.base import CommandError

from exchange_lab.core.management.base import (
    INVALID_RESULT,
    LabCommand,
    dumps,
    to_csv,
)
from exchange_lab.core.models import ExperimentRun
from exchange_lab.core.protocols import sample_counts
from exchange_lab.core.serializers import (
    ExperimentResultSerializer,
    RunConfigSerializer,
)

logger = logging.getLogger(__name__)

CSV_FIELDS = [
    "experiment",
    "phase_rad",
    "visibility",
    "branch0_final",
    "branch1_final",
    "p_x_plus",
    "p_x_minus",
    "p_y_plus",
    "p_y_minus",
    "seed",
    "version",
]


def result_row(payload):
    probabilities = payload["probabilities"]
    return {
        "experiment": payload["experiment"],
        "phase_rad": payload["phase_rad"],
        "visibility": payload["visibility"],
        "branch0_final": payload["branch_final"][0],
        "branch1_final": payload["branch_final"][1],
        "p_x_plus": probabilities["X"]["+"],
        "p_x_minus": probabilities["X"]["-"],
        "p_y_plus": probabilities["Y"]["+"],
        "p_y_minus": probabilities["Y"]["-"],
        "seed": payload["seed"],
        "version": payload["version"],
    }


class Command(LabCommand):
    help = "Runs a named controlled experiment and prints its result"

    def add_arguments(self, parser):
        self.add_config_arguments(parser)
        parser.add_argument(
            "--record",
            action="store_true",
            help="Store the result in the run history",
        )

    def run_command(self, *args, **options):
        serializer = RunConfigSerializer(data=self.config_from_options(options))
        serializer.is_valid(raise_exception=True)
        result = serializer.save()
        config = serializer.validated_data
        if result.valid and "shots" in config:
            result.counts = sample_counts(
                result, config["shots"], config["seed"]
            )
        payload = ExperimentResultSerializer(result).data
        if options["record"]:
            record = ExperimentRun.record(
                json.loads(dumps(payload)), valid=result.valid
            )
            logger.info("recorded %s", record)
        if not result.valid:
            raise CommandError(
                f"{result.experiment}: a branch ended in the zero vector",
                returncode=INVALID_RESULT,
            )
        if config["format"] == "csv":
            return to_csv([result_row(payload)], CSV_FIELDS)
        return dumps(payload)
