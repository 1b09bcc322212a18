from exchange_lab.core.const import EXPERIMENTS
from exchange_lab.core.management.base import LabCommand, dumps
from exchange_lab.core.models import ExperimentRun
from exchange_lab.core.serializers import ExperimentRunSerializer


class Command(LabCommand):
    help = "Prints the most recently recorded runs"

    def add_arguments(self, parser):
        parser.add_argument("--limit", type=int, default=10)
        parser.add_argument("--experiment", choices=EXPERIMENTS)

    def run_command(self, *args, **options):
        runs = ExperimentRun.latest_runs(
            max(options["limit"], 0), options["experiment"]
        )
        return dumps(ExperimentRunSerializer(runs, many=True).data)
