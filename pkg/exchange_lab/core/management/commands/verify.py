from django.core.management.base import CommandError

from exchange_lab.core.management.base import (
    BAD_INPUT,
    VERIFICATION_FAILED,
    LabCommand,
)
from exchange_lab.core.oracle import check_cap
from exchange_lab.core.verification import run_suite


class Command(LabCommand):
    help = "Cross-checks the fast path against the dense oracle"

    def add_arguments(self, parser):
        parser.add_argument("--modes", type=int, default=8)
        parser.add_argument("--trials", type=int, default=500)
        parser.add_argument("--seed", type=int, default=1)

    def run_command(self, *args, **options):
        modes, trials = options["modes"], options["trials"]
        if modes < 1 or trials < 0:
            raise CommandError(
                "--modes must be positive and --trials non-negative",
                returncode=BAD_INPUT,
            )
        check_cap(modes)
        report = run_suite(modes, trials, options["seed"])
        self.stdout.write("\n".join(report.lines()))
        if not report.passed:
            raise CommandError(
                "verification failed", returncode=VERIFICATION_FAILED
            )
