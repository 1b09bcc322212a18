from django.core.management.base import CommandError

from exchange_lab.core.management.base import (
    INVALID_RESULT,
    LabCommand,
    dumps,
    to_csv,
)
from exchange_lab.core.protocols import ExperimentResult
from exchange_lab.core.serializers import AttributionConfigSerializer

FIELDS = [
    "branch",
    "step",
    "op",
    "from",
    "to",
    "interval_parity",
    "sign",
    "wrap",
    "phase_rad",
]


def attribution_rows(result: ExperimentResult):
    """
    One row per ledger entry per branch, then a sign-product row per
    branch and the relative-phase row
    """
    rows = []
    for label, ledger in zip(result.branch_labels, result.ledgers):
        for entry in ledger:
            rows.append(
                {
                    "branch": label,
                    "step": entry.step,
                    "op": entry.op,
                    "from": entry.source,
                    "to": entry.target,
                    "interval_parity": entry.interval_parity,
                    "sign": entry.sign,
                    "wrap": entry.wrap,
                    "phase_rad": None,
                }
            )
    for label, ledger in zip(result.branch_labels, result.ledgers):
        rows.append(
            dict.fromkeys(FIELDS)
            | {"branch": label, "op": "product", "sign": ledger.product}
        )
    rows.append(
        dict.fromkeys(FIELDS)
        | {
            "branch": "relative",
            "op": "relative-phase",
            "sign": result.ledger_relative_sign,
            "phase_rad": result.phase_rad,
        }
    )
    return rows


class Command(LabCommand):
    help = "Attributes the relative phase to individual hops"

    def add_arguments(self, parser):
        self.add_config_arguments(parser)

    def run_command(self, *args, **options):
        serializer = AttributionConfigSerializer(
            data=self.config_from_options(options)
        )
        serializer.is_valid(raise_exception=True)
        result = serializer.save()
        if not result.valid:
            raise CommandError(
                f"{result.experiment}: a branch ended in the zero vector",
                returncode=INVALID_RESULT,
            )
        rows = attribution_rows(result)
        if serializer.validated_data["format"] == "csv":
            return to_csv(rows, FIELDS)
        return dumps(rows)
