from exchange_lab.core.management.base import LabCommand, dumps, read_json
from exchange_lab.core.serializers import ReferenceRequestSerializer


class Command(LabCommand):
    help = "Single-particle reference phases: optical path or COW"

    def add_arguments(self, parser):
        parser.add_argument(
            "request", help="JSON request file, or - to read stdin"
        )

    def run_command(self, *args, **options):
        serializer = ReferenceRequestSerializer(
            data=read_json(options["request"], self.stdin)
        )
        serializer.is_valid(raise_exception=True)
        return dumps(serializer.save())
