from typing import Any, Dict, Tuple

from django.core.exceptions import ValidationError as DjangoValidationError
from rest_framework import serializers
from rest_framework.exceptions import ValidationError

from exchange_lab.core.const import (
    EVALUATION_MODES,
    EXPERIMENTS,
    HALF_PI,
    OUTPUT_FORMATS,
    RING_TURNS,
)
from exchange_lab.core.dynamics import (
    HopPulse,
    Schedule,
    half_swap_schedules,
    run_pulse_interference,
)
from exchange_lab.core.fock import FockBasisState, RegisterLayout
from exchange_lab.core.interferometry import (
    COWParams,
    PathProfile,
    cow_phase,
    optical_path_phase,
)
from exchange_lab.core.models import ExperimentRun
from exchange_lab.core.protocols import (
    SWAP_INITIAL,
    EvaluationMode,
    ExperimentResult,
    RingConfig,
    experiment_full_controlled_swap,
    experiment_half_swap_interference,
    experiment_ring_rotation,
)
from exchange_lab.core.utils import validate_ket_drf


class StrictSerializer(serializers.Serializer):
    """
    Rejects any input key the serializer does not declare
    """

    def to_internal_value(self, data):
        if isinstance(data, dict):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise ValidationError(
                    {name: "Unknown field" for name in unknown}
                )
        return super().to_internal_value(data)

    def update(self, instance, validated_data):
        """
        Abstract class method, does not require in this class
        """
        raise NotImplementedError


class PulseSerializer(StrictSerializer):
    """
    One pulse, {"from": 1, "to": 2, "theta": 1.5707963267948966}
    """

    def get_fields(self):
        # "from" is a keyword, so the fields cannot be class attributes
        return {
            "from": serializers.IntegerField(min_value=1),
            "to": serializers.IntegerField(min_value=1),
            "theta": serializers.FloatField(),
        }

    def validate(self, attrs):
        if attrs["from"] == attrs["to"]:
            raise ValidationError("Pulse needs two distinct modes")
        return attrs


class ScheduleSerializer(StrictSerializer):
    """
    Pulse schedules of both branches, with an optional initial ket
    """

    initial = serializers.CharField(
        validators=[validate_ket_drf], default=SWAP_INITIAL
    )
    branch0 = PulseSerializer(many=True)
    branch1 = PulseSerializer(many=True)

    def validate(self, attrs):
        modes = FockBasisState.from_ket(attrs["initial"]).modes
        for branch in ("branch0", "branch1"):
            for pulse in attrs[branch]:
                if max(pulse["from"], pulse["to"]) > modes:
                    raise ValidationError(
                        {branch: f"Pulse leaves the {modes}-mode register"}
                    )
        return attrs

    @staticmethod
    def to_schedules(
        validated_data: Dict[str, Any]
    ) -> Tuple[Schedule, Schedule, FockBasisState]:
        schedules = tuple(
            Schedule(
                tuple(
                    HopPulse(pulse["from"], pulse["to"], pulse["theta"])
                    for pulse in validated_data[branch]
                )
            )
            for branch in ("branch0", "branch1")
        )
        initial = FockBasisState.from_ket(validated_data["initial"])
        return schedules[0], schedules[1], initial


class RunConfigSerializer(StrictSerializer):
    """
    Validated run configuration; save() runs the experiment and returns
    its ExperimentResult
    """

    experiment = serializers.ChoiceField(choices=EXPERIMENTS)
    modes = serializers.IntegerField(min_value=1, required=False)
    n = serializers.IntegerField(min_value=1, default=2)
    statistics = serializers.CharField(default="fermion")
    mode = serializers.ChoiceField(
        choices=EVALUATION_MODES, default="sequential"
    )
    turns = serializers.ChoiceField(choices=RING_TURNS, default="step")
    theta = serializers.FloatField(default=HALF_PI)
    schedule = ScheduleSerializer(required=False)
    shots = serializers.IntegerField(min_value=0, required=False)
    seed = serializers.IntegerField(min_value=0, required=False)
    format = serializers.ChoiceField(choices=OUTPUT_FORMATS, default="json")

    def validate(self, attrs):
        if "shots" in attrs and "seed" not in attrs:
            raise ValidationError({"seed": "Sampling shots needs a seed"})
        experiment = attrs["experiment"]
        if experiment == "ring":
            expected = 2 * attrs["n"]
        elif experiment == "pulse" and "schedule" in attrs:
            initial = attrs["schedule"]["initial"]
            expected = FockBasisState.from_ket(initial).modes
        else:
            expected = 4
        modes = attrs.setdefault("modes", expected)
        if modes != expected:
            raise ValidationError(
                {"modes": f"{experiment} runs on {expected} modes"}
            )
        try:
            attrs["layout"] = RegisterLayout.from_statistics(
                attrs["statistics"], modes
            )
        except DjangoValidationError as error:
            raise ValidationError({"statistics": error.messages})
        return attrs

    def create(self, validated_data) -> ExperimentResult:
        """

        Runs the configured experiment

        Args:
            validated_data: Dictionary of validated data

        Returns: ExperimentResult

        """
        layout = validated_data["layout"]
        mode = EvaluationMode(validated_data["mode"])
        experiment = validated_data["experiment"]
        if experiment == "full-swap":
            result = experiment_full_controlled_swap(layout, mode)
        elif experiment == "half-swap":
            result = experiment_half_swap_interference(layout, mode)
        elif experiment == "ring":
            cfg = RingConfig(validated_data["n"], validated_data["turns"])
            result = experiment_ring_rotation(cfg, layout, mode)
        elif "schedule" in validated_data:
            schedule0, schedule1, initial = ScheduleSerializer.to_schedules(
                validated_data["schedule"]
            )
            result = run_pulse_interference(
                schedule0, schedule1, initial, layout
            )
        else:
            schedule0, schedule1 = half_swap_schedules(validated_data["theta"])
            result = run_pulse_interference(
                schedule0,
                schedule1,
                FockBasisState.from_ket(SWAP_INITIAL),
                layout,
            )
        result.seed = validated_data.get("seed")
        return result


class AttributionConfigSerializer(RunConfigSerializer):
    """
    Attribution needs per-hop locality, which literal products lack
    """

    def validate_mode(self, value):
        if value == EvaluationMode.LITERAL.value:
            raise ValidationError(
                "Literal evaluation has no per-hop ledger to attribute",
                code="literal_not_attributable",
            )
        return value


class LedgerEntrySerializer(serializers.Serializer):
    """
    Attributes:
        step: Position of the operation in its branch
        op: Operation description
        sign: +1 or -1
        interval_parity: Occupied anticommuting modes behind the sign
        wrap: Hop across the mode 1 / mode 2n edge of a ring

    """

    step = serializers.IntegerField(min_value=1)
    op = serializers.CharField()
    sign = serializers.ChoiceField(choices=[-1, 1])
    interval_parity = serializers.IntegerField(min_value=0)
    wrap = serializers.BooleanField()


class ExperimentResultSerializer(StrictSerializer):
    """
    Published JSON schema of an ExperimentResult
    """

    experiment = serializers.CharField()
    params = serializers.DictField()
    phase_rad = serializers.FloatField(allow_null=True)
    visibility = serializers.FloatField(min_value=0.0)
    branch_final = serializers.ListField(
        child=serializers.CharField(), min_length=2, max_length=2
    )
    ledgers = serializers.ListField(
        child=serializers.ListField(child=LedgerEntrySerializer()),
        min_length=2,
        max_length=2,
    )
    probabilities = serializers.DictField(
        child=serializers.DictField(child=serializers.FloatField())
    )
    counts = serializers.DictField(
        child=serializers.DictField(child=serializers.IntegerField()),
        allow_null=True,
        required=False,
    )
    seed = serializers.IntegerField(allow_null=True)
    version = serializers.CharField()


class ReferenceRequestSerializer(StrictSerializer):
    """
    Reference phase request; save() returns {"kind", "phase_rad", "inputs"}
    """

    kind = serializers.ChoiceField(choices=["optical", "cow"])
    p1 = serializers.ListField(
        child=serializers.ListField(
            child=serializers.FloatField(), min_length=2, max_length=2
        ),
        required=False,
    )
    p2 = serializers.ListField(
        child=serializers.ListField(
            child=serializers.FloatField(), min_length=2, max_length=2
        ),
        required=False,
    )
    wavelength = serializers.FloatField(required=False)
    mass = serializers.FloatField(required=False)
    gravity = serializers.FloatField(required=False)
    height = serializers.FloatField(required=False)
    time = serializers.FloatField(required=False)

    optical_fields = {"p1", "p2", "wavelength"}
    cow_fields = {"mass", "gravity", "height", "time"}

    def validate(self, attrs):
        if attrs["kind"] == "optical":
            allowed, required = self.optical_fields, self.optical_fields
        else:
            allowed, required = self.cow_fields, {"height", "time"}
        given = set(attrs) - {"kind"}
        missing = sorted(required - given)
        extra = sorted(given - allowed)
        if missing:
            raise ValidationError({name: "Required" for name in missing})
        if extra:
            raise ValidationError(
                {name: f"Not used by {attrs['kind']}" for name in extra}
            )
        return attrs

    def create(self, validated_data) -> Dict[str, Any]:
        inputs = {k: v for k, v in validated_data.items() if k != "kind"}
        try:
            if validated_data["kind"] == "optical":
                phase = optical_path_phase(
                    PathProfile.of(inputs["p1"]),
                    PathProfile.of(inputs["p2"]),
                    inputs["wavelength"],
                )
            else:
                params = COWParams(**inputs)
                inputs = {
                    "mass": params.mass,
                    "gravity": params.gravity,
                    "height": params.height,
                    "time": params.time,
                }
                phase = cow_phase(params)
        except DjangoValidationError as error:
            raise ValidationError({"request": error.messages})
        return {
            "kind": validated_data["kind"],
            "phase_rad": phase,
            "inputs": inputs,
        }


class ExperimentRunSerializer(serializers.ModelSerializer):
    """
    Serializer Meta Class for stored runs
    """

    class Meta:
        """
        Serializer Meta Class
        """

        model = ExperimentRun
        fields = [
            "id",
            "experiment",
            "params",
            "phase_rad",
            "visibility",
            "valid",
            "seed",
            "version",
            "created",
            "payload",
        ]
