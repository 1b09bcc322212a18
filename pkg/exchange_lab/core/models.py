from typing import Any, Dict

from django.db import models
from django.db.models import QuerySet


class AbstractModel(models.Model):
    """

    Abstract model containing `created` and `updated` model field
    The model which will inherit AbstractModel will have the above
    2 fields by default

    Attributes:
        `created`: Timestamp the data creation time
        `updated`: Timestamp the data update time

    """

    created = models.DateTimeField(auto_now_add=True)
    updated = models.DateTimeField(auto_now=True)

    class Meta:
        """

        Meta class that contains meta data for this model
        Attributes:
            abstract = True; as this is an abstract model

        """

        abstract = True


class ExperimentRun(AbstractModel):
    """

    One executed controlled experiment, inherits AbstractModel
    to have `created` and `updated` field by default

    Attributes:
        `experiment`: Experiment name, Example: 'half-swap', 'ring'
        `params`: Parameters the experiment ran with
        `phase_rad`: Relative phase, null when undefined
        `visibility`: Branch overlap magnitude
        `valid`: False when a branch ended in the zero vector
        `seed`: Sampling seed, if any
        `version`: Result schema version
        `payload`: The full serialized result

    """

    experiment = models.CharField(max_length=64, db_index=True)
    params = models.JSONField(default=dict)
    phase_rad = models.FloatField(null=True, blank=True)
    visibility = models.FloatField()
    valid = models.BooleanField(default=True)
    seed = models.BigIntegerField(null=True, blank=True)
    version = models.CharField(max_length=16)
    payload = models.JSONField(default=dict)

    class Meta:
        ordering = ["-created", "-id"]

    def __str__(self) -> str:
        """

        Returns: Model String Representation

        """
        return f"{self.experiment} #{self.pk}"

    @classmethod
    def record(
        cls, payload: Dict[str, Any], valid: bool = True
    ) -> "ExperimentRun":
        """
        Stores a serialized ExperimentResult
        Args:
            payload: Dictionary produced by ExperimentResultSerializer
            valid: False when a branch of the result vanished

        Returns: ExperimentRun, the saved record

        """
        return cls.objects.create(
            experiment=payload["experiment"],
            params=payload["params"],
            phase_rad=payload["phase_rad"],
            visibility=payload["visibility"],
            valid=valid,
            seed=payload["seed"],
            version=payload["version"],
            payload=payload,
        )

    @classmethod
    def latest_runs(cls, limit: int, experiment: str = None) -> QuerySet:
        queryset = cls.objects.all()
        if experiment:
            queryset = queryset.filter(experiment=experiment)
        return queryset[:limit]
