# Generated by Django 4.2 on 2026-10-18 12:00

from django.db import migrations, models


class Migration(migrations.Migration):
    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ExperimentRun",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("created", models.DateTimeField(auto_now_add=True)),
                ("updated", models.DateTimeField(auto_now=True)),
                (
                    "experiment",
                    models.CharField(db_index=True, max_length=64),
                ),
                ("params", models.JSONField(default=dict)),
                ("phase_rad", models.FloatField(blank=True, null=True)),
                ("visibility", models.FloatField()),
                ("valid", models.BooleanField(default=True)),
                ("seed", models.BigIntegerField(blank=True, null=True)),
                ("version", models.CharField(max_length=16)),
                ("payload", models.JSONField(default=dict)),
            ],
            options={
                "ordering": ["-created", "-id"],
            },
        ),
    ]
