from django.db import models


class GuidanceKind(models.TextChoices):
    SEGMAP = "segmap", "Segmentation map"
    HED = "hed", "HED boundary"
    SCRIBBLE = "scribble", "Scribble"

    @classmethod
    def expand(cls, value: str) -> list["GuidanceKind"]:
        """``all`` stands for every kind, in declaration order."""
        if value == "all":
            return list(cls)
        return [cls(value)]


class ConditionArtifact(models.Model):
    """
    Control condition written to disk for one support sample.
    """
    source_id = models.CharField(max_length=128, db_index=True)
    kind = models.CharField(max_length=16, choices=GuidanceKind.choices)
    prompt = models.CharField(max_length=255)
    threshold = models.PositiveSmallIntegerField(default=128)
    detector_id = models.CharField(max_length=64, blank=True)
    resolution = models.PositiveIntegerField(null=True, blank=True, help_text="Detector working resolution (long side)")
    path = models.CharField(max_length=512)
    sha256 = models.CharField(max_length=64)
    run_dir = models.CharField(max_length=512)

    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        db_table = "condition_artifacts"
        ordering = ("source_id", "kind")
        constraints = [
            models.UniqueConstraint(fields=("run_dir", "source_id", "kind"), name="unique_condition_per_run"),
        ]

    def __str__(self) -> str:
        return f"{self.kind} condition for {self.source_id}"
