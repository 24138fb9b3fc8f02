from django.db import models


class DriftRecordRow(models.Model):
    """One scored image of a drift audit, original supports included."""
    run_dir = models.CharField(max_length=512)
    image_id = models.CharField(max_length=255)
    kind = models.CharField(max_length=16)
    source_id = models.CharField(max_length=255)
    iou = models.FloatField(null=True, blank=True, help_text="Empty when the segmenter failed")
    segmenter = models.CharField(max_length=64)
    fold = models.PositiveSmallIntegerField(null=True, blank=True)
    quality = models.CharField(max_length=8, blank=True)
    area_fraction = models.FloatField(default=0.0)
    components = models.PositiveIntegerField(default=0)
    error = models.TextField(blank=True)

    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        db_table = "drift_records"
        ordering = ("image_id",)
        constraints = [
            models.UniqueConstraint(fields=("run_dir", "image_id"), name="unique_drift_image_per_run"),
        ]

    def __str__(self) -> str:
        return f"{self.image_id} ({self.kind}): {self.iou}"
