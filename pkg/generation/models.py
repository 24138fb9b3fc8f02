from django.db import models

from conditions.models import GuidanceKind


class GeneratedImageRecord(models.Model):
    """
    Auxiliary image produced for one support sample.
    """
    image_id = models.CharField(max_length=200)
    source_id = models.CharField(max_length=128, db_index=True)
    kind = models.CharField(max_length=16, choices=GuidanceKind.choices)
    index = models.PositiveIntegerField(help_text="Position k within the request, starting at 1")
    backend = models.CharField(max_length=64)
    seed = models.PositiveBigIntegerField()
    prompt = models.CharField(max_length=255)
    params = models.JSONField(default=dict, blank=True)
    path = models.CharField(max_length=512)
    sha256 = models.CharField(max_length=64)
    run_dir = models.CharField(max_length=512)

    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        db_table = "generated_images"
        ordering = ("source_id", "kind", "index")
        constraints = [
            models.UniqueConstraint(fields=("run_dir", "image_id"), name="unique_generated_image_per_run"),
        ]

    def __str__(self) -> str:
        return f"{self.image_id} ({self.backend})"
