from django.db import models


class EvaluationReport(models.Model):
    """
    One evaluated configuration of a run; the JSON report on disk is
    authoritative.
    """
    label = models.CharField(max_length=128)
    dataset = models.CharField(max_length=32)
    phase = models.CharField(max_length=16)
    k_original = models.PositiveIntegerField()
    n_aux = models.PositiveIntegerField(default=0)
    guidance = models.CharField(max_length=16, blank=True)
    segmenter = models.CharField(max_length=64)
    seed = models.PositiveBigIntegerField()
    folds = models.JSONField(default=dict, help_text="Fold index to mIoU")
    mean_miou = models.FloatField()
    episodes = models.PositiveIntegerField(default=0)
    failures = models.PositiveIntegerField(default=0)
    path = models.CharField(max_length=512)
    run_dir = models.CharField(max_length=512)

    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        db_table = "evaluation_reports"
        ordering = ("-created_at", "label")
        constraints = [
            models.UniqueConstraint(fields=("run_dir", "label"), name="unique_report_label_per_run"),
        ]

    def __str__(self) -> str:
        return f"{self.label}: {self.mean_miou:.4f}"
