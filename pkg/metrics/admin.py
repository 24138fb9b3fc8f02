from django.contrib import admin
from .models import EvaluationReport


@admin.register(EvaluationReport)
class EvaluationReportAdmin(admin.ModelAdmin):
    list_display = ('id', 'label', 'dataset', 'k_original', 'n_aux', 'guidance', 'mean_miou', 'failures', 'created_at')
    list_filter = ('dataset', 'guidance', 'segmenter', 'created_at')
    search_fields = ('label', 'run_dir')
    ordering = ('-created_at',)
