from django.contrib import admin
from .models import DriftRecordRow


@admin.register(DriftRecordRow)
class DriftRecordRowAdmin(admin.ModelAdmin):
    list_display = ('id', 'image_id', 'kind', 'source_id', 'iou', 'quality', 'fold', 'segmenter')
    list_filter = ('kind', 'quality', 'segmenter', 'fold')
    search_fields = ('image_id', 'source_id', 'run_dir')
    ordering = ('image_id',)
