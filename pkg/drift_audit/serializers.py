from rest_framework import serializers

from .audit import DriftRecord
from .models import DriftRecordRow


class DriftRecordSerializer(serializers.Serializer):
    image_id = serializers.CharField()
    kind = serializers.CharField()
    source_id = serializers.CharField()
    iou = serializers.FloatField(min_value=0.0, max_value=1.0, allow_null=True)
    segmenter = serializers.CharField()
    fold = serializers.IntegerField(min_value=0, allow_null=True, required=False, default=None)
    area_fraction = serializers.FloatField(min_value=0.0, max_value=1.0)
    components = serializers.IntegerField(min_value=0)
    quality = serializers.CharField(allow_blank=True)
    error = serializers.CharField(allow_blank=True, required=False, default='')

    def to_representation(self, instance: DriftRecord):
        return instance.to_dict()

    def create(self, validated_data):
        return DriftRecord(**validated_data)


class DriftReportSerializer(serializers.Serializer):
    """Only the records are read back; every summary is recomputed from them."""
    records = DriftRecordSerializer(many=True)
    baseline = DriftRecordSerializer(many=True)


class DriftRecordRowSerializer(serializers.ModelSerializer):
    class Meta:
        model = DriftRecordRow
        fields = (
            'id', 'run_dir', 'image_id', 'kind', 'source_id', 'iou', 'segmenter', 'fold',
            'quality', 'area_fraction', 'components', 'error', 'created_at'
        )
        read_only_fields = fields
