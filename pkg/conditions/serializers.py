from rest_framework import serializers

from .models import ConditionArtifact, GuidanceKind


class ConditionProvenanceSerializer(serializers.Serializer):
    """One line of ``conditions/provenance.jsonl``."""
    source_id = serializers.CharField()
    kind = serializers.ChoiceField(choices=GuidanceKind.choices)
    prompt = serializers.CharField()
    threshold = serializers.IntegerField(min_value=0, max_value=255)
    detector_id = serializers.CharField(allow_blank=True)
    resolution = serializers.IntegerField(allow_null=True, min_value=1)
    path = serializers.CharField()
    sha256 = serializers.CharField(max_length=64)


class ConditionArtifactSerializer(serializers.ModelSerializer):
    class Meta:
        model = ConditionArtifact
        fields = (
            'id', 'source_id', 'kind', 'prompt', 'threshold', 'detector_id',
            'resolution', 'path', 'sha256', 'run_dir', 'created_at'
        )
        read_only_fields = fields
