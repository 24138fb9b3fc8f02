from rest_framework import serializers

from conditions.models import GuidanceKind

from .images import MAX_SEED, Provenance
from .models import GeneratedImageRecord


class ProvenanceSerializer(serializers.Serializer):
    """One line of ``generated/provenance.jsonl``."""
    image_id = serializers.CharField(read_only=True)
    backend = serializers.CharField()
    seed = serializers.IntegerField(min_value=0, max_value=MAX_SEED)
    kind = serializers.ChoiceField(choices=GuidanceKind.choices)
    source_id = serializers.CharField()
    index = serializers.IntegerField(min_value=1)
    prompt = serializers.CharField(allow_blank=True, default='')
    params = serializers.DictField(default=dict)
    path = serializers.CharField(required=False)
    sha256 = serializers.CharField(max_length=64, required=False)

    def to_representation(self, instance):
        if isinstance(instance, Provenance):
            instance = {
                'image_id': instance.image_id,
                'backend': instance.backend,
                'seed': instance.seed,
                'kind': instance.kind.value,
                'source_id': instance.source_id,
                'index': instance.index,
                'prompt': instance.prompt,
                'params': instance.params,
            }
        return super().to_representation(instance)

    def create(self, validated_data):
        return Provenance(
            backend=validated_data['backend'],
            seed=validated_data['seed'],
            kind=validated_data['kind'],
            source_id=validated_data['source_id'],
            index=validated_data['index'],
            prompt=validated_data.get('prompt', ''),
            params=validated_data.get('params', {}),
        )


class GeneratedImageRecordSerializer(serializers.ModelSerializer):
    class Meta:
        model = GeneratedImageRecord
        fields = (
            'id', 'image_id', 'source_id', 'kind', 'index', 'backend', 'seed',
            'prompt', 'params', 'path', 'sha256', 'run_dir', 'created_at'
        )
        read_only_fields = fields
