from rest_framework import serializers

from .models import EvaluationReport
from .reports import FoldReport
from .scores import ClassIoU


class ClassIoUSerializer(serializers.Serializer):
    class_index = serializers.IntegerField(min_value=0)
    intersection = serializers.IntegerField(min_value=0)
    union = serializers.IntegerField(min_value=0)
    iou = serializers.FloatField(read_only=True)


class FoldEntrySerializer(serializers.Serializer):
    fold = serializers.IntegerField(min_value=0)
    miou = serializers.FloatField(min_value=0.0, max_value=1.0)
    per_class = ClassIoUSerializer(many=True)


class FoldReportSerializer(serializers.Serializer):
    """JSON form of a FoldReport; ``mean`` is derived and ignored on input."""
    config = serializers.DictField()
    folds = FoldEntrySerializer(many=True)
    mean = serializers.FloatField(read_only=True)
    episodes = serializers.IntegerField(min_value=0)
    failures = serializers.IntegerField(min_value=0)

    def to_representation(self, instance: FoldReport):
        return {
            'config': dict(sorted(instance.config.items())),
            'folds': [
                {
                    'fold': fold,
                    'miou': instance.folds[fold],
                    'per_class': ClassIoUSerializer(instance.per_class.get(fold, []), many=True).data,
                }
                for fold in sorted(instance.folds)
            ],
            'mean': instance.mean,
            'episodes': instance.episodes,
            'failures': instance.failures,
        }

    def create(self, validated_data):
        folds = {entry['fold']: entry['miou'] for entry in validated_data['folds']}
        per_class = {
            entry['fold']: [ClassIoU(**c) for c in entry['per_class']]
            for entry in validated_data['folds']
        }
        return FoldReport(
            config=dict(validated_data['config']),
            folds=folds,
            per_class=per_class,
            episodes=validated_data['episodes'],
            failures=validated_data['failures'],
        )


class EvaluationReportSerializer(serializers.ModelSerializer):
    class Meta:
        model = EvaluationReport
        fields = (
            'id', 'label', 'dataset', 'phase', 'k_original', 'n_aux', 'guidance', 'segmenter',
            'seed', 'folds', 'mean_miou', 'episodes', 'failures', 'path', 'run_dir', 'created_at'
        )
        read_only_fields = fields
