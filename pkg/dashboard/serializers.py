from rest_framework import serializers


class RunOverviewSerializer(serializers.Serializer):
    conditions_total = serializers.IntegerField()
    conditions_by_kind = serializers.DictField(child=serializers.IntegerField())

    generated_total = serializers.IntegerField()
    generated_by_kind = serializers.DictField(child=serializers.IntegerField())

    reports_total = serializers.IntegerField()
    best_report = serializers.DictField(allow_null=True)

    drift_total = serializers.IntegerField()
    drift_failed = serializers.IntegerField()
    drift_mean_iou = serializers.DictField(child=serializers.FloatField())
