from rest_framework import serializers

from apps.core.serializers import RationalField


class EProbabilitySerializer(serializers.Serializer):
    """P(E = m)"""
    m = serializers.IntegerField()
    probability = RationalField()


class EDistributionSerializer(serializers.Serializer):
    n = serializers.IntegerField()
    pmf = EProbabilitySerializer(many=True)
