from rest_framework import serializers

from apps.core.serializers import RationalMatrixField


class TierBlockSerializer(serializers.Serializer):
    """Bloco T_{k,k+1} denso, entradas como 'p/q'"""
    from_tier = serializers.IntegerField()
    shape = serializers.ListField(child=serializers.IntegerField())
    probs = RationalMatrixField(source='dense_rows')
