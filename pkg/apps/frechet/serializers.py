from rest_framework import serializers

from apps.core.serializers import RationalField
from apps.fmatrix.serializers import FMatrixRecordSerializer


class MeanTreeSerializer(serializers.Serializer):
    path = serializers.ListField(child=serializers.IntegerField())
    tri = serializers.ListField(child=serializers.ListField(child=serializers.IntegerField()))


class FrechetResultSerializer(serializers.Serializer):
    """Custo mínimo (texto exato), matriz média e árvores médias"""
    n = serializers.IntegerField()
    min_cost = serializers.CharField()
    variance = serializers.CharField(allow_null=True)
    mean_matrix = serializers.ListField(child=serializers.ListField(child=serializers.CharField()))
    means = MeanTreeSerializer(many=True)


class SampleMeanSerializer(serializers.Serializer):
    """Amostra de F-matrizes com pesos opcionais ('p/q', inteiros ou decimais)"""
    matrices = FMatrixRecordSerializer(many=True, allow_empty=False)
    weights = serializers.ListField(child=RationalField(), required=False)

    def validate(self, attrs):
        weights = attrs.get('weights')
        if weights is not None and len(weights) != len(attrs['matrices']):
            raise serializers.ValidationError({'weights': 'um peso por matriz'})
        return attrs
