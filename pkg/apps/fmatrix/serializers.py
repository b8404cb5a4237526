from rest_framework import serializers

from apps.core.exceptions import ValidationError as DomainValidationError

from .services import FMatrix


class FMatrixRecordSerializer(serializers.Serializer):
    """Registro {n, tri} de uma F-matriz (mesmo formato das linhas do corpus JSONL)"""
    n = serializers.IntegerField(min_value=3)
    tri = serializers.ListField(child=serializers.ListField(child=serializers.IntegerField(min_value=0)))

    def validate(self, attrs):
        try:
            attrs['fmatrix'] = FMatrix.from_tri(attrs['n'], attrs['tri'])
        except DomainValidationError as exc:
            raise serializers.ValidationError({'tri': str(exc)})
        return attrs


class BalanceSerializer(serializers.Serializer):
    E = serializers.IntegerField()
    S = serializers.IntegerField()
    sackin = serializers.IntegerField()
    colless = serializers.IntegerField()
