from rest_framework import serializers

from .numeric import format_number, parse_number
from .exceptions import ValidationError as DomainValidationError


class RationalField(serializers.Field):
    """Campo para números exatos ('p/q') ou floats com 17 algarismos"""

    def to_representation(self, value):
        if isinstance(value, str):
            return value
        return format_number(value)

    def to_internal_value(self, data):
        try:
            return parse_number(data)
        except DomainValidationError as exc:
            raise serializers.ValidationError(str(exc))


class RationalListField(serializers.ListField):
    child = RationalField()


class RationalMatrixField(serializers.ListField):
    child = RationalListField()


class TableSerializer(serializers.Serializer):
    """Serializer genérico para tabelas (cabeçalho + linhas)"""
    header = serializers.ListField(child=serializers.CharField())
    rows = serializers.ListField(child=serializers.ListField(child=RationalField()))
