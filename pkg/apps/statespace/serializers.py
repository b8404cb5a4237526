from rest_framework import serializers


class RankedStateSerializer(serializers.Serializer):
    """Estado de X_n com índice global e camada"""
    index = serializers.IntegerField()
    tier = serializers.IntegerField()
    x = serializers.ListField(child=serializers.IntegerField())
    lineages = serializers.IntegerField()
    external_count = serializers.IntegerField()


class StateSpaceSizesSerializer(serializers.Serializer):
    n = serializers.IntegerField()
    total = serializers.IntegerField(help_text='Fib(n+1): estados transientes mais o MRCA')
    transient = serializers.IntegerField()
    tier_sizes = serializers.ListField(
        child=serializers.IntegerField(),
        help_text='|X_n^j| para j = 0..n (estados com última entrada j)',
    )
