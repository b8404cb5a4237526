from rest_framework import status
from rest_framework.response import Response

from apps.core.views import RankedTreesAPIView

from .serializers import BalanceSerializer, FMatrixRecordSerializer
from .services import balance_row


class BalanceView(RankedTreesAPIView):
    """Índices de balanço (E, S, Sackin, Colless) de uma F-matriz"""

    def post(self, request):
        serializer = FMatrixRecordSerializer(data=request.data)
        if not serializer.is_valid():
            return Response(serializer.errors, status=status.HTTP_400_BAD_REQUEST)
        E, S, sackin, colless = balance_row(serializer.validated_data['fmatrix'])
        return Response(BalanceSerializer({'E': E, 'S': S, 'sackin': sackin, 'colless': colless}).data)
