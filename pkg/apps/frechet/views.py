from rest_framework import status
from rest_framework.response import Response

from apps.core.numeric import RATIONAL, format_number
from apps.core.views import RankedTreesAPIView
from apps.kingman.services import tier_blocks
from apps.statespace.services import enumerate_states

from .serializers import FrechetResultSerializer, SampleMeanSerializer
from .services import frechet_variance, mean_matrix_exact, mean_matrix_sample, result_payload, vitreebi


class FrechetMeanView(RankedTreesAPIView):
    """Médias de Fréchet exatas sob Kingman"""

    def get(self, request, n):
        self.require_small(n)
        space = enumerate_states(n)
        blocks = tier_blocks(space, RATIONAL)
        mean = mean_matrix_exact(space, blocks)
        min_cost, paths = vitreebi(space, mean)
        payload = result_payload(space, min_cost, paths)
        payload['mean_matrix'] = mean.tri()
        payload['variance'] = format_number(frechet_variance(space, blocks, mean))
        return Response(FrechetResultSerializer(payload).data)


class FrechetSampleView(RankedTreesAPIView):
    """Médias de Fréchet exatas de uma amostra (ponderada) de F-matrizes"""

    def post(self, request):
        serializer = SampleMeanSerializer(data=request.data)
        if not serializer.is_valid():
            return Response(serializer.errors, status=status.HTTP_400_BAD_REQUEST)
        data = serializer.validated_data
        matrices = [item['fmatrix'] for item in data['matrices']]
        self.require_small(matrices[0].n)
        mean = mean_matrix_sample(matrices, data.get('weights'), mode=RATIONAL)
        space = enumerate_states(mean.n)
        min_cost, paths = vitreebi(space, mean)
        payload = result_payload(space, min_cost, paths)
        payload['mean_matrix'] = mean.tri()
        payload['variance'] = None
        return Response(FrechetResultSerializer(payload).data)
