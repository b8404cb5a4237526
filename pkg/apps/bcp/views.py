from rest_framework.response import Response

from apps.core.numeric import RATIONAL
from apps.core.views import RankedTreesAPIView

from .serializers import EDistributionSerializer
from .services import bcp_E_pmf


class EDistributionView(RankedTreesAPIView):
    """Distribuição exata do comprimento externo pelo BCP"""

    def get(self, request, n):
        self.require_small(n)
        pmf = [{'m': m, 'probability': p} for m, p in bcp_E_pmf(n, RATIONAL)]
        return Response(EDistributionSerializer({'n': n, 'pmf': pmf}).data)
