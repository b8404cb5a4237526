from rest_framework.response import Response

from apps.core.numeric import RATIONAL
from apps.core.views import RankedTreesAPIView
from apps.statespace.services import enumerate_states

from .serializers import TierBlockSerializer
from .services import tier_blocks


class TierBlockListView(RankedTreesAPIView):
    """Blocos exatos do núcleo de Kingman"""

    def get(self, request, n):
        self.require_small(n)
        blocks = tier_blocks(enumerate_states(n), RATIONAL)
        return Response(TierBlockSerializer(blocks, many=True).data)
