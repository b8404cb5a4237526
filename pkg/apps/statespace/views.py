from rest_framework.response import Response

from apps.core.conf import setting
from apps.core.exceptions import CapacityError
from apps.core.views import RankedTreesAPIView

from .serializers import RankedStateSerializer, StateSpaceSizesSerializer
from .services import enumerate_states, fibonacci, tier_sizes


class StateSpaceSizesView(RankedTreesAPIView):
    """Tamanhos de X_n pela fórmula de Fibonacci (sem enumerar)"""

    def get(self, request, n):
        limit = setting('RANKEDTREES_MAX_N')
        if n > limit:
            raise CapacityError(f'n={n} acima do máximo configurado ({limit})')
        total = fibonacci(n + 1)
        payload = {'n': n, 'total': total, 'transient': total - 1, 'tier_sizes': tier_sizes(n)}
        return Response(StateSpaceSizesSerializer(payload).data)


class StateListView(RankedTreesAPIView):
    """Estados de X_n em ordem de índice"""

    def get(self, request, n):
        self.require_small(n)
        space = enumerate_states(n)
        return Response(RankedStateSerializer(space.states, many=True).data)
