from rest_framework import permissions, status
from rest_framework.response import Response
from rest_framework.views import APIView

from .conf import setting
from .exceptions import CapacityError, RankedTreesError, ValidationError


class RankedTreesAPIView(APIView):
    """
    View base da API: somente leitura, sem autenticação,
    erros de domínio viram respostas 400/413
    """
    permission_classes = [permissions.AllowAny]

    def handle_exception(self, exc):
        if isinstance(exc, CapacityError):
            return Response({'error': str(exc)}, status=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE)
        if isinstance(exc, RankedTreesError):
            return Response({'error': str(exc)}, status=status.HTTP_400_BAD_REQUEST)
        return super().handle_exception(exc)

    def require_small(self, n):
        # A API serve apenas tamanhos com resposta imediata
        limit = setting('RANKEDTREES_EXACT_MAX_N')
        if n > limit:
            raise CapacityError(f'n={n} acima do limite da API ({limit}); use a linha de comando')

    def query_list(self, name, default):
        raw = self.request.query_params.get(name)
        if not raw:
            return list(default)
        values = [item.strip() for item in raw.split(',') if item.strip()]
        if not values:
            raise ValidationError(f'parâmetro {name} vazio')
        return values
