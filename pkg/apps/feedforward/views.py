from rest_framework.response import Response

from apps.core.numeric import RATIONAL, format_number
from apps.core.serializers import TableSerializer
from apps.core.views import RankedTreesAPIView
from apps.kingman.services import tier_blocks
from apps.statespace.services import enumerate_states

from .services import moment_rows


class MomentTableView(RankedTreesAPIView):
    """Momentos exatos; ?targets=S,E,F"""

    def get(self, request, n):
        self.require_small(n)
        targets = self.query_list('targets', ['S', 'E'])
        space = enumerate_states(n)
        rows = moment_rows(space, tier_blocks(space, RATIONAL), targets)
        table = {
            'header': ['statistic', 'a', 'b', 'value'],
            'rows': [[stat, a, b, format_number(value)] for stat, a, b, value in rows],
        }
        return Response(TableSerializer(table).data)
