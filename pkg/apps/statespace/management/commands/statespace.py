from apps.core.commands import RankedTreesCommand
from apps.statespace.services import enumerate_states, tier_sizes


class Command(RankedTreesCommand):
    help = (
        'Enumera o espaço de estados X_n do coalescente ranqueado. '
        'Saída padrão: JSON com a lista de {index, tier, x}. '
        'Com --sizes: CSV com linhas (j, count), |X_n^j| por última entrada j, '
        'e uma linha final (total, Fib(n+1)) com |X_n| + 1 (MRCA).'
    )

    def add_arguments(self, parser):
        parser.add_argument('--n', type=int, required=True, help='Número de folhas (n >= 3)')
        parser.add_argument('--sizes', action='store_true', help='Emite apenas os tamanhos das camadas')
        parser.add_argument('--emit', help='Arquivo de saída (.json; .csv ou .xlsx com --sizes); padrão: stdout')

    def handle(self, *args, **options):
        n = options['n']
        space = enumerate_states(n)
        if options['sizes']:
            rows = [[j, count] for j, count in enumerate(tier_sizes(n))]
            rows.append(['total', space.size + 1])
            self.emit_table(['j', 'count'], rows, options['emit'])
            return
        payload = [
            {'index': state.index, 'tier': state.tier, 'x': [int(v) for v in state.x]}
            for state in space.states
        ]
        self.emit_json(payload, options['emit'])
