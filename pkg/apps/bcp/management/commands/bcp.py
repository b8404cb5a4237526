from apps.bcp.services import bcp_E_pmf, bcp_sizes, bcp_states
from apps.core.commands import RankedTreesCommand
from apps.core.exceptions import ValidationError
from apps.core.numeric import format_number


class Command(RankedTreesCommand):
    help = (
        'Processo de contagem de blocos ranqueado. '
        'Padrão: CSV m, probability com a distribuição do comprimento externo E. '
        'Com --sizes: CSV n, bcp_states, ranked_states (p(n) e Fib(n+1), ambos com o MRCA). '
        'Com --states: CSV index, tier, a1..a(n-1).'
    )

    def add_arguments(self, parser):
        parser.add_argument('--n', type=int, help='Número de folhas (n >= 3)')
        parser.add_argument('--emit', help='Arquivo de saída (.csv ou .xlsx); padrão: stdout')
        parser.add_argument('--sizes', action='store_true', help='Tabela de tamanhos dos espaços de estados')
        parser.add_argument('--n-max', type=int, default=40, help='Maior n da tabela --sizes (padrão: 40)')
        parser.add_argument('--states', action='store_true', help='Lista os estados do BCP')
        self.add_mode_argument(parser)

    def handle(self, *args, **options):
        if options['sizes']:
            self.emit_table(['n', 'bcp_states', 'ranked_states'], bcp_sizes(options['n_max']), options['emit'])
            return
        n = options['n']
        if not n:
            raise ValidationError('informe --n ou --sizes')
        if options['states']:
            space = bcp_states(n)
            rows = (
                [index, space.tier_of(index)] + [int(v) for v in space.vectors[index - 1]]
                for index in range(1, space.size + 1)
            )
            self.emit_table(['index', 'tier'] + [f'a{i}' for i in range(1, n)], rows, options['emit'])
            return
        pmf = bcp_E_pmf(n, options['mode'])
        self.emit_table(['m', 'probability'], ([m, format_number(p)] for m, p in pmf), options['emit'])
