from apps.core.commands import RankedTreesCommand
from apps.core.exceptions import ValidationError
from apps.core.numeric import format_number
from apps.feedforward.services import ENGINES, TARGETS, moment_rows
from apps.kingman.services import tier_blocks
from apps.statespace.services import enumerate_states


class Command(RankedTreesCommand):
    help = (
        'Momentos de S, E e das entradas não fixas sob Kingman. '
        'Saída: CSV statistic, a, b, value com médias (mean), variâncias (var) e '
        'covariâncias (cov, triângulo superior para F). Valores exatos como p/q.'
    )

    def add_arguments(self, parser):
        parser.add_argument('--n', type=int, required=True, help='Número de folhas (n >= 4)')
        parser.add_argument('--targets', default='S,E', help=f'Lista separada por vírgulas entre {",".join(TARGETS)}')
        parser.add_argument(
            '--engine', choices=ENGINES, default='feedforward',
            help="'feedforward' (produtos por camada) ou 'dense' (fórmulas DPH completas, n pequeno)",
        )
        parser.add_argument('--out', help='Arquivo de saída (.csv ou .xlsx); padrão: stdout')
        self.add_mode_argument(parser)
        self.add_threads_argument(parser)

    def handle(self, *args, **options):
        targets = [t.strip() for t in options['targets'].split(',') if t.strip()]
        if not targets:
            raise ValidationError('--targets vazio')
        space = enumerate_states(options['n'])
        blocks = tier_blocks(space, options['mode'])
        rows = moment_rows(space, blocks, targets, options['engine'], options['threads'])
        self.emit_table(
            ['statistic', 'a', 'b', 'value'],
            ([stat, a, b, format_number(value)] for stat, a, b, value in rows),
            options['out'],
        )
