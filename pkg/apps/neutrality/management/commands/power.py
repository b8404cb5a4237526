from apps.core.commands import RankedTreesCommand
from apps.core.numeric import FLOAT
from apps.neutrality.services import TESTS, null_model, parse_grid, power_curve


class Command(RankedTreesCommand):
    help = (
        'Curva de poder por Monte Carlo contra alternativas beta-splitting. '
        'Saída: CSV test, beta, rate, se, replicates (alpha = --alpha).'
    )

    def add_arguments(self, parser):
        parser.add_argument('--n', type=int, default=25, help='Número de folhas (padrão: 25)')
        parser.add_argument('--m', type=int, default=1000, help='Árvores por amostra (padrão: 1000)')
        parser.add_argument('--reps', type=int, default=1000, help='Réplicas por valor de beta (padrão: 1000)')
        parser.add_argument(
            '--beta-grid', default='-0.9:1.0:0.1', help="Grade 'início:fim:passo' ou lista com vírgulas",
        )
        parser.add_argument(
            '--tests', default=','.join(TESTS), help=f'Testes separados por vírgula (padrão: {",".join(TESTS)})',
        )
        parser.add_argument('--K', type=int, default=10, help='Número de caixas do teste G_E (padrão: 10)')
        parser.add_argument('--alpha', type=float, default=0.05, help='Nível dos testes (padrão: 0.05)')
        parser.add_argument('--workers', type=int, default=1, help='Processos para as réplicas (padrão: 1)')
        parser.add_argument('--out', help='Arquivo CSV de saída; padrão: stdout')
        self.add_seed_argument(parser)
        self.add_threads_argument(parser)

    def handle(self, *args, **options):
        grid = parse_grid(options['beta_grid'])
        tests = tuple(name.strip() for name in options['tests'].split(',') if name.strip())
        null = null_model(options['n'], FLOAT, threads=options['threads'])
        rows = power_curve(
            grid, options['n'], options['m'], options['reps'], options['seed'],
            null=null, tests=tests, K=options['K'], alpha=options['alpha'], workers=options['workers'],
        )
        self.emit_table(['test', 'beta', 'rate', 'se', 'replicates'], rows, options['out'])
