from apps.core.commands import RankedTreesCommand
from apps.core.exceptions import ValidationError
from apps.fmatrix.services import read_corpus
from apps.neutrality.services import TESTS, null_model, null_payload, run_tests


class Command(RankedTreesCommand):
    help = (
        'Testes de neutralidade de um corpus de F-matrizes contra o coalescente de Kingman '
        '(exposto como o subcomando "test"). Saída: JSON {n, m, null, tests: '
        '[{test, statistic, distribution, p_value, config}]}.'
    )

    def add_arguments(self, parser):
        parser.add_argument('--in', dest='input', required=True, help='Corpus JSONL com registros {n, tri}')
        parser.add_argument('--null', choices=['kingman'], default='kingman', help='Modelo nulo (padrão: kingman)')
        parser.add_argument(
            '--tests', default=','.join(TESTS), help=f'Testes separados por vírgula (padrão: {",".join(TESTS)})',
        )
        parser.add_argument('--K', type=int, default=10, help='Número de caixas do teste G_E (padrão: 10)')
        parser.add_argument('--out', help='Arquivo JSON de saída; padrão: stdout')
        self.add_mode_argument(parser)
        self.add_threads_argument(parser)

    def handle(self, *args, **options):
        tests = [name.strip() for name in options['tests'].split(',') if name.strip()]
        sample = list(read_corpus(options['input']))
        if not sample:
            raise ValidationError('corpus vazio')
        null = null_model(sample[0].n, options['mode'], threads=options['threads'])
        reports = run_tests(sample, null, tests, options['K'])
        payload = {
            'n': null.n,
            'm': len(sample),
            'null': dict(null_payload(null), model=options['null']),
            'tests': [report.to_json() for report in reports],
        }
        self.emit_json(payload, options['out'])
