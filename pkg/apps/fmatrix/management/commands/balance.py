from apps.core.commands import RankedTreesCommand
from apps.core.exceptions import ValidationError
from apps.core.numeric import format_number
from apps.fmatrix.services import balance_E, balance_S, balance_row, balance_scatter, read_corpus
from apps.kingman.services import tier_blocks
from apps.statespace.services import enumerate_states


class Command(RankedTreesCommand):
    help = (
        'Índices de balanço de um corpus JSONL de F-matrizes ({n, tri} por linha). '
        'Saída: CSV com colunas record (ordem no corpus), n, E, S, sackin, colless. Matrizes que não '
        'formam um caminho válido recebem apenas E e S. '
        'Com --scatter: CSV index_value, S, probability sobre todas as árvores de --n folhas.'
    )

    def add_arguments(self, parser):
        parser.add_argument('--in', dest='input', help='Corpus JSONL de entrada')
        parser.add_argument('--out', help='Arquivo de saída (.csv ou .xlsx); padrão: stdout')
        parser.add_argument('--scatter', choices=['sackin', 'colless'], help='Tabela (índice, S, probabilidade)')
        parser.add_argument('--n', type=int, help='Número de folhas para --scatter')
        self.add_mode_argument(parser)

    def handle(self, *args, **options):
        if options['scatter']:
            if not options['n']:
                raise ValidationError('--scatter exige --n')
            space = enumerate_states(options['n'])
            rows = [
                [value, s, format_number(prob)]
                for value, s, prob in balance_scatter(space, options['scatter'], tier_blocks(space, options['mode']))
            ]
            self.emit_table(['index_value', 'S', 'probability'], rows, options['out'])
            return
        if not options['input']:
            raise ValidationError('informe --in ou --scatter')

        def rows():
            for record, F in enumerate(read_corpus(options['input']), start=1):
                try:
                    yield [record, F.n, *balance_row(F)]
                except ValidationError:
                    yield [record, F.n, balance_E(F), balance_S(F), '', '']

        self.emit_table(['record', 'n', 'E', 'S', 'sackin', 'colless'], rows(), options['out'])
