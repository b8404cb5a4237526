from apps.core.commands import RankedTreesCommand
from apps.fmatrix.services import fmatrix_record
from apps.neutrality.services import simulate_corpus


class Command(RankedTreesCommand):
    help = (
        'Simula um corpus de formas ranqueadas pelo coalescente de Kingman ou pelo '
        'modelo beta-splitting. Saída: JSONL {n, tri} por árvore.'
    )

    def add_arguments(self, parser):
        parser.add_argument('--model', choices=['kingman', 'beta'], default='kingman', help='Modelo gerador')
        parser.add_argument('--beta', type=float, help='Parâmetro beta (> -2), obrigatório com --model beta')
        parser.add_argument('--n', type=int, required=True, help='Número de folhas (n >= 3)')
        parser.add_argument('--count', type=int, default=1, help='Número de árvores (padrão: 1)')
        parser.add_argument('--out', help='Arquivo JSONL de saída; padrão: stdout')
        self.add_seed_argument(parser)

    def handle(self, *args, **options):
        corpus = simulate_corpus(
            options['model'], options['n'], options['count'], options['seed'], beta=options['beta'],
        )
        self.emit_jsonl((fmatrix_record(F) for F in corpus), options['out'])
