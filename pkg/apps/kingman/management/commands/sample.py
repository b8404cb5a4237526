from apps.core.commands import RankedTreesCommand
from apps.core.numeric import FLOAT
from apps.fmatrix.services import path_to_fmatrix
from apps.kingman.services import iter_sample_paths, tier_blocks
from apps.statespace.services import enumerate_states


class Command(RankedTreesCommand):
    help = (
        'Amostra caminhos do coalescente ranqueado de Kingman. '
        'Saída: JSONL com um registro {n, path, tri} por árvore.'
    )

    def add_arguments(self, parser):
        parser.add_argument('--n', type=int, required=True, help='Número de folhas (n >= 3)')
        parser.add_argument('--count', type=int, default=1, help='Número de árvores (padrão: 1)')
        parser.add_argument('--out', help='Arquivo JSONL de saída; padrão: stdout')
        self.add_seed_argument(parser)

    def handle(self, *args, **options):
        space = enumerate_states(options['n'])
        blocks = tier_blocks(space, FLOAT)
        records = (
            {'n': space.n, 'path': list(path.indices), 'tri': path_to_fmatrix(space, path).tri()}
            for path in iter_sample_paths(space, blocks, options['count'], options['seed'])
        )
        self.emit_jsonl(records, options['out'])
