from apps.core.commands import RankedTreesCommand
from apps.core.exceptions import ValidationError
from apps.core.numeric import format_number
from apps.fmatrix.services import read_corpus
from apps.frechet.services import (
    frechet_variance, mean_matrix_exact, mean_matrix_sample, result_payload, vitreebi,
)
from apps.kingman.services import tier_blocks
from apps.statespace.services import enumerate_states


class Command(RankedTreesCommand):
    help = (
        'Árvores médias de Fréchet (todas as que atingem o custo mínimo). '
        'Saída: JSON {n, source, mode, min_cost, mean_matrix, variance, means: [{path, tri}]}; '
        "custos racionais como 'p/q'. Com --sample a matriz média vem do corpus JSONL."
    )

    def add_arguments(self, parser):
        parser.add_argument('--n', type=int, help='Número de folhas (obrigatório com --model)')
        parser.add_argument('--model', choices=['kingman'], default='kingman', help='Modelo nulo (padrão: kingman)')
        parser.add_argument('--sample', help='Corpus JSONL; usa a média amostral em vez do modelo')
        parser.add_argument('--out', help='Arquivo JSON de saída; padrão: stdout')
        self.add_mode_argument(parser)

    def handle(self, *args, **options):
        if options['sample']:
            matrices = list(read_corpus(options['sample']))
            if not matrices:
                raise ValidationError('corpus vazio')
            n = matrices[0].n
            if options['n'] and options['n'] != n:
                raise ValidationError(f'--n={options["n"]} mas o corpus tem n={n}')
            space = enumerate_states(n)
            mean = mean_matrix_sample(matrices, mode=options['mode'])
            variance = None
            source = options['sample']
        else:
            if not options['n']:
                raise ValidationError('informe --n')
            space = enumerate_states(options['n'])
            blocks = tier_blocks(space, options['mode'])
            mean = mean_matrix_exact(space, blocks)
            variance = frechet_variance(space, blocks, mean)
            source = options['model']

        min_cost, paths = vitreebi(space, mean)
        payload = result_payload(space, min_cost, paths)
        payload.update({
            'source': source,
            'mode': mean.mode,
            'mean_matrix': mean.tri(),
            'variance': None if variance is None else format_number(variance),
        })
        self.emit_json(payload, options['out'])
