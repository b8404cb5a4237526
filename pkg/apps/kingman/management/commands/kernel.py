from apps.core.commands import RankedTreesCommand
from apps.core.numeric import format_number
from apps.kingman.services import blocks_mode, tier_blocks
from apps.statespace.services import enumerate_states


class Command(RankedTreesCommand):
    help = (
        'Núcleo de transição de Kingman em blocos entre camadas. '
        'Saída: JSON {n, mode, blocks}; cada bloco traz from_tier, shape e as entradas '
        "não nulas [from_index, to_index, probability] (índices globais 1-based; "
        "probabilidades 'p/q' em modo racional)."
    )

    def add_arguments(self, parser):
        parser.add_argument('--n', type=int, required=True, help='Número de folhas (n >= 3)')
        parser.add_argument('--emit', help='Arquivo JSON de saída; padrão: stdout')
        self.add_mode_argument(parser)

    def handle(self, *args, **options):
        space = enumerate_states(options['n'])
        blocks = tier_blocks(space, options['mode'])

        def entries(block):
            base_from = space.offsets[block.from_tier] + 1
            base_to = space.offsets[block.from_tier + 1] + 1
            sources, targets = block.nonzeros()
            return [
                [base_from + s, base_to + t, format_number(block.entry(s, t))]
                for s, t in zip(sources.tolist(), targets.tolist())
            ]

        self.emit_json({
            'n': space.n,
            'mode': blocks_mode(blocks),
            'blocks': [
                {'from_tier': block.from_tier, 'shape': [int(v) for v in block.shape], 'entries': entries(block)}
                for block in blocks
            ],
        }, options['emit'])
