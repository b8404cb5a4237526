"""
Base dos comandos de linha de comando do projeto.
"""
import json
import logging

from django.core.management.base import BaseCommand, CommandError

from .conf import setting
from .exceptions import CapacityError, RankedTreesError
from .io import dump_json, render_table, write_json, write_jsonl, write_table
from .numeric import MODES, AUTO


class RankedTreesCommand(BaseCommand):
    """
    Comando base: converte erros de domínio em códigos de saída
    (2 para validação, 3 para capacidade) e oferece saídas atômicas.
    """
    requires_system_checks = []

    def execute(self, *args, **options):
        if options.get('verbosity', 1) >= 2:
            logging.getLogger('apps').setLevel(logging.DEBUG)
        try:
            return super().execute(*args, **options)
        except CapacityError as exc:
            raise CommandError(str(exc), returncode=3) from exc
        except RankedTreesError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code) from exc

    # Argumentos compartilhados

    def add_mode_argument(self, parser):
        parser.add_argument(
            '--mode', choices=MODES, default=AUTO,
            help="Modo numérico: 'rational' (exato), 'float' ou 'auto' (racional até o limite configurado)",
        )

    def add_threads_argument(self, parser):
        parser.add_argument(
            '--threads', type=int, default=setting('RANKEDTREES_THREADS'),
            help='Limite de paralelismo interno (padrão: RANKEDTREES_THREADS ou núcleos disponíveis)',
        )

    def add_seed_argument(self, parser):
        parser.add_argument('--seed', type=int, required=True, help='Semente explícita do gerador aleatório')

    # Saídas

    def emit_json(self, payload, out=None):
        if out:
            write_json(out, payload)
            self.success(f'JSON salvo em {out}')
        else:
            self.stdout.write(dump_json(payload), ending='')

    def emit_table(self, header, rows, out=None):
        if out:
            count = write_table(out, header, rows)
            self.success(f'{count} linhas salvas em {out}')
        else:
            self.stdout.write(render_table(header, rows), ending='')

    def emit_jsonl(self, records, out=None):
        if out:
            count = write_jsonl(out, records)
            self.success(f'{count} registros salvos em {out}')
        else:
            for record in records:
                self.stdout.write(json.dumps(record, separators=(',', ':')))

    def success(self, message):
        # Mensagens de status vão para stderr para não misturar com os resultados
        self.stderr.write(message, style_func=self.style.SUCCESS)
