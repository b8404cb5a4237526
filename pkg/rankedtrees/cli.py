"""
Ponto de entrada único `rankedtrees <subcomando> [opções]`.

Cada subcomando é um comando de gerenciamento do Django; `test` é servido pelo
comando `neutrality` para que `manage.py test` continue sendo o executor de testes.
"""
import os
import sys

SUBCOMMANDS = {
    'statespace': 'statespace',
    'kernel': 'kernel',
    'sample': 'sample',
    'simulate': 'simulate',
    'balance': 'balance',
    'frechet': 'frechet',
    'moments': 'moments',
    'bcp': 'bcp',
    'test': 'neutrality',
    'power': 'power',
}


def usage():
    return 'uso: rankedtrees {%s} [opções]\n' % ','.join(SUBCOMMANDS)


def dispatch(argv):
    """Executa o subcomando e devolve o código de saída (0, 2 validação, 3 capacidade)"""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'rankedtrees.settings')
    if not argv or argv[0] in ('-h', '--help'):
        sys.stdout.write(usage())
        return 0 if argv else 2
    name, *rest = argv
    if name not in SUBCOMMANDS:
        sys.stderr.write(f'subcomando desconhecido: {name}\n' + usage())
        return 2

    from django.core.management import execute_from_command_line

    try:
        execute_from_command_line(['rankedtrees', SUBCOMMANDS[name], *rest])
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 2
    return 0


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == '__main__':
    main()
