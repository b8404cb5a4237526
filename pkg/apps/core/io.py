"""
Leitura e escrita de arquivos: JSON, JSONL, CSV e XLSX.

Toda escrita é atômica (arquivo temporário no mesmo diretório + os.replace).
"""
import csv
import io
import json
import logging
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path

from openpyxl import Workbook

from .exceptions import CorpusFormatError, ValidationError

logger = logging.getLogger(__name__)


@contextmanager
def atomic_path(path):
    """Entrega um caminho temporário que substitui `path` ao final"""
    target = Path(path)
    directory = target.parent if str(target.parent) else Path('.')
    directory.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f'.{target.name}.', dir=directory)
    os.close(fd)
    try:
        yield tmp
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.debug('arquivo escrito: %s', target)


@contextmanager
def atomic_open(path, newline=None):
    with atomic_path(path) as tmp:
        with open(tmp, 'w', encoding='utf-8', newline=newline) as handle:
            yield handle


def dump_json(payload):
    return json.dumps(payload, indent=2, ensure_ascii=False) + '\n'


def write_json(path, payload):
    with atomic_open(path) as handle:
        handle.write(dump_json(payload))


def write_jsonl(path, records):
    count = 0
    with atomic_open(path) as handle:
        for record in records:
            handle.write(json.dumps(record, separators=(',', ':')) + '\n')
            count += 1
    return count


def iter_jsonl(path):
    """Gera (número da linha, objeto) ignorando linhas vazias"""
    try:
        handle = open(path, encoding='utf-8')
    except OSError as exc:
        raise ValidationError(f'não foi possível abrir {path}: {exc.strerror}') from exc
    with handle:
        for number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                yield number, json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f'JSON inválido ({exc.msg})', line=number) from exc


def render_table(header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def write_table(path, header, rows):
    """CSV por padrão; planilha quando o destino termina em .xlsx"""
    rows = list(rows)
    if str(path).lower().endswith('.xlsx'):
        workbook = Workbook()
        sheet = workbook.active
        sheet.title = 'rankedtrees'
        sheet.append(list(header))
        for row in rows:
            sheet.append([_cell(value) for value in row])
        with atomic_path(path) as tmp:
            workbook.save(tmp)
    else:
        with atomic_open(path, newline='') as handle:
            handle.write(render_table(header, rows))
    return len(rows)


def _cell(value):
    # Planilhas não têm tipo racional; 'p/q' vira texto
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return value
    return str(value)
