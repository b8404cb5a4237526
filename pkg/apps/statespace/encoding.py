"""
Representação binária decremental dos estados.

Um estado x (coluna de uma F-matriz) é guardado como (mask, ext): o bit k de
`mask` marca a linha k+1 onde uma linhagem interna deixa de existir, e `ext`
é o número de linhagens externas (x_{n-1}).
"""
import numpy as np

from apps.core.exceptions import ValidationError

KEY_SHIFT = 8
HARD_MAX_N = 55


def pack(masks, exts):
    """Chave inteira única por estado"""
    return (np.asarray(masks, dtype=np.int64) << KEY_SHIFT) | np.asarray(exts, dtype=np.int64)


def unpack(keys):
    keys = np.asarray(keys, dtype=np.int64)
    return keys >> KEY_SHIFT, keys & ((1 << KEY_SHIFT) - 1)


def diff_encoding(x):
    """
    Aplica o operador d: (x - shift_left(x))^+.
    Retorna (prefixo binário de tamanho n-2, número de linhagens externas).
    """
    values = [int(v) for v in x]
    if len(values) < 2:
        raise ValidationError('vetor de estado precisa de pelo menos 2 entradas')
    prefix = tuple(max(values[i] - values[i + 1], 0) for i in range(len(values) - 1))
    if any(v > 1 for v in prefix):
        raise ValidationError(f'vetor {tuple(values)} não é um estado válido: decremento maior que 1')
    if any(v < 0 for v in values):
        raise ValidationError(f'vetor {tuple(values)} tem entradas negativas')
    return prefix, values[-1]


def decode(prefix, external_count):
    """Inverso de diff_encoding: somas acumuladas a partir do fim mais as externas"""
    prefix = [int(v) for v in prefix]
    lineages = sum(prefix) + int(external_count)
    column = lineages - 1
    n_rows = len(prefix) + 1
    x = []
    for row in range(1, n_rows + 1):
        if row < column:
            x.append(0)
        else:
            x.append(int(external_count) + sum(prefix[row - 1:]))
    return tuple(x)


def mask_of(prefix):
    return sum(1 << k for k, bit in enumerate(prefix) if bit)


def decode_many(masks, exts, column, n):
    """Vetores x (uma linha por estado) para estados de uma mesma coluna"""
    masks = np.asarray(masks, dtype=np.int64)
    exts = np.asarray(exts, dtype=np.int64)
    x = np.zeros((masks.size, n - 1), dtype=np.int16)
    if n > 2:
        bits = (masks[:, None] >> np.arange(n - 2, dtype=np.int64)) & 1
        suffix = np.cumsum(bits[:, ::-1], axis=1)[:, ::-1]
        x[:, :n - 2] = suffix + exts[:, None]
    x[:, n - 2] = exts
    x[:, :column - 1] = 0
    return x


def coalescence_moves(masks, exts, column, n):
    """
    Todas as coalescências possíveis a partir dos estados (masks, exts) da coluna
    `column` (2 <= column <= n-1). Retorna arrays (origem, chave destino, peso),
    onde o peso é o número de pares de linhagens que levam à transição:
    1 (duas internas), ext (interna + externa) ou C(ext, 2) (duas externas).
    """
    masks = np.asarray(masks, dtype=np.int64)
    exts = np.asarray(exts, dtype=np.int64)
    new_bit = np.int64(1) << (column - 2)
    rows = list(range(column - 1, n - 2))
    present = {b: ((masks >> b) & 1).astype(bool) for b in rows}
    sources, keys, weights = [], [], []

    def collect(sel, target_masks, target_exts, weight):
        if sel.size:
            sources.append(sel)
            keys.append(pack(target_masks, target_exts))
            weights.append(weight)

    for pos, a in enumerate(rows):
        has_a = present[a]
        for b in rows[pos + 1:]:
            sel = np.flatnonzero(has_a & present[b])
            collect(sel, (masks[sel] ^ (1 << a) ^ (1 << b)) | new_bit, exts[sel], np.ones(sel.size, dtype=np.int64))
        sel = np.flatnonzero(has_a & (exts >= 1))
        collect(sel, (masks[sel] ^ (1 << a)) | new_bit, exts[sel] - 1, exts[sel])
    sel = np.flatnonzero(exts >= 2)
    collect(sel, masks[sel] | new_bit, exts[sel] - 2, exts[sel] * (exts[sel] - 1) // 2)

    if not sources:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    return np.concatenate(sources), np.concatenate(keys), np.concatenate(weights)


def full_code(x):
    """d(x) como vetor de tamanho n-1 (prefixo + externas)"""
    prefix, ext = diff_encoding(x)
    return np.array(prefix + (ext,), dtype=np.int64)


def coalescence_pair(d_from, d_to, tier):
    """
    Par (i, k), 1-based, com d(x) - d(y) + e_{n-2-t} = e_i + e_k; None se não existe.
    `d_from` e `d_to` são códigos completos (tamanho n-1) de estados nas camadas t e t+1.
    """
    diff = np.asarray(d_from, dtype=np.int64) - np.asarray(d_to, dtype=np.int64)
    size = diff.size
    diff[size - 2 - tier] += 1
    if np.any(diff < 0) or diff.sum() != 2:
        return None
    hits = np.flatnonzero(diff)
    if hits.size == 2:
        return int(hits[0]) + 1, int(hits[1]) + 1
    if hits[0] == size - 1:
        return size, size
    return None
