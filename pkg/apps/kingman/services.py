"""
Núcleo de transição do coalescente ranqueado sob Kingman: viabilidade,
probabilidades, blocos esparsos entre camadas, amostragem e enumeração de caminhos.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
from scipy import sparse

from apps.core.conf import setting
from apps.core.exceptions import CapacityError, InfeasiblePathError, ValidationError
from apps.core.numeric import AUTO, FLOAT, RATIONAL, asarray, resolve_mode, scalar, zeros
from apps.statespace.encoding import coalescence_moves, coalescence_pair
from apps.statespace.services import check_adjacent

logger = logging.getLogger(__name__)

# Maior bloco racional (em células) guardado de forma densa
RATIONAL_BLOCK_CELLS = 1_000_000
DENSE_MAX_STATES = 5000


@dataclass(frozen=True)
class TierBlock:
    """
    Bloco T_{k,k+1}: linhas = estados da camada k, colunas = estados da camada k+1.
    Em modo float é uma csr_matrix do scipy; em modo racional, um array denso de Fraction.
    """
    from_tier: int
    probs: object
    mode: str

    @property
    def shape(self):
        return self.probs.shape

    @property
    def nnz(self):
        if self.mode == FLOAT:
            return int(self.probs.nnz)
        return int(np.count_nonzero(self.probs != 0))

    def left(self, vector):
        """vector @ T_{k,k+1}"""
        if self.mode == FLOAT:
            return np.asarray(self.probs.T @ np.asarray(vector, dtype=float))
        return np.asarray(vector, dtype=object) @ self.probs

    def right(self, values):
        """T_{k,k+1} @ values (vetor ou matriz com uma linha por estado da camada k+1)"""
        if self.mode == FLOAT:
            return np.asarray(self.probs @ np.asarray(values, dtype=float))
        return self.probs @ np.asarray(values, dtype=object)

    def dense(self):
        if self.mode == FLOAT:
            return self.probs.toarray()
        return self.probs.copy()

    def dense_rows(self):
        return self.dense().tolist()

    def nonzeros(self):
        """Pares (linha, coluna) com probabilidade positiva, ordenados por linha"""
        if self.mode == FLOAT:
            coo = self.probs.tocoo()
            order = np.lexsort((coo.col, coo.row))
            return coo.row[order].astype(np.int64), coo.col[order].astype(np.int64)
        rows, cols = np.nonzero(self.probs != 0)
        return rows.astype(np.int64), cols.astype(np.int64)

    def row(self, i):
        """(colunas, probabilidades) da linha i"""
        if self.mode == FLOAT:
            start, stop = self.probs.indptr[i], self.probs.indptr[i + 1]
            return self.probs.indices[start:stop].astype(np.int64), self.probs.data[start:stop]
        cols = np.flatnonzero(self.probs[i] != 0)
        return cols, self.probs[i, cols]

    def entry(self, i, j):
        if self.mode == FLOAT:
            return float(self.probs[i, j])
        return self.probs[i, j]

    def row_sums(self):
        if self.mode == FLOAT:
            return np.asarray(self.probs.sum(axis=1)).ravel()
        return self.probs.sum(axis=1)


@dataclass(frozen=True)
class ChainPath:
    """Caminho (índices 1-based) pelas camadas 0..n-2"""
    indices: tuple

    def __post_init__(self):
        object.__setattr__(self, 'indices', tuple(int(i) for i in self.indices))

    def __len__(self):
        return len(self.indices)


def block_from_rows(from_tier, matrix, mode=FLOAT):
    """
    Aceita um bloco fornecido externamente (qualquer modelo bifurcante homogêneo
    no tempo) e valida que as linhas somam 1.
    """
    if mode == RATIONAL:
        probs = asarray(matrix, RATIONAL)
    else:
        probs = sparse.csr_matrix(np.asarray(matrix, dtype=float))
    block = TierBlock(from_tier=from_tier, probs=probs, mode=mode)
    sums = block.row_sums()
    values = block.dense()
    if np.any(values < 0):
        raise ValidationError(f'bloco {from_tier}: probabilidades negativas')
    if mode == RATIONAL:
        if any(s != 1 for s in sums):
            raise ValidationError(f'bloco {from_tier}: linhas não somam 1')
    elif np.any(np.abs(sums - 1.0) > 1e-12):
        raise ValidationError(f'bloco {from_tier}: linhas não somam 1')
    return block


def tier_blocks(space, mode=AUTO):
    """Blocos T_{0,1}, ..., T_{n-3,n-2} do núcleo de Kingman"""
    n = space.n
    mode = resolve_mode(mode, n)
    blocks = []
    for tier in range(n - 2):
        column = space.column(tier)
        sl = space.tier_slice(tier)
        sources, keys, weights = coalescence_moves(space.masks[sl], space.exts[sl], column, n)
        targets = space.positions(tier + 1, keys)
        shape = (space.tier_size(tier), space.tier_size(tier + 1))
        pairs = comb(n - tier, 2)
        if mode == FLOAT:
            probs = sparse.csr_matrix((weights / pairs, (sources, targets)), shape=shape)
        else:
            if shape[0] * shape[1] > RATIONAL_BLOCK_CELLS:
                raise CapacityError(f'bloco racional {shape} grande demais para n={n}; use --mode float')
            probs = zeros(shape, RATIONAL)
            for s, c, w in zip(sources.tolist(), targets.tolist(), weights.tolist()):
                probs[s, c] += Fraction(w, pairs)
        blocks.append(TierBlock(from_tier=tier, probs=probs, mode=mode))
    logger.info('núcleo de Kingman n=%d (%s): %d blocos, %d entradas não nulas',
                n, mode, len(blocks), total_nonzeros(blocks))
    return blocks


def total_nonzeros(blocks):
    return sum(block.nnz for block in blocks)


def blocks_mode(blocks):
    return blocks[0].mode if blocks else RATIONAL


def feasible(x, y):
    """
    Par de coalescência (i, k), 1-based, que leva x a y; None se não existe.
    Condição: d(x) - d(y) + e_{n-2-t} = e_i + e_k.
    """
    check_adjacent(x, y)
    return coalescence_pair(x.dcode[0] + (x.dcode[1],), y.dcode[0] + (y.dcode[1],), x.tier)


def transition_prob(x, y, mode=RATIONAL):
    """Probabilidade de Kingman de x para y; zero quando a transição não existe"""
    if x.n != y.n or y.tier != x.tier + 1:
        return Fraction(0) if mode == RATIONAL else 0.0
    pair = feasible(x, y)
    if pair is None:
        return Fraction(0) if mode == RATIONAL else 0.0
    i, k = pair
    ext = x.external_count
    if k < x.n - 1:
        count = 1
    elif i < x.n - 1:
        count = ext
    else:
        count = comb(ext, 2)
    prob = Fraction(count, comb(x.lineages, 2))
    return prob if mode == RATIONAL else float(prob)


def sample_path(space, seed, blocks=None):
    """Um caminho simulado com o núcleo (Kingman por padrão), determinístico dada a semente"""
    blocks = blocks if blocks is not None else tier_blocks(space, FLOAT)
    return next(iter_sample_paths(space, blocks, 1, seed))


def iter_sample_paths(space, blocks, count, seed):
    rng = np.random.default_rng(seed)
    rows = [[None] * block.shape[0] for block in blocks]
    for _ in range(count):
        local = 0
        indices = [1]
        for tier, block in enumerate(blocks):
            cached = rows[tier][local]
            if cached is None:
                cols, probs = block.row(local)
                cached = rows[tier][local] = (cols, np.cumsum(np.asarray(probs, dtype=float)))
            cols, cumulative = cached
            pick = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side='right'))
            local = int(cols[min(pick, cols.size - 1)])
            indices.append(space.offsets[tier + 1] + local + 1)
        yield ChainPath(indices)


def path_probability(space, path, blocks=None):
    """Produto das probabilidades de transição ao longo do caminho"""
    blocks = blocks if blocks is not None else tier_blocks(space)
    indices = path.indices if isinstance(path, ChainPath) else tuple(path)
    if len(indices) != space.n - 1:
        raise InfeasiblePathError(f'caminho com {len(indices)} estados; esperado {space.n - 1}')
    prob = Fraction(1) if blocks_mode(blocks) == RATIONAL else 1.0
    for step, index in enumerate(indices):
        tier, local = space.local_position(index)
        if tier != step:
            raise InfeasiblePathError(f'estado {index} não pertence à camada {step}', step=step)
        if step == 0:
            continue
        _, previous = space.local_position(indices[step - 1])
        p = blocks[step - 1].entry(previous, local)
        if p == 0:
            raise InfeasiblePathError(f'transição {indices[step - 1]} -> {index} impossível', step=step)
        prob *= p
    return prob


def enumerate_paths(space, blocks=None):
    """Todos os caminhos com probabilidades exatas (busca em profundidade)"""
    limit = setting('RANKEDTREES_ENUMERATION_MAX_N')
    if space.n > limit:
        raise CapacityError(f'enumeração limitada a n <= {limit} (recebido n={space.n})')
    blocks = blocks if blocks is not None else tier_blocks(space)
    one = Fraction(1) if blocks_mode(blocks) == RATIONAL else 1.0
    successors = []
    for block in blocks:
        rows = []
        for i in range(block.shape[0]):
            cols, probs = block.row(i)
            rows.append(list(zip(cols.tolist(), list(probs))))
        successors.append(rows)

    results = []
    last = space.n - 2
    stack = [(0, 0, (1,), one)]
    while stack:
        tier, local, indices, prob = stack.pop()
        if tier == last:
            results.append((ChainPath(indices), prob))
            continue
        base = space.offsets[tier + 1] + 1
        for col, p in reversed(successors[tier][local]):
            stack.append((tier + 1, col, indices + (base + col,), prob * p))
    logger.info('n=%d: %d caminhos enumerados', space.n, len(results))
    return results


def assemble_dense(space, blocks=None):
    """(pi, T) densos do coalescente ranqueado; T tem as linhas da última camada nulas"""
    if space.size > DENSE_MAX_STATES:
        raise CapacityError(f'{space.size} estados: grande demais para a forma densa')
    blocks = blocks if blocks is not None else tier_blocks(space)
    mode = blocks_mode(blocks)
    T = zeros((space.size, space.size), mode)
    for block in blocks:
        rows = space.tier_slice(block.from_tier)
        cols = space.tier_slice(block.from_tier + 1)
        T[rows, cols] = block.dense()
    pi = zeros(space.size, mode)
    pi[0] = scalar(1, mode)
    return pi, T


def check_path(space, path):
    """Valida camadas e viabilidade de cada transição, sem depender do núcleo"""
    indices = path.indices if isinstance(path, ChainPath) else tuple(path)
    if len(indices) != space.n - 1:
        raise InfeasiblePathError(f'caminho com {len(indices)} estados; esperado {space.n - 1}')
    states = []
    for step, index in enumerate(indices):
        state = space.state(index)
        if state.tier != step:
            raise InfeasiblePathError(f'estado {index} não pertence à camada {step}', step=step)
        if states and feasible(states[-1], state) is None:
            raise InfeasiblePathError(f'transição {states[-1].index} -> {index} impossível', step=step)
        states.append(state)
    return states
