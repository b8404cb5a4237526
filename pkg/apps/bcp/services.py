"""
Processo de contagem de blocos ranqueado (cadeia de saltos do BCP).

Estados a = (a_1, ..., a_{n-1}) com sum i a_i = n, agrupados em camadas pelo
número de blocos. Só a cadeia de saltos é modelada.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
from scipy import sparse
from sympy import npartitions
from sympy.utilities.iterables import partitions

from apps.core.exceptions import ValidationError
from apps.core.numeric import AUTO, FLOAT, RATIONAL, resolve_mode, zeros
from apps.kingman.services import TierBlock, assemble_dense
from apps.phasetype.services import DiscretePhaseType, dph_moments, dph_pmf_vector, reward_transform
from apps.statespace.services import TieredSpace, fibonacci

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BcpState:
    a: tuple
    tier: int
    index: int

    @property
    def blocks(self):
        return sum(self.a)

    @property
    def singletons(self):
        return self.a[0]


class BcpSpace(TieredSpace):
    """BCP_n sem o MRCA; camada t = estados com n - t blocos"""

    def __init__(self, n, vectors, offsets):
        super().__init__(n, vectors, offsets)
        self._lookup = [
            {tuple(int(v) for v in row): k for k, row in enumerate(self.tier_vectors(t))}
            for t in range(self.n_tiers)
        ]

    def index_of(self, a):
        a = tuple(int(v) for v in a)
        tier = self.n - sum(a)
        if len(a) != self.n - 1 or not 0 <= tier < self.n_tiers or a not in self._lookup[tier]:
            raise ValidationError(f'{a} não é um estado de BCP_{self.n}')
        return self.offsets[tier] + self._lookup[tier][a] + 1

    def state(self, index):
        tier, _ = self.local_position(index)
        return BcpState(a=tuple(int(v) for v in self.vectors[index - 1]), tier=tier, index=index)

    @property
    def states(self):
        return [self.state(i) for i in range(1, self.size + 1)]

    def singletons(self):
        return self.vectors[:, 0].astype(np.int64)


def bcp_states(n):
    """
    Todas as partições de n com pelo menos dois blocos, por camada e, dentro da
    camada, em ordem lexicográfica decrescente de a (a_1 maior primeiro).
    """
    if n < 3:
        raise ValidationError(f'n precisa ser pelo menos 3 (recebido {n})')
    by_tier = [[] for _ in range(n - 1)]
    for parts in partitions(n):
        blocks = sum(parts.values())
        if blocks < 2:
            continue
        a = [0] * (n - 1)
        for size, count in parts.items():
            a[size - 1] = count
        by_tier[n - blocks].append(a)
    vectors = []
    for rows in by_tier:
        rows = np.array(rows, dtype=np.int64).reshape(-1, n - 1)
        order = np.lexsort(rows.T[::-1])[::-1]
        vectors.append(rows[order])
    offsets = np.concatenate([[0], np.cumsum([v.shape[0] for v in vectors])])
    space = BcpSpace(n, np.vstack(vectors), offsets)
    logger.info('BCP n=%d: %d estados transientes', n, space.size)
    return space


def _merges(a):
    """(destino, peso) de cada fusão de dois blocos a partir de a"""
    sizes = [i + 1 for i, count in enumerate(a) if count]
    for pos, i in enumerate(sizes):
        for j in sizes[pos:]:
            weight = comb(a[i - 1], 2) if i == j else a[i - 1] * a[j - 1]
            if weight == 0:
                continue
            target = list(a)
            target[i - 1] -= 1
            target[j - 1] -= 1
            target[i + j - 1] += 1
            yield tuple(target), weight


def bcp_kernel(space, mode=AUTO):
    """Blocos T_{t,t+1} da cadeia de saltos: taxa da fusão / C(b, 2)"""
    n = space.n
    mode = resolve_mode(mode, n)
    blocks = []
    for tier in range(space.n_tiers - 1):
        b = n - tier
        pairs = comb(b, 2)
        rows, cols, weights = [], [], []
        for local, row in enumerate(space.tier_vectors(tier)):
            for target, weight in _merges(tuple(int(v) for v in row)):
                rows.append(local)
                cols.append(space.index_of(target) - 1 - space.offsets[tier + 1])
                weights.append(weight)
        shape = (space.tier_size(tier), space.tier_size(tier + 1))
        if mode == FLOAT:
            probs = sparse.csr_matrix((np.asarray(weights, dtype=float) / pairs, (rows, cols)), shape=shape)
        else:
            probs = zeros(shape, RATIONAL)
            for r, c, w in zip(rows, cols, weights):
                probs[r, c] += Fraction(w, pairs)
        blocks.append(TierBlock(from_tier=tier, probs=probs, mode=mode))
    return blocks


def bcp_dph(space, blocks=None, mode=AUTO):
    """A cadeia de saltos como DPH; esparsa em modo float"""
    blocks = blocks if blocks is not None else bcp_kernel(space, mode)
    if blocks[0].mode == RATIONAL:
        pi, T = assemble_dense(space, blocks)
        return DiscretePhaseType(pi=pi, T=T)
    rows, cols, data = [], [], []
    for block in blocks:
        coo = block.probs.tocoo()
        rows.append(coo.row + space.offsets[block.from_tier])
        cols.append(coo.col + space.offsets[block.from_tier + 1])
        data.append(coo.data)
    T = sparse.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(space.size, space.size),
    )
    pi = np.zeros(space.size)
    pi[0] = 1.0
    return DiscretePhaseType(pi=pi, T=T)


def bcp_E_distribution(n, mode=AUTO):
    """Comprimento externo E como DPH: recompensa = número de singletons"""
    space = bcp_states(n)
    d = bcp_dph(space, mode=mode)
    return reward_transform(d, space.singletons())


def bcp_E_pmf(n, mode=AUTO):
    """Pares (m, P(E = m)) com probabilidade positiva"""
    d = bcp_E_distribution(n, mode)
    pmf = dph_pmf_vector(d)
    return [(m, p) for m, p in enumerate(pmf, start=1) if p != 0]


def bcp_sizes(n_max, n_min=3):
    """(n, p(n), Fib(n+1)): tamanhos com MRCA do BCP e do coalescente ranqueado"""
    if n_max < n_min:
        raise ValidationError('n_max menor que n_min')
    return [(n, int(npartitions(n)), fibonacci(n + 1)) for n in range(n_min, n_max + 1)]


def e_moments(n, mode=AUTO):
    """(E[E], Var(E)) pela DPH transformada"""
    return dph_moments(bcp_E_distribution(n, mode))
