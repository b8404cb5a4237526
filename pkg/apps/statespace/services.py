"""
Construção e indexação do espaço de estados X_n do coalescente ranqueado.
"""
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from apps.core.conf import setting
from apps.core.exceptions import CapacityError, TierMismatchError, ValidationError

from .encoding import (
    HARD_MAX_N, coalescence_moves, decode_many, diff_encoding, mask_of, pack, unpack,
)

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def fibonacci(k):
    """Fib(1) = Fib(2) = 1"""
    a, b = 0, 1
    for _ in range(k):
        a, b = b, a + b
    return a


@dataclass(frozen=True)
class RankedState:
    """Um estado de X_n: coluna de F-matriz com camada, índice e código d"""
    x: tuple
    tier: int
    index: int
    dcode: tuple

    @property
    def n(self):
        return len(self.x) + 1

    @property
    def lineages(self):
        return max(self.x)

    @property
    def external_count(self):
        return self.dcode[1]

    @property
    def column(self):
        return self.n - 1 - self.tier


class TieredSpace:
    """
    Estados agrupados em camadas consecutivas, indexados de 1 em diante.
    `vectors` tem uma linha por estado; `offsets[t]` marca o início da camada t.
    """

    def __init__(self, n, vectors, offsets):
        self.n = n
        self.vectors = vectors
        self.vectors.setflags(write=False)
        self.offsets = tuple(int(o) for o in offsets)

    @property
    def size(self):
        return int(self.vectors.shape[0])

    @property
    def absorbing_index(self):
        return self.size + 1

    @property
    def n_tiers(self):
        return len(self.offsets) - 1

    @property
    def tiers(self):
        """Índices (1-based) de cada camada"""
        return [range(self.offsets[t] + 1, self.offsets[t + 1] + 1) for t in range(self.n_tiers)]

    def tier_slice(self, tier):
        return slice(self.offsets[tier], self.offsets[tier + 1])

    def tier_size(self, tier):
        return self.offsets[tier + 1] - self.offsets[tier]

    def tier_vectors(self, tier):
        return self.vectors[self.tier_slice(tier)]

    def tier_counts(self):
        return [self.tier_size(t) for t in range(self.n_tiers)]

    def tier_of(self, index):
        if not 1 <= index <= self.size:
            raise ValidationError(f'índice {index} fora do espaço (1..{self.size})')
        return int(np.searchsorted(self.offsets, index - 1, side='right')) - 1

    def local_position(self, index):
        tier = self.tier_of(index)
        return tier, index - 1 - self.offsets[tier]


class StateSpace(TieredSpace):
    """X_n completo, com a codificação (mask, ext) de cada estado"""

    def __init__(self, n, vectors, offsets, masks, exts):
        super().__init__(n, vectors, offsets)
        self.masks = masks
        self.exts = exts
        self._sorted_keys = []
        self._key_order = []
        for t in range(self.n_tiers):
            keys = pack(masks[self.tier_slice(t)], exts[self.tier_slice(t)])
            order = np.argsort(keys)
            self._sorted_keys.append(keys[order])
            self._key_order.append(order)

    def column(self, tier):
        return self.n - 1 - tier

    def positions(self, tier, keys):
        """Posições locais (dentro da camada) das chaves dadas"""
        keys = np.asarray(keys, dtype=np.int64)
        sorted_keys = self._sorted_keys[tier]
        if sorted_keys.size == 0:
            raise ValidationError(f'camada {tier} vazia')
        found = np.minimum(np.searchsorted(sorted_keys, keys), sorted_keys.size - 1)
        if np.any(sorted_keys[found] != keys):
            raise ValidationError(f'estado ausente da camada {tier}')
        return self._key_order[tier][found]

    def index_of(self, x):
        """Índice global (1-based) do vetor x; rejeita vetores que não são estados"""
        x = tuple(int(v) for v in x)
        if len(x) != self.n - 1:
            raise ValidationError(f'vetor {x} não tem tamanho {self.n - 1}')
        prefix, ext = diff_encoding(x)
        lineages = max(x)
        tier = self.n - lineages
        if not 0 <= tier <= self.n - 2:
            raise ValidationError(f'vetor {x} não é um estado de X_{self.n}')
        try:
            local = int(self.positions(tier, [pack(mask_of(prefix), ext)])[0])
        except ValidationError:
            raise ValidationError(f'vetor {x} não é um estado de X_{self.n}') from None
        index = self.offsets[tier] + local + 1
        if tuple(self.vectors[index - 1]) != x:
            raise ValidationError(f'vetor {x} não é um estado de X_{self.n}')
        return index

    def state(self, index):
        tier, _ = self.local_position(index)
        x = tuple(int(v) for v in self.vectors[index - 1])
        return RankedState(x=x, tier=tier, index=index, dcode=diff_encoding(x))

    @cached_property
    def states(self):
        return [self.state(i) for i in range(1, self.size + 1)]

    def last_entry_counts(self):
        """|X_n^j| para j = 0..n, contado nos estados enumerados"""
        return np.bincount(self.exts, minlength=self.n + 1)[:self.n + 1].tolist()


def enumerate_states(n, max_n=None):
    """
    Gera X_n camada a camada aplicando todas as coalescências possíveis à camada
    anterior e removendo duplicatas. Dentro de cada camada a ordem é lexicográfica
    decrescente em x.
    """
    max_n = setting('RANKEDTREES_MAX_N') if max_n is None else max_n
    if n < 3:
        raise ValidationError(f'n precisa ser pelo menos 3 (recebido {n})')
    if n > min(max_n, HARD_MAX_N):
        raise CapacityError(
            f'n={n} acima do máximo configurado ({max_n}); X_{n} teria Fib({n + 1}) = {fibonacci(n + 1)} estados'
        )

    masks = [np.zeros(1, dtype=np.int64)]
    exts = [np.array([n], dtype=np.int64)]
    vectors = [decode_many(masks[0], exts[0], n - 1, n)]
    for tier in range(1, n - 1):
        column = n - tier
        _, keys, _ = coalescence_moves(masks[-1], exts[-1], column, n)
        tier_masks, tier_exts = unpack(np.unique(keys))
        x = decode_many(tier_masks, tier_exts, column - 1, n)
        order = np.lexsort(x.T[::-1])[::-1]
        masks.append(tier_masks[order])
        exts.append(tier_exts[order])
        vectors.append(x[order])
        logger.debug('n=%d camada %d: %d estados', n, tier, order.size)

    offsets = np.concatenate([[0], np.cumsum([v.shape[0] for v in vectors])])
    space = StateSpace(
        n,
        np.vstack(vectors),
        offsets,
        np.concatenate(masks),
        np.concatenate(exts).astype(np.int64),
    )
    logger.info('espaço de estados n=%d: %d estados transientes', n, space.size)
    return space


def tier_sizes(n):
    """|X_n^j| (estados com última entrada j) para j = 0..n, pela fórmula de Fibonacci"""
    if n < 3:
        raise ValidationError(f'n precisa ser pelo menos 3 (recebido {n})')
    sizes = [0] * (n + 1)
    sizes[0] = fibonacci(n - 1) - 1
    for j in range(1, n - 1):
        sizes[j] = fibonacci(n - 1 - j)
    sizes[n - 1] = 0
    sizes[n] = 1
    return sizes


def lift_states(space):
    """
    Constrói X_{n+1} a partir de X_n: cada estado não inicial de X_{n+1} estende um
    estado de X_n repetindo ou decrementando sua última entrada.
    """
    n = space.n + 1
    lifted = {(0,) * (n - 2) + (n,)}
    for index, row in enumerate(space.vectors, start=1):
        y = tuple(int(v) for v in row)
        if index != 1:
            lifted.add(y + (y[-1],))
        if y[-1] >= 1:
            lifted.add(y + (y[-1] - 1,))
    return lifted


def check_adjacent(x, y):
    if x.n != y.n:
        raise ValidationError('estados de espaços diferentes')
    if y.tier != x.tier + 1:
        raise TierMismatchError(f'camadas {x.tier} e {y.tier} não são consecutivas')
