"""
Momentos das entradas não fixas explorando a estrutura em camadas.

pi T^k vive só na camada k e T^k D(r_ij) e vive só na camada n-1-j-k, então
médias e covariâncias saem de produtos bloco a bloco, sem inverter I - T.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from apps.core.conf import setting
from apps.core.exceptions import CapacityError, ValidationError
from apps.core.numeric import FLOAT, RATIONAL, format_number, scalar, zeros
from apps.fmatrix.services import nonfixed_positions
from apps.kingman.services import blocks_mode, tier_blocks
from apps.phasetype.services import build_rewards, ranked_coalescent_dph, reward_covariance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TieredVector:
    """Segmento denso de um vetor sobre X_n; as demais camadas são zero"""
    tier: int
    values: np.ndarray

    def dense(self, space):
        shape = (space.size,) + self.values.shape[1:]
        full = zeros(shape, RATIONAL if self.values.dtype == object else FLOAT)
        full[space.tier_slice(self.tier)] = self.values
        return full


@dataclass
class MomentSummary:
    """Médias e covariâncias das entradas não fixas, em ordem de linhas"""
    n: int
    positions: list
    mean: np.ndarray
    cov: np.ndarray
    work: int = 0
    mode: str = RATIONAL
    _lookup: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self._lookup = {pos: k for k, pos in enumerate(self.positions)}

    def index(self, i, j):
        try:
            return self._lookup[(i, j)]
        except KeyError:
            raise ValidationError(f'({i}, {j}) não é uma posição não fixa para n={self.n}') from None

    def mean_of(self, i, j):
        return self.mean[self.index(i, j)]

    def cov_of(self, a, b):
        return self.cov[self.index(*a), self.index(*b)]

    def second_moment(self, a, b):
        return self.cov_of(a, b) + self.mean_of(*a) * self.mean_of(*b)

    def rows(self):
        """Linhas (i, j, i', j', média_ij, cov) do triângulo superior"""
        count = len(self.positions)
        for a in range(count):
            for b in range(a, count):
                yield (*self.positions[a], *self.positions[b], self.mean[a], self.cov[a, b])

    def to_json(self):
        return {
            'n': self.n,
            'mode': self.mode,
            'positions': [list(pos) for pos in self.positions],
            'mean': [format_number(v) for v in self.mean],
            'cov': [[format_number(v) for v in row] for row in self.cov],
            'work': self.work,
        }


def _as_segment(values, mode):
    if mode == RATIONAL:
        return np.asarray(values, dtype=object)
    return np.asarray(values, dtype=float)


def left_products(blocks, pi=None):
    """pi T^0, pi T^1, ..., pi T^(n-2); pi padrão = estado inicial"""
    mode = blocks_mode(blocks)
    if pi is None:
        current = _as_segment([scalar(1, mode)], mode)
    elif isinstance(pi, TieredVector):
        if pi.tier != 0:
            raise ValidationError('distribuição inicial deve viver na camada 0')
        current = _as_segment(pi.values, mode)
    else:
        current = _as_segment(pi, mode)
    products = [TieredVector(0, current)]
    for block in blocks:
        current = block.left(current)
        products.append(TieredVector(block.from_tier + 1, current))
    return products


def _support(space, r):
    r = np.asarray(r)
    tiers = [t for t in range(space.n_tiers) if np.any(r[space.tier_slice(t)] != 0)]
    if len(tiers) > 1:
        raise ValidationError(f'recompensa com suporte em {len(tiers)} camadas; use o motor denso (phasetype)')
    tier = tiers[0] if tiers else space.n_tiers - 1
    return TieredVector(tier, r[space.tier_slice(tier)])


def right_products(blocks, r, space=None):
    """
    T^k D(r) e para k = 0..t, onde t é a camada que suporta r. Aceita um
    TieredVector ou um vetor denso sobre X_n (nesse caso `space` é obrigatório).
    """
    if not isinstance(r, TieredVector):
        if space is None:
            raise ValidationError('vetor denso exige o espaço de estados')
        r = _support(space, r)
    mode = blocks_mode(blocks)
    current = _as_segment(r.values, mode)
    products = [TieredVector(r.tier, current)]
    for tier in range(r.tier - 1, -1, -1):
        current = blocks[tier].right(current)
        products.append(TieredVector(tier, current))
    return products


def assemble(space, products):
    """Soma densa de uma sequência de TieredVector (pi U ou U D(r) e)"""
    total = None
    for vector in products:
        dense = vector.dense(space)
        total = dense if total is None else total + dense
    return total


def _column_rows(n, j):
    """Linhas i com (i, j) não fixa"""
    return list(range(j + 2, n))


def nonfixed_moments(space, blocks=None, threads=None):
    """
    Vetor de médias e matriz de covariância de todas as entradas não fixas.

    Para a = (i, j), b = (i', j') com j >= j':
    E[F_a F_b] = sum_x (pi T^t)(x) x_i (T^(j-j') D(r_b) e)(x), t = n-1-j,
    pois os termos restantes da fórmula MDPH se anulam fora da mesma camada.
    """
    n = space.n
    if n < 4:
        raise ValidationError('não há entradas não fixas para n < 4')
    blocks = blocks if blocks is not None else tier_blocks(space)
    mode = blocks_mode(blocks)
    threads = threads or setting('RANKEDTREES_THREADS')
    positions = nonfixed_positions(n)
    columns = sorted({j for _, j in positions})
    work = 0

    left = left_products(blocks)
    work += sum(block.nnz for block in blocks)

    def segment(j):
        tier = n - 1 - j
        X = space.tier_vectors(tier)[:, [i - 1 for i in _column_rows(n, j)]]
        return _as_segment(X.astype(np.int64).tolist(), mode)

    def chain(j_prime):
        # T^k D(r_{i', j'}) e, k = 0..(n-3-j'), todas as linhas i' de uma vez
        current = segment(j_prime)
        tier = n - 1 - j_prime
        out = [current]
        ops = 0
        for k in range(1, n - 2 - j_prime):
            block = blocks[tier - k]
            current = block.right(current)
            ops += block.nnz * current.shape[1]
            out.append(current)
        return out, ops

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        chains = dict(zip(columns, pool.map(chain, columns)))
    for _, ops in chains.values():
        work += ops

    index = {pos: k for k, pos in enumerate(positions)}
    size = len(positions)
    mean = zeros(size, mode)
    second = zeros((size, size), mode)
    for j in columns:
        tier = n - 1 - j
        weights = _as_segment(left[tier].values, mode)
        X = segment(j)
        weighted = X * weights[:, None]
        rows_j = [index[(i, j)] for i in _column_rows(n, j)]
        mean[rows_j] = weights @ X
        for j_prime in columns:
            if j_prime > j:
                continue
            block = weighted.T @ chains[j_prime][0][j - j_prime]
            work += weighted.shape[0] * block.size
            rows_p = [index[(i, j_prime)] for i in _column_rows(n, j_prime)]
            second[np.ix_(rows_j, rows_p)] = block
            second[np.ix_(rows_p, rows_j)] = block.T

    cov = second - np.outer(mean, mean)
    logger.info('momentos não fixos n=%d (%s): %d posições, %d operações', n, mode, size, work)
    return MomentSummary(n=n, positions=positions, mean=mean, cov=cov, work=work, mode=mode)


def se_moments(summary):
    """
    (mu_SE, Sigma_SE) pelas identidades afins
    S = soma das não fixas e E = n + (n-2) + sum_{j <= n-3} F_{n-1,j}.
    """
    n = summary.n
    one = scalar(1, summary.mode)
    w_S = np.array([one for _ in summary.positions], dtype=object if summary.mode == RATIONAL else float)
    w_E = np.array([one if i == n - 1 else 0 * one for i, _ in summary.positions], dtype=w_S.dtype)
    W = np.vstack([w_S, w_E])
    mu = W @ summary.mean
    mu[1] = mu[1] + (2 * n - 2) * one
    sigma = W @ summary.cov @ W.T
    return mu, sigma


TARGETS = ('S', 'E', 'F')
ENGINES = ('feedforward', 'dense')


def position_label(i, j):
    return f'F{i},{j}'


def moment_rows(space, blocks=None, targets=('S', 'E'), engine='feedforward', threads=None):
    """
    Tabela (statistic, a, b, value): médias, variâncias e covariâncias pedidas.
    F inclui a média de cada posição não fixa e o triângulo superior da covariância.
    """
    unknown = set(targets) - set(TARGETS)
    if unknown:
        raise ValidationError(f'alvos desconhecidos: {", ".join(sorted(unknown))}')
    if engine not in ENGINES:
        raise ValidationError(f'motor desconhecido: {engine}')
    blocks = blocks if blocks is not None else tier_blocks(space)
    limit = setting('RANKEDTREES_EXACT_MAX_N')
    if 'F' in targets and blocks_mode(blocks) == RATIONAL and space.n > limit:
        raise CapacityError(f'covariância completa racional limitada a n <= {limit}; use --mode float')
    positions = nonfixed_positions(space.n)
    labels = [position_label(i, j) for i, j in positions]

    if engine == 'dense':
        rewards = build_rewards(space)
        mean, cov = reward_covariance(ranked_coalescent_dph(space, blocks), rewards)
        se_mean, se_cov = mean[:2], cov[:2, :2]
        f_mean, f_cov = mean[2:], cov[2:, 2:]
    else:
        summary = nonfixed_moments(space, blocks, threads=threads)
        se_mean, se_cov = se_moments(summary)
        f_mean, f_cov = summary.mean, summary.cov

    rows = []
    if 'S' in targets:
        rows += [('mean', 'S', '', se_mean[0]), ('var', 'S', '', se_cov[0, 0])]
    if 'E' in targets:
        rows += [('mean', 'E', '', se_mean[1]), ('var', 'E', '', se_cov[1, 1])]
    if 'S' in targets and 'E' in targets:
        rows.append(('cov', 'S', 'E', se_cov[0, 1]))
    if 'F' in targets:
        rows += [('mean', label, '', value) for label, value in zip(labels, f_mean)]
        for a in range(len(labels)):
            for b in range(a, len(labels)):
                rows.append(('cov', labels[a], labels[b], f_cov[a, b]))
    return rows
