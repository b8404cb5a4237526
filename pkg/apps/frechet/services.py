"""
Médias de Fréchet de árvores ranqueadas: matriz média, custos por estado e a
programação dinâmica que encontra todas as árvores que minimizam E||F - G||^2.
"""
import logging
from dataclasses import dataclass

import numpy as np

from apps.core.conf import setting
from apps.core.exceptions import CapacityError, ValidationError
from apps.core.numeric import AUTO, RATIONAL, format_number, resolve_mode, scalar, zeros
from apps.feedforward.services import left_products
from apps.fmatrix.services import path_to_fmatrix
from apps.kingman.services import ChainPath, blocks_mode, enumerate_paths, tier_blocks
from apps.statespace.encoding import coalescence_moves

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MeanMatrix:
    """Média entrada a entrada de F-matrizes (triangular inferior, diagonal i+1)"""
    n: int
    M: np.ndarray
    mode: str = RATIONAL

    def column(self, c):
        """Coluna c (1-based)"""
        return self.M[:, c - 1]

    def entry(self, i, j):
        return self.M[i - 1, j - 1]

    def tri(self):
        return [[format_number(v) for v in self.M[i, :i + 1]] for i in range(self.n - 1)]


def mean_matrix_exact(space, blocks=None):
    """Coluna c de M = sum_x P(x) x sobre os estados da camada n-1-c"""
    blocks = blocks if blocks is not None else tier_blocks(space)
    mode = blocks_mode(blocks)
    n = space.n
    M = zeros((n - 1, n - 1), mode)
    for product in left_products(blocks):
        X = space.tier_vectors(product.tier).astype(np.int64)
        weights = product.values
        if mode == RATIONAL:
            X = X.astype(object)
        M[:, n - 2 - product.tier] = weights @ X
    return MeanMatrix(n=n, M=M, mode=mode)


def mean_matrix_sample(matrices, weights=None, mode=AUTO):
    """
    Média (ponderada, se `weights` for dado) de uma amostra de F-matrizes.
    Em modo racional a média é exata.
    """
    matrices = list(matrices)
    if not matrices:
        raise ValidationError('amostra vazia')
    n = matrices[0].n
    if any(F.n != n for F in matrices):
        raise ValidationError('amostra com F-matrizes de tamanhos diferentes')
    mode = resolve_mode(mode, n)
    if weights is None:
        weights = [1] * len(matrices)
    if len(weights) != len(matrices):
        raise ValidationError('número de pesos diferente do número de matrizes')
    weights = [scalar(w, mode) for w in weights]
    total = sum(weights)
    if total <= 0 or any(w < 0 for w in weights):
        raise ValidationError('pesos devem ser não negativos com soma positiva')
    if mode == RATIONAL:
        M = zeros((n - 1, n - 1), RATIONAL)
        for F, w in zip(matrices, weights):
            if w:
                M = M + F.entries.astype(object) * w
        M = M / total
    else:
        stack = np.stack([F.entries for F in matrices]).astype(float)
        M = np.tensordot(np.asarray(weights, dtype=float), stack, axes=1) / total
    return MeanMatrix(n=n, M=M, mode=mode)


def state_costs(space, mean):
    """c(x) = ||x - M_{., c}||^2, c = coluna ocupada pela camada de x"""
    if mean.n != space.n:
        raise ValidationError(f'matriz média de n={mean.n} em espaço de n={space.n}')
    costs = []
    for tier in range(space.n_tiers):
        X = space.tier_vectors(tier).astype(np.int64)
        column = mean.column(space.column(tier))
        if mean.mode == RATIONAL:
            X = X.astype(object)
        diff = X - column[None, :]
        costs.append((diff * diff).sum(axis=1))
    return np.concatenate(costs)


def _edges(space, tier):
    """(origem local, destino local) de todas as transições da camada tier para tier+1"""
    sl = space.tier_slice(tier)
    sources, keys, _ = coalescence_moves(space.masks[sl], space.exts[sl], space.column(tier), space.n)
    targets = space.positions(tier + 1, keys)
    # chave única por par (origem, destino); a ordem continua origem-major
    pairs = np.unique(sources.astype(np.int64) * space.tier_size(tier + 1) + targets)
    return np.divmod(pairs, space.tier_size(tier + 1))


def _forward(space, costs, exact, tolerance):
    """Custos acumulados por camada e, para cada estado, o conjunto de antecessores ótimos"""
    cumulative = [costs[space.tier_slice(0)]]
    antecedents = [None]
    for tier in range(space.n_tiers - 1):
        previous = cumulative[-1]
        sources, targets = _edges(space, tier)
        size = space.tier_size(tier + 1)
        local = costs[space.tier_slice(tier + 1)]
        if exact:
            best = [None] * size
            for s, d in zip(sources.tolist(), targets.tolist()):
                if best[d] is None or previous[s] < best[d]:
                    best[d] = previous[s]
            best = np.array(best, dtype=object)
            optimal = np.array([previous[s] == best[d] for s, d in zip(sources.tolist(), targets.tolist())], dtype=bool)
        else:
            best = np.full(size, np.inf)
            np.minimum.at(best, targets, previous[sources])
            optimal = previous[sources] <= best[targets] + tolerance
        preds = [[] for _ in range(size)]
        for s, d in zip(sources[optimal].tolist(), targets[optimal].tolist()):
            preds[d].append(s)
        antecedents.append(preds)
        cumulative.append(best + local)
    return cumulative, antecedents


def vitreebi(space, mean, cap=None, tolerance=None):
    """
    Custo mínimo e todos os caminhos médios de Fréchet, ordenados pela sequência
    de índices. Empates são exatos em modo racional e usam `tolerance` em float.
    """
    cap = setting('RANKEDTREES_MAX_MEAN_PATHS') if cap is None else cap
    tolerance = setting('RANKEDTREES_TIE_TOLERANCE') if tolerance is None else tolerance
    exact = mean.mode == RATIONAL
    costs = state_costs(space, mean)
    cumulative, antecedents = _forward(space, costs, exact, tolerance)

    final = cumulative[-1]
    last = space.n_tiers - 1
    min_cost = min(final)
    if exact:
        ends = [k for k, value in enumerate(final) if value == min_cost]
    else:
        ends = np.flatnonzero(final <= min_cost + tolerance).tolist()

    paths = []
    stack = [(last, k, ()) for k in ends]
    while stack:
        tier, local, suffix = stack.pop()
        suffix = (space.offsets[tier] + local + 1,) + suffix
        if tier == 0:
            paths.append(suffix)
            if len(paths) > cap:
                raise CapacityError(f'mais de {int(cap)} caminhos médios; M degenerada?')
            continue
        for previous in antecedents[tier][local]:
            stack.append((tier - 1, previous, suffix))
    paths.sort()
    logger.info('n=%d: custo mínimo %s, %d árvore(s) média(s)', space.n, format_number(min_cost), len(paths))
    return min_cost, [ChainPath(p) for p in paths]


def path_cost(space, mean, path):
    """||F(path) - M||^2 recalculado a partir da matriz"""
    F = path_to_fmatrix(space, path)
    diff = F.entries.astype(object if mean.mode == RATIONAL else float) - mean.M
    return np.sum(diff * diff)


def frechet_variance(space, blocks=None, mean=None, method='moments'):
    """
    E||F - M||^2. 'enumeration' soma sobre todas as árvores (n pequeno);
    'moments' usa sum_x (pi U)(x) c(x), isto é, o traço da covariância.
    """
    blocks = blocks if blocks is not None else tier_blocks(space)
    mean = mean if mean is not None else mean_matrix_exact(space, blocks)
    if method == 'enumeration':
        total = scalar(0, blocks_mode(blocks))
        for path, prob in enumerate_paths(space, blocks):
            total += prob * path_cost(space, mean, path)
        return total
    if method != 'moments':
        raise ValidationError(f'método desconhecido: {method}')
    costs = state_costs(space, mean)
    total = scalar(0, blocks_mode(blocks))
    for product in left_products(blocks):
        total += product.values @ costs[space.tier_slice(product.tier)]
    return total


def frechet_dispersion(space, path, blocks=None, mean=None):
    """E||F - G||^2 em torno da árvore G do caminho dado (variância + custo de G)"""
    blocks = blocks if blocks is not None else tier_blocks(space)
    mean = mean if mean is not None else mean_matrix_exact(space, blocks)
    return frechet_variance(space, blocks, mean, method='moments') + path_cost(space, mean, path)


def brute_force_means(space, mean, blocks=None):
    """Mínimo de ||F - M||^2 sobre todas as árvores enumeradas (oráculo para n pequeno)"""
    scored = [(path_cost(space, mean, path), path.indices) for path, _ in enumerate_paths(space, blocks)]
    best = min(cost for cost, _ in scored)
    return best, sorted(indices for cost, indices in scored if cost == best)


def result_payload(space, min_cost, paths):
    """Estrutura JSON do comando frechet e da API"""
    return {
        'n': space.n,
        'min_cost': format_number(min_cost),
        'means': [
            {'path': list(path.indices), 'tri': path_to_fmatrix(space, path).tri()}
            for path in paths
        ],
    }

