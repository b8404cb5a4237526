"""
Amostrador de formas ranqueadas pelo modelo beta-splitting de Blum-François.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from apps.core.exceptions import ValidationError
from apps.fmatrix.services import RankedTree, TreeNode, tree_to_fmatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BetaConfig:
    beta: float
    n: int
    seed: int = None

    def __post_init__(self):
        if not self.beta > -2:
            raise ValidationError(f'beta deve ser maior que -2 (recebido {self.beta})')
        if self.n < 3:
            raise ValidationError(f'n precisa ser pelo menos 3 (recebido {self.n})')


@lru_cache(maxsize=None)
def split_probabilities(beta, k):
    """
    P(divisão de k folhas em (i, k-i)), i = 1..k-1, proporcional a
    Gamma(beta+1+i) Gamma(beta+1+k-i) / (Gamma(i+1) Gamma(k-i+1)).
    """
    i = np.arange(1, k)
    log_weights = gammaln(beta + 1 + i) + gammaln(beta + 1 + k - i) - gammaln(i + 1) - gammaln(k - i + 1)
    weights = np.exp(log_weights - log_weights.max())
    probs = weights / weights.sum()
    probs.setflags(write=False)
    return probs


def _grow(k, beta, rng):
    """Forma não ranqueada com k folhas; devolve (nó, sequência de eventos do subárvore)"""
    if k == 1:
        return TreeNode(), []
    probs = split_probabilities(beta, k)
    left = int(rng.choice(k - 1, p=probs)) + 1
    left_node, left_events = _grow(left, beta, rng)
    right_node, right_events = _grow(k - left, beta, rng)
    # Intercalação uniforme das duas sequências de eventos
    labels = rng.permutation(np.repeat([0, 1], [len(left_events), len(right_events)]))
    sources = [iter(left_events), iter(right_events)]
    node = TreeNode(children=[left_node, right_node])
    return node, [node] + [next(sources[label]) for label in labels]


def sample_tree(n, beta, rng):
    root, events = _grow(n, beta, rng)
    for position, node in enumerate(events):
        node.rank = position + 2
    return RankedTree(n=n, root=root)


def sample_beta_tree(config, rng=None):
    """Uma F-matriz amostrada; determinística dada a semente da configuração"""
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    return tree_to_fmatrix(sample_tree(config.n, float(config.beta), rng))


def iter_beta_trees(config, count):
    """`count` F-matrizes de um mesmo fluxo aleatório"""
    rng = np.random.default_rng(config.seed)
    for _ in range(count):
        yield sample_beta_tree(config, rng)
