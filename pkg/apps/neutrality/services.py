"""
Testes de neutralidade (G_E, W_F, W_SE e Hotelling) e o harness de poder/nível
por Monte Carlo.
"""
import concurrent.futures
import logging
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import linalg, stats

from apps.bcp.services import bcp_E_distribution
from apps.betasplit.services import BetaConfig, iter_beta_trees, sample_tree
from apps.core.conf import setting
from apps.core.exceptions import DegenerateBoxingError, SingularCovarianceError, ValidationError
from apps.core.numeric import AUTO, FLOAT, format_number, resolve_mode, to_float
from apps.feedforward.services import nonfixed_moments, se_moments
from apps.fmatrix.services import path_to_fmatrix, tree_to_fmatrix
from apps.kingman.services import iter_sample_paths, tier_blocks
from apps.phasetype.services import dph_pmf_vector
from apps.statespace.services import enumerate_states

logger = logging.getLogger(__name__)

TESTS = ('GE', 'WF', 'WSE', 'HT')
NORMAL = 'N(0,1)'


@dataclass
class TestReport:
    test: str
    statistic: float
    distribution: str
    p_value: float
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        self.statistic = float(self.statistic)
        self.p_value = float(min(max(self.p_value, 0.0), 1.0))

    def to_json(self):
        return asdict(self)


@dataclass
class Box:
    """Caixa [low, high] de valores de E com probabilidade nula `prob`"""
    low: int
    high: int
    prob: float

    def __contains__(self, value):
        return self.low <= value and (self.high is None or value <= self.high)


@dataclass
class NullModel:
    """Todas as quantidades nulas de um n, calculadas uma vez e compartilhadas pelas réplicas"""
    n: int
    mode: str
    M: np.ndarray
    Sigma: np.ndarray
    mu_SE: np.ndarray
    Sigma_SE: np.ndarray
    e_pmf: list
    exact: dict = field(default_factory=dict, repr=False)


def null_model(n, mode=AUTO, threads=None):
    """
    Médias e covariâncias das entradas não fixas, (mu_SE, Sigma_SE) e a lei nula
    de E (via BCP) sob o coalescente de Kingman.
    """
    mode = resolve_mode(mode, n)
    space = enumerate_states(n)
    blocks = tier_blocks(space, mode)
    summary = nonfixed_moments(space, blocks, threads=threads)
    mu_SE, Sigma_SE = se_moments(summary)
    pmf = dph_pmf_vector(bcp_E_distribution(n, mode))
    e_pmf = [(m, float(p)) for m, p in enumerate(pmf, start=1) if p != 0]
    logger.info('modelo nulo n=%d (%s) pronto', n, mode)
    return NullModel(
        n=n,
        mode=mode,
        M=to_float(summary.mean),
        Sigma=to_float(summary.cov),
        mu_SE=to_float(mu_SE),
        Sigma_SE=to_float(Sigma_SE),
        e_pmf=e_pmf,
        exact={'mean': summary.mean, 'cov': summary.cov, 'mu_SE': mu_SE, 'Sigma_SE': Sigma_SE},
    )


def null_payload(null):
    """Quantidades nulas exatas quando disponíveis, em texto"""
    exact = null.exact or {}
    return {
        'n': null.n,
        'mode': null.mode,
        'mu_SE': [format_number(v) for v in exact.get('mu_SE', null.mu_SE)],
        'Sigma_SE': [[format_number(v) for v in row] for row in exact.get('Sigma_SE', null.Sigma_SE)],
    }


def box_null(e_pmf, K=10, m=1, min_expected=None):
    """
    Caixas equiprováveis (quantis da lei nula de E), fundidas gulosamente com a
    vizinha de menor massa até que toda contagem esperada m * P seja >= min_expected.
    """
    min_expected = setting('RANKEDTREES_MIN_EXPECTED') if min_expected is None else min_expected
    if K < 2:
        raise DegenerateBoxingError('K precisa ser pelo menos 2')
    boxes = []
    cumulative = 0.0
    low = None
    for value, prob in e_pmf:
        low = value if low is None else low
        cumulative += prob
        if cumulative >= (len(boxes) + 1) / K - 1e-12 and len(boxes) < K - 1:
            boxes.append(Box(low, value, 0.0))
            low = None
    if low is not None:
        boxes.append(Box(low, e_pmf[-1][0], 0.0))
    for box in boxes:
        box.prob = sum(p for value, p in e_pmf if value in box)
    # Extremos abertos: valores fora do suporte caem na primeira ou última caixa
    boxes[0].low = 0
    boxes[-1].high = None

    while len(boxes) > 1:
        expected = [m * box.prob for box in boxes]
        k = int(np.argmin(expected))
        if expected[k] >= min_expected:
            break
        if k == 0:
            neighbor = 1
        elif k == len(boxes) - 1:
            neighbor = k - 1
        else:
            neighbor = k - 1 if boxes[k - 1].prob <= boxes[k + 1].prob else k + 1
        first, second = sorted((k, neighbor))
        merged = Box(boxes[first].low, boxes[second].high, boxes[first].prob + boxes[second].prob)
        boxes[first:second + 1] = [merged]
    if len(boxes) < 2:
        raise DegenerateBoxingError(f'apenas {len(boxes)} caixa(s) com contagem esperada >= {min_expected}')
    return boxes


def _nonfixed_sample(sample):
    sample = list(sample)
    if not sample:
        raise ValidationError('amostra vazia')
    n = sample[0].n
    if any(F.n != n for F in sample):
        raise ValidationError('amostra com F-matrizes de tamanhos diferentes')
    return n, np.array([F.nonfixed() for F in sample], dtype=float)


def _external_lengths(sample):
    return np.array([int(F.entries[-1].sum()) for F in sample], dtype=np.int64)


def inverse_sqrt(Sigma, floor=None):
    """Raiz quadrada inversa simétrica por decomposição espectral"""
    floor = setting('RANKEDTREES_EIGEN_FLOOR') if floor is None else floor
    Sigma = np.asarray(Sigma, dtype=float)
    if Sigma.ndim != 2 or Sigma.shape[0] != Sigma.shape[1] or not np.allclose(Sigma, Sigma.T):
        raise SingularCovarianceError('covariância deve ser uma matriz simétrica')
    eigenvalues, vectors = linalg.eigh(Sigma)
    smallest = float(eigenvalues.min())
    if smallest < floor:
        raise SingularCovarianceError('covariância não é positiva definida', min_eigenvalue=smallest)
    return (vectors / np.sqrt(eigenvalues)) @ vectors.T


def test_GE(sample, null_E=None, K=10, e_pmf=None, boxes=None):
    """G_E = 2 sum O_k log(O_k / A_k) contra chi^2(K - 1)"""
    sample = list(sample)
    if not sample:
        raise ValidationError('amostra vazia')
    m = len(sample)
    if boxes is None:
        if e_pmf is None:
            if null_E is None:
                raise ValidationError('informe a lei nula de E')
            e_pmf = [(v, float(p)) for v, p in enumerate(dph_pmf_vector(null_E), start=1) if p != 0]
        boxes = box_null(e_pmf, K, m)
    lengths = _external_lengths(sample)
    observed = np.array([sum(1 for e in lengths if e in box) for box in boxes], dtype=float)
    expected = np.array([m * box.prob for box in boxes])
    positive = observed > 0
    statistic = 2.0 * np.sum(observed[positive] * np.log(observed[positive] / expected[positive]))
    df = len(boxes) - 1
    return TestReport(
        test='GE',
        statistic=statistic,
        distribution=f'chi2({df})',
        p_value=stats.chi2.sf(statistic, df),
        config={'m': m, 'K': K, 'boxes': [[b.low, b.high, b.prob] for b in boxes]},
    )


def test_WF(sample, M, Sigma):
    """W_F = sqrt(m / p) e^T Sigma^(-1/2) (F_barra - M), p = (n-2)(n-3)/2; bilateral"""
    n, values = _nonfixed_sample(sample)
    m, p = values.shape
    M = np.asarray(M, dtype=float)
    if M.shape != (p,):
        raise ValidationError(f'vetor de médias deve ter {p} entradas')
    root = inverse_sqrt(Sigma)
    statistic = np.sqrt(2 * m / ((n - 2) * (n - 3))) * np.sum(root @ (values.mean(axis=0) - M))
    return TestReport('WF', statistic, NORMAL, 2 * stats.norm.sf(abs(statistic)), {'n': n, 'm': m})


def test_WSE(sample, mu_SE, Sigma_SE):
    """W_SE = sqrt(m / 2) e^T Sigma_SE^(-1/2) ((S_barra, E_barra) - mu_SE); bilateral"""
    n, values = _nonfixed_sample(sample)
    m = values.shape[0]
    S = values.sum(axis=1)
    E = _external_lengths(sample).astype(float)
    root = inverse_sqrt(Sigma_SE)
    diff = np.array([S.mean(), E.mean()]) - np.asarray(mu_SE, dtype=float)
    statistic = np.sqrt(m / 2) * np.sum(root @ diff)
    return TestReport('WSE', statistic, NORMAL, 2 * stats.norm.sf(abs(statistic)), {'n': n, 'm': m})


def test_hotelling(sample, M, Sigma):
    """T^2 = m (F_barra - M)^T Sigma^-1 (F_barra - M) contra chi^2(p)"""
    n, values = _nonfixed_sample(sample)
    m, p = values.shape
    root = inverse_sqrt(Sigma)
    z = root @ (values.mean(axis=0) - np.asarray(M, dtype=float))
    statistic = m * float(z @ z)
    return TestReport('HT', statistic, f'chi2({p})', stats.chi2.sf(statistic, p), {'n': n, 'm': m})


def run_tests(sample, null, tests=TESTS, K=10):
    """Aplica os testes pedidos com as quantidades do modelo nulo"""
    unknown = set(tests) - set(TESTS)
    if unknown:
        raise ValidationError(f'testes desconhecidos: {", ".join(sorted(unknown))}')
    sample = list(sample)
    if any(F.n != null.n for F in sample):
        raise ValidationError(f'amostra não tem n={null.n}')
    runners = {
        'GE': lambda: test_GE(sample, K=K, e_pmf=null.e_pmf),
        'WF': lambda: test_WF(sample, null.M, null.Sigma),
        'WSE': lambda: test_WSE(sample, null.mu_SE, null.Sigma_SE),
        'HT': lambda: test_hotelling(sample, null.M, null.Sigma),
    }
    return [runners[name]() for name in tests]


def simulate_corpus(model, n, count, seed, beta=None, space=None, blocks=None):
    """Corpus de F-matrizes do coalescente de Kingman ou do beta-splitting"""
    if count < 1:
        raise ValidationError('count deve ser positivo')
    if model == 'kingman':
        space = space if space is not None else enumerate_states(n)
        blocks = blocks if blocks is not None else tier_blocks(space, FLOAT)
        return [path_to_fmatrix(space, path) for path in iter_sample_paths(space, blocks, count, seed)]
    if model == 'beta':
        if beta is None:
            raise ValidationError('modelo beta exige --beta')
        return list(iter_beta_trees(BetaConfig(beta=beta, n=n, seed=seed), count))
    raise ValidationError(f'modelo desconhecido: {model}')


def _replicate(null, beta, m, seed, tests, K, alpha):
    """Uma réplica: um corpus compartilhado por todos os testes"""
    rng = np.random.default_rng(seed)
    sample = [tree_to_fmatrix(sample_tree(null.n, beta, rng)) for _ in range(m)]
    return [report.p_value < alpha for report in run_tests(sample, null, tests, K)]


def parse_grid(text):
    """'a:b:passo' ou lista separada por vírgulas"""
    try:
        if ':' in text:
            start, stop, step = (float(v) for v in text.split(':'))
            if step <= 0:
                raise ValidationError('passo da grade deve ser positivo')
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + k * step, 10) for k in range(count)]
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError as exc:
        raise ValidationError(f'grade inválida: {text!r}') from exc


def power_curve(beta_grid, n, m, replicates, seed, null=None, tests=TESTS, K=10, alpha=0.05, workers=1):
    """
    Taxa de rejeição e erro padrão de Monte Carlo por (teste, beta). Cada réplica
    tem seu próprio fluxo aleatório derivado da semente; o resultado não depende
    do número de workers.
    """
    if replicates < 1 or m < 1:
        raise ValidationError('replicates e m devem ser positivos')
    if not beta_grid:
        raise ValidationError('grade de beta vazia')
    unknown = set(tests) - set(TESTS)
    if unknown:
        raise ValidationError(f'testes desconhecidos: {", ".join(sorted(unknown))}')
    for beta in beta_grid:
        BetaConfig(beta=beta, n=n)
    null = null if null is not None else null_model(n)
    children = np.random.SeedSequence(seed).spawn(len(beta_grid) * replicates)
    jobs = [
        (beta, children[g * replicates + r])
        for g, beta in enumerate(beta_grid)
        for r in range(replicates)
    ]
    if workers and workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(_replicate, null, beta, m, child, tests, K, alpha) for beta, child in jobs]
            outcomes = [future.result() for future in futures]
    else:
        outcomes = [_replicate(null, beta, m, child, tests, K, alpha) for beta, child in jobs]

    rows = []
    for g, beta in enumerate(beta_grid):
        block = np.array(outcomes[g * replicates:(g + 1) * replicates], dtype=float)
        for t, name in enumerate(tests):
            rate = float(block[:, t].mean())
            se = float(np.sqrt(rate * (1 - rate) / replicates))
            rows.append((name, beta, rate, se, replicates))
        logger.info('beta=%s: %s', beta, ', '.join(f'{name}={block[:, t].mean():.3f}' for t, name in enumerate(tests)))
    return rows
