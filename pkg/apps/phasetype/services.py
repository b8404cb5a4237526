"""
Distribuições phase-type discretas (DPH) e multivariadas (MDPH).

As operações aceitam cadeias quaisquer: T denso (racional ou float) ou esparso
(scipy, float). Quando T é nilpotente os produtos com U = (I - T)^-1 são feitos
pela soma finita de potências; caso contrário, por sistemas lineares.
"""
import logging
from dataclasses import dataclass, field
from math import factorial

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import linalg as sparse_linalg

from apps.core.exceptions import CapacityError, DegenerateRewardError, SingularChainError, ValidationError
from apps.core.numeric import FLOAT, RATIONAL, format_number, identity, inverse, is_strictly_upper, scalar, zeros
from apps.fmatrix.services import nonfixed_positions
from apps.kingman.services import assemble_dense, tier_blocks

logger = logging.getLogger(__name__)

DENSE_MAX_STATES = 5000


@dataclass(frozen=True)
class DiscretePhaseType:
    """
    Vetor inicial pi, matriz subestocástica T e saída t = (I - T)e.
    Massa 1 - sum(pi) corresponde a um átomo em zero (tau = 0).
    """
    pi: np.ndarray
    T: object

    def __post_init__(self):
        p = len(self.pi)
        if self.T.shape != (p, p):
            raise ValidationError(f'T deve ser {p}x{p}')
        if np.any(np.asarray(self.pi) < 0):
            raise ValidationError('pi com entradas negativas')
        values = self.T.data if sparse.issparse(self.T) else np.asarray(self.T)
        if np.any(values < 0):
            raise ValidationError('T com entradas negativas')
        tol = 0 if self.mode == RATIONAL else 1e-9
        if sum(self.pi) > 1 + tol or np.any(self.row_sums() > 1 + tol):
            raise ValidationError('pi ou linhas de T somam mais que 1')

    @property
    def p(self):
        return len(self.pi)

    @property
    def mode(self):
        return RATIONAL if np.asarray(self.pi).dtype == object else FLOAT

    @property
    def is_sparse(self):
        return sparse.issparse(self.T)

    def row_sums(self):
        if self.is_sparse:
            return np.asarray(self.T.sum(axis=1)).ravel()
        return np.asarray(self.T).sum(axis=1)

    @property
    def exit(self):
        return scalar(1, self.mode) - self.row_sums()

    @property
    def defect(self):
        """P(tau = 0)"""
        return scalar(1, self.mode) - sum(self.pi)

    @property
    def nilpotent(self):
        if self.is_sparse:
            return sparse.tril(self.T).nnz == 0
        return is_strictly_upper(self.T)

    def left(self, vector):
        """vector @ T"""
        if self.is_sparse:
            return np.asarray(self.T.T @ vector)
        return np.asarray(vector) @ self.T

    def right(self, values):
        """T @ values"""
        return np.asarray(self.T @ values)

    def to_json(self):
        T = self.T.toarray() if self.is_sparse else self.T
        return {
            'pi': [format_number(v) for v in self.pi],
            'T': [[format_number(v) for v in row] for row in T],
            'exit': [format_number(v) for v in self.exit],
        }


@dataclass(frozen=True)
class RewardMatrix:
    """R (p x m), coluna j = recompensa r_j; `labels` nomeia as colunas"""
    R: np.ndarray
    labels: list = field(default_factory=list)

    def __post_init__(self):
        if np.any(self.R < 0):
            raise ValidationError('recompensas devem ser não negativas')

    def column(self, label):
        return self.R[:, self.labels.index(label)]


def _zero_tail(values):
    return not np.any(values != 0)


def left_fundamental(d, vector):
    """vector @ U"""
    vector = np.asarray(vector, dtype=object if d.mode == RATIONAL else float)
    if d.nilpotent:
        total = vector.copy()
        current = vector
        for _ in range(d.p):
            current = d.left(current)
            if _zero_tail(current):
                break
            total = total + current
        return total
    if d.is_sparse:
        A = (sparse.identity(d.p, format='csc') - d.T.tocsc()).T.tocsc()
        return sparse_linalg.spsolve(A, vector)
    if d.mode == RATIONAL:
        return vector @ fundamental_matrix(d)
    try:
        return linalg.solve((np.eye(d.p) - d.T).T, vector)
    except linalg.LinAlgError as exc:
        raise SingularChainError('I - T singular') from exc


def right_fundamental(d, values):
    """U @ values (vetor ou matriz)"""
    values = np.asarray(values, dtype=object if d.mode == RATIONAL else float)
    if d.nilpotent:
        total = values.copy()
        current = values
        for _ in range(d.p):
            current = d.right(current)
            if _zero_tail(current):
                break
            total = total + current
        return total
    if d.is_sparse:
        A = (sparse.identity(d.p, format='csc') - d.T.tocsc()).tocsc()
        return sparse_linalg.spsolve(A, values)
    if d.mode == RATIONAL:
        return fundamental_matrix(d) @ values
    try:
        return linalg.solve(np.eye(d.p) - d.T, values)
    except linalg.LinAlgError as exc:
        raise SingularChainError('I - T singular') from exc


def dph_pmf(d, m):
    """P(tau = m) = pi T^(m-1) t"""
    if m < 1:
        raise ValidationError(f'm deve ser >= 1 (recebido {m})')
    vector = np.asarray(d.pi)
    for _ in range(m - 1):
        vector = d.left(vector)
    return vector @ d.exit


def dph_pmf_vector(d, m_max=None, tail=1e-12):
    """[P(tau = 1), P(tau = 2), ...] até m_max ou até a massa restante ficar abaixo de `tail`"""
    exit_vector = d.exit
    vector = np.asarray(d.pi)
    pmf = []
    step = 0
    while m_max is None or step < m_max:
        step += 1
        pmf.append(vector @ exit_vector)
        vector = d.left(vector)
        remaining = sum(vector)
        if remaining == 0 or (d.mode == FLOAT and remaining < tail):
            break
        if m_max is None and step > 100 * d.p + 10_000:
            raise CapacityError('cauda da distribuição longa demais; informe m_max')
    return pmf


def fundamental_matrix(d):
    """U = (I - T)^-1; soma finita de potências quando T é nilpotente"""
    if d.is_sparse:
        if d.p > DENSE_MAX_STATES:
            raise CapacityError(f'{d.p} fases: grande demais para U densa')
        T = d.T.toarray()
    else:
        T = d.T
    if d.nilpotent:
        U = identity(d.p, d.mode)
        power = identity(d.p, d.mode)
        for _ in range(d.p):
            power = power @ T
            if _zero_tail(power):
                break
            U = U + power
        return U
    return inverse(identity(d.p, d.mode) - T)


def dph_factorial_moment(d, k):
    """E[tau(tau-1)...(tau-k+1)] = k! pi T^(k-1) U^k e"""
    if k < 1:
        raise ValidationError(f'k deve ser >= 1 (recebido {k})')
    values = np.full(d.p, scalar(1, d.mode), dtype=object if d.mode == RATIONAL else float)
    for _ in range(k):
        values = right_fundamental(d, values)
    vector = np.asarray(d.pi)
    for _ in range(k - 1):
        vector = d.left(vector)
    return factorial(k) * (vector @ values)


def dph_moments(d):
    """(média, variância) de tau"""
    mean = dph_factorial_moment(d, 1)
    second = dph_factorial_moment(d, 2)
    return mean, second + mean - mean * mean


def _reward_vector(d, r):
    r = np.asarray(r)
    if r.shape != (d.p,):
        raise ValidationError(f'recompensa deve ter tamanho {d.p}')
    if np.any(r < 0):
        raise ValidationError('recompensa negativa')
    if d.mode == RATIONAL:
        return np.array([scalar(v, RATIONAL) for v in r], dtype=object)
    return r.astype(float)


def reward_moments(d, r):
    """
    Média e variância de Y = soma de r(X_t):
    E[Y] = pi U D(r) e, E[Y^2] = pi {2 (U D(r))^2 - U D(r)^2} e.
    """
    r = _reward_vector(d, r)
    pu = left_fundamental(d, d.pi)
    ur = right_fundamental(d, r)
    mean = pu @ r
    second = 2 * (pu @ (r * ur)) - pu @ (r * r)
    return mean, second - mean * mean


def mdph_cross_moment(d, r_j, r_k):
    """
    (E[Y_j Y_k], Cov) pela fórmula
    pi {U D_j U D_k + U D_k U D_j - U D_j D_k} e.
    """
    r_j = _reward_vector(d, r_j)
    r_k = _reward_vector(d, r_k)
    pu = left_fundamental(d, d.pi)
    u_j = right_fundamental(d, r_j)
    u_k = right_fundamental(d, r_k)
    cross = pu @ (r_j * u_k) + pu @ (r_k * u_j) - pu @ (r_j * r_k)
    return cross, cross - (pu @ r_j) * (pu @ r_k)


def reward_covariance(d, rewards):
    """Vetor de médias e matriz de covariância de todas as colunas de R"""
    R = rewards.R if isinstance(rewards, RewardMatrix) else np.asarray(rewards)
    R = np.column_stack([_reward_vector(d, R[:, j]) for j in range(R.shape[1])])
    pu = left_fundamental(d, d.pi)
    UR = right_fundamental(d, R)
    weighted = R * pu[:, None]
    mean = pu @ R
    half = weighted.T @ UR
    second = half + half.T - weighted.T @ R
    return mean, second - np.outer(mean, mean)


def reward_transform(d, r):
    """
    Representação DPH de Y = soma de r(X_t) para r inteiro >= 0.
    Estados de recompensa zero são censurados (massa redistribuída por
    (I - T00)^-1), e cada estado j vira r(j) subestados em série: o primeiro
    recebe a massa de entrada e o último carrega as transições.
    """
    r = np.asarray(r)
    if r.shape != (d.p,) or np.any(r < 0) or np.any(np.asarray(r, dtype=float) % 1 != 0):
        raise ValidationError('recompensa deve ser um vetor inteiro não negativo de tamanho p')
    r = r.astype(np.int64)
    pos = np.flatnonzero(r > 0)
    zero = np.flatnonzero(r == 0)
    if pos.size == 0:
        raise DegenerateRewardError('recompensa nula em todos os estados: Y = 0 com probabilidade 1')

    pi = np.asarray(d.pi)
    if d.is_sparse:
        T = d.T.tocsr()
        T_pp = T[pos][:, pos]
        if zero.size:
            T_zz = T[zero][:, zero].tocsc()
            T_zp = T[zero][:, pos].tocsc()
            T_pz = T[pos][:, zero]
            A = (sparse.identity(zero.size, format='csc') - T_zz).tocsc()
            redirect = sparse.csr_matrix(sparse_linalg.spsolve(A, T_zp))
            if redirect.shape != (zero.size, pos.size):
                redirect = redirect.reshape((zero.size, pos.size))
            T_tilde = (T_pp + T_pz @ redirect).tocsr()
            pi_tilde = pi[pos] + np.asarray(redirect.T @ pi[zero]).ravel()
        else:
            T_tilde = T_pp
            pi_tilde = pi[pos]
    else:
        T = np.asarray(d.T)
        T_pp = T[np.ix_(pos, pos)]
        if zero.size:
            censored = DiscretePhaseType(pi=pi[zero], T=T[np.ix_(zero, zero)])
            redirect = right_fundamental(censored, T[np.ix_(zero, pos)])
            T_tilde = T_pp + T[np.ix_(pos, zero)] @ redirect
            pi_tilde = pi[pos] + pi[zero] @ redirect
        else:
            T_tilde = T_pp
            pi_tilde = pi[pos]

    if sum(pi_tilde) == 0:
        raise DegenerateRewardError('Y = 0 com probabilidade 1: não há representação DPH')

    sizes = r[pos]
    first = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    last = first + sizes - 1
    order = int(sizes.sum())

    if d.is_sparse:
        chain_rows = np.concatenate([np.arange(f, l) for f, l in zip(first, last)]) if order > pos.size else np.zeros(0, int)
        coo = sparse.coo_matrix(T_tilde)
        rows = np.concatenate([chain_rows, last[coo.row]])
        cols = np.concatenate([chain_rows + 1, first[coo.col]])
        data = np.concatenate([np.ones(chain_rows.size), coo.data])
        T_star = sparse.csr_matrix((data, (rows, cols)), shape=(order, order))
        pi_star = np.zeros(order)
        pi_star[first] = pi_tilde
    else:
        T_star = zeros((order, order), d.mode)
        pi_star = zeros(order, d.mode)
        for j in range(pos.size):
            pi_star[first[j]] = pi_tilde[j]
            for sub in range(first[j], last[j]):
                T_star[sub, sub + 1] = scalar(1, d.mode)
            T_star[last[j], first] = T_tilde[j]
    logger.debug('transformação por recompensa: %d fases -> %d fases', d.p, order)
    return DiscretePhaseType(pi=pi_star, T=T_star)


def ranked_coalescent_dph(space, blocks=None):
    """A cadeia do coalescente ranqueado como DPH densa (tau = n - 1)"""
    pi, T = assemble_dense(space, blocks if blocks is not None else tier_blocks(space))
    return DiscretePhaseType(pi=pi, T=T)


def build_rewards(space):
    """
    Colunas S, E e uma coluna F_ij por posição não fixa (ordem de linhas), com
    r_ij(x) = x_i quando x está na camada n-1-j (a camada em que a coluna j é o estado).
    """
    n = space.n
    if n < 4:
        raise ValidationError('não há entradas não fixas para n < 4')
    X = np.asarray(space.vectors, dtype=np.int64)
    tiers = np.repeat(np.arange(space.n_tiers), space.tier_counts())
    columns = n - 1 - tiers
    rows = np.arange(1, n)
    # r_S: soma de x_i para i >= c + 2, c = coluna do estado
    mask = rows[None, :] >= columns[:, None] + 2
    r_S = (X * mask).sum(axis=1)
    r_E = X[:, n - 2]
    labels = ['S', 'E']
    cols = [r_S, r_E]
    for i, j in nonfixed_positions(n):
        labels.append(f'F{i},{j}')
        cols.append(np.where(tiers == n - 1 - j, X[:, i - 1], 0))
    return RewardMatrix(R=np.column_stack(cols).astype(np.int64), labels=labels)
