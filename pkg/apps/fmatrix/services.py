"""
F-matrizes: bijeção caminho <-> matriz, reconstrução da árvore ranqueada,
distância e índices de balanço (E, S, Sackin, Colless).
"""
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field

import numpy as np

from apps.core.exceptions import CorpusFormatError, InvalidFMatrixError, ValidationError
from apps.core.io import iter_jsonl
from apps.kingman.services import ChainPath, check_path, enumerate_paths
from apps.statespace.encoding import coalescence_pair, decode, diff_encoding


def nonfixed_positions(n):
    """Posições (i, j) não fixas, 1-based, em ordem de linhas: (3,1), (4,1), (4,2), (5,1), ..."""
    return [(i, j) for i in range(3, n) for j in range(1, i - 1)]


@dataclass(frozen=True)
class FMatrix:
    """Matriz triangular inferior (n-1)x(n-1) que codifica uma árvore ranqueada"""
    n: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.int64)
        size = self.n - 1
        if self.n < 3 or entries.shape != (size, size):
            raise InvalidFMatrixError(f'F-matriz precisa ter forma ({size}, {size})')
        if np.any(np.triu(entries, k=1) != 0):
            column = int(np.flatnonzero(np.triu(entries, k=1).any(axis=0))[0]) + 1
            raise InvalidFMatrixError('entradas acima da diagonal', column=column)
        if np.any(entries < 0):
            column = int(np.flatnonzero((entries < 0).any(axis=0))[0]) + 1
            raise InvalidFMatrixError('entradas negativas', column=column)
        wrong = np.flatnonzero(np.diag(entries) != np.arange(2, self.n + 1))
        if wrong.size:
            raise InvalidFMatrixError('diagonal deve ser F_ii = i + 1', column=int(wrong[0]) + 1)
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)

    @classmethod
    def from_tri(cls, n, tri):
        """Constrói a partir das linhas do triângulo inferior ([[2], [1, 3], ...])"""
        if len(tri) != n - 1:
            raise InvalidFMatrixError(f'esperadas {n - 1} linhas, recebidas {len(tri)}')
        entries = np.zeros((n - 1, n - 1), dtype=np.int64)
        for i, row in enumerate(tri):
            if len(row) != i + 1:
                raise InvalidFMatrixError(f'linha {i + 1} deve ter {i + 1} entradas')
            entries[i, :i + 1] = row
        return cls(n, entries)

    def tri(self):
        return [self.entries[i, :i + 1].tolist() for i in range(self.n - 1)]

    def entry(self, i, j):
        """F_ij com índices 1-based"""
        return int(self.entries[i - 1, j - 1])

    def column_state(self, tier):
        """Estado da cadeia no passo t: a coluna n-1-t"""
        return tuple(int(v) for v in self.entries[:, self.n - 2 - tier])

    def nonfixed(self):
        return np.array([self.entries[i - 1, j - 1] for i, j in nonfixed_positions(self.n)], dtype=np.int64)

    def __eq__(self, other):
        return isinstance(other, FMatrix) and self.n == other.n and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.n, self.entries.tobytes()))


@dataclass
class TreeNode:
    """Nó interno (rank 2..n) ou folha (rank None)"""
    rank: int = None
    children: list = field(default_factory=list)

    @property
    def is_leaf(self):
        return self.rank is None

    @property
    def leaves(self):
        if self.is_leaf:
            return 1
        return sum(child.leaves for child in self.children)


@dataclass
class RankedTree:
    n: int
    root: TreeNode

    def internal_nodes(self):
        nodes, stack = [], [self.root]
        while stack:
            node = stack.pop()
            if not node.is_leaf:
                nodes.append(node)
                stack.extend(node.children)
        return sorted(nodes, key=lambda node: node.rank)

    def leaf_depths(self):
        depths, stack = [], [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            if node.is_leaf:
                depths.append(depth)
            else:
                stack.extend((child, depth + 1) for child in node.children)
        return depths

    def shape(self):
        """Forma não ranqueada canônica como tuplas aninhadas (folha = ())"""
        def walk(node):
            if node.is_leaf:
                return ()
            return tuple(sorted((walk(child) for child in node.children), key=repr, reverse=True))
        return walk(self.root)


def _canonical(children, n):
    # Filho da esquerda com pelo menos tantas folhas quanto o da direita
    return sorted(children, key=lambda c: (-c.leaves, c.rank if c.rank is not None else n + 1))


def transition_pairs(F):
    """
    Valida a F-matriz coluna a coluna e devolve o par de coalescência de cada passo.
    Erros apontam a coluna (1-based) que falhou.
    """
    n = F.n
    codes = []
    for tier in range(n - 1):
        column = n - 1 - tier
        x = F.column_state(tier)
        try:
            prefix, ext = diff_encoding(x)
        except ValidationError as exc:
            raise InvalidFMatrixError(str(exc), column=column) from None
        if decode(prefix, ext) != x or max(x) != n - tier:
            raise InvalidFMatrixError('coluna não é um estado válido', column=column)
        codes.append(np.array(prefix + (ext,), dtype=np.int64))
    pairs = []
    for tier in range(n - 2):
        pair = coalescence_pair(codes[tier], codes[tier + 1], tier)
        if pair is None:
            raise InvalidFMatrixError('transição impossível entre colunas', column=n - 2 - tier)
        pairs.append(pair)
    return pairs


def validate(F):
    transition_pairs(F)
    return F


def path_to_fmatrix(space, path):
    """Coluna n-1-t da matriz = estado do passo t"""
    states = check_path(space, path)
    n = space.n
    entries = np.zeros((n - 1, n - 1), dtype=np.int64)
    for state in states:
        entries[:, state.column - 1] = state.x
    return FMatrix(n, entries)


def fmatrix_to_path(space, F):
    if F.n != space.n:
        raise ValidationError(f'F-matriz de n={F.n} em espaço de n={space.n}')
    transition_pairs(F)
    indices = []
    for tier in range(F.n - 1):
        try:
            indices.append(space.index_of(F.column_state(tier)))
        except ValidationError as exc:
            raise InvalidFMatrixError(str(exc), column=F.n - 1 - tier) from None
    return ChainPath(indices)


def fmatrix_to_tree(F):
    """
    Reconstrói a árvore pela decomposição em linhagens: a cada passo as duas
    linhagens do par de coalescência se fundem num nó de rank n - t, que passa a
    ser a linhagem interna terminada na linha n-2-t.
    """
    n = F.n
    pairs = transition_pairs(F)
    by_row = {}

    def take(row, column):
        if row == n - 1:
            return TreeNode()
        if row not in by_row:
            raise InvalidFMatrixError(f'nenhuma linhagem termina na linha {row}', column=column)
        return by_row.pop(row)

    for tier, (i, k) in enumerate(pairs):
        column = n - 2 - tier
        children = [take(i, column), take(k, column)]
        by_row[column] = TreeNode(rank=n - tier, children=_canonical(children, n))

    remaining = list(by_row.values()) + [TreeNode() for _ in range(F.entry(n - 1, 1))]
    if len(remaining) != 2:
        raise InvalidFMatrixError('a última coluna deve conter exatamente duas linhagens', column=1)
    return RankedTree(n=n, root=TreeNode(rank=2, children=_canonical(remaining, n)))


def tree_to_fmatrix(tree):
    """
    F_ij = número de ramos vivos após o evento j (rank j+1) que não bifurcam antes
    do evento i+1 (rank i+2). Folhas nunca bifurcam.
    """
    n = tree.n
    births, deaths = [], []
    ranks = set()
    stack = [tree.root]
    while stack:
        node = stack.pop()
        if node.is_leaf:
            continue
        if node.rank in ranks or not 2 <= node.rank <= n or len(node.children) != 2:
            raise ValidationError(f'nó com rank inválido: {node.rank}')
        ranks.add(node.rank)
        for child in node.children:
            if not child.is_leaf and child.rank <= node.rank:
                raise ValidationError('ranks devem crescer da raiz para os descendentes')
            births.append(node.rank)
            deaths.append(n + 1 if child.is_leaf else child.rank)
            stack.append(child)
    if len(ranks) != n - 1:
        raise ValidationError(f'árvore com {len(ranks)} nós internos; esperado {n - 1}')
    births = np.array(births)
    deaths = np.array(deaths)
    rows = np.arange(1, n)
    # alive[i, j]: ramo nascido até o rank j+1 e vivo até o rank i+2
    born = births[None, :] <= rows[:, None] + 1
    survives = deaths[None, :] >= rows[:, None] + 2
    entries = survives.astype(np.int64) @ born.T.astype(np.int64)
    return FMatrix(n, np.tril(entries))


def caterpillar(n):
    """Árvore mais desbalanceada: cada evento divide o ramo que acabou de surgir"""
    node = TreeNode(rank=n, children=[TreeNode(), TreeNode()])
    for rank in range(n - 1, 1, -1):
        node = TreeNode(rank=rank, children=[node, TreeNode()])
    return tree_to_fmatrix(RankedTree(n=n, root=node))


def most_balanced(n):
    """Árvore de menor persistência: cada evento divide o ramo vivo mais antigo"""
    root = TreeNode(rank=2, children=[TreeNode(), TreeNode()])
    queue = deque(root.children)
    for rank in range(3, n + 1):
        node = queue.popleft()
        node.rank = rank
        node.children = [TreeNode(), TreeNode()]
        queue.extend(node.children)
    return tree_to_fmatrix(RankedTree(n=n, root=root))


def squared_distance(F1, F2):
    if F1.n != F2.n:
        raise ValidationError(f'dimensões diferentes: n={F1.n} e n={F2.n}')
    diff = F1.entries - F2.entries
    return int(np.sum(diff * diff))


def distance(F1, F2):
    """Distância euclidiana (Frobenius) entre F-matrizes"""
    return math.sqrt(squared_distance(F1, F2))


def balance_E(F):
    """Comprimento externo: soma da última linha"""
    return int(F.entries[-1].sum())


def balance_S(F):
    """Soma das entradas não fixas"""
    return int(F.nonfixed().sum())


def _sackin(tree):
    return int(sum(tree.leaf_depths()))


def _colless(tree):
    return int(sum(abs(node.children[0].leaves - node.children[1].leaves) for node in tree.internal_nodes()))


def sackin(F):
    """Soma das profundidades das folhas na forma reconstruída"""
    return _sackin(fmatrix_to_tree(F))


def colless(F):
    """Soma de |esquerda - direita| (em folhas) sobre os nós internos"""
    return _colless(fmatrix_to_tree(F))


BALANCE_INDICES = {
    'E': balance_E,
    'S': balance_S,
    'sackin': sackin,
    'colless': colless,
}


def balance_row(F):
    """(E, S, Sackin, Colless) de uma árvore"""
    tree = fmatrix_to_tree(F)
    return balance_E(F), balance_S(F), _sackin(tree), _colless(tree)


def balance_scatter(space, index='sackin', blocks=None):
    """
    Triplas (índice clássico, S, probabilidade total) sobre todas as árvores de n
    folhas, agregadas por par (índice, S).
    """
    if index not in ('sackin', 'colless'):
        raise ValidationError(f'índice desconhecido: {index}')
    totals = defaultdict(int)
    for path, prob in enumerate_paths(space, blocks):
        F = path_to_fmatrix(space, path)
        totals[(BALANCE_INDICES[index](F), balance_S(F))] += prob
    return [(value, s, prob) for (value, s), prob in sorted(totals.items())]


def fmatrix_record(F):
    """Registro JSONL {n, tri}"""
    return {'n': F.n, 'tri': F.tri()}


def read_corpus(path):
    """F-matrizes de um arquivo JSONL; erros apontam a linha"""
    for line, record in iter_jsonl(path):
        try:
            if not isinstance(record, dict) or 'n' not in record or 'tri' not in record:
                raise ValidationError("registro precisa dos campos 'n' e 'tri'")
            F = FMatrix.from_tri(int(record['n']), record['tri'])
        except (ValidationError, TypeError, ValueError) as exc:
            raise CorpusFormatError(str(exc), line=line) from exc
        yield F
