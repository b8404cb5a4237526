"""
Hierarquia de erros do domínio.

Erros de validação viram código de saída 2 na linha de comando (HTTP 400 na API);
erros de capacidade viram código 3 (HTTP 413).
"""


class RankedTreesError(Exception):
    """Erro base do projeto"""
    exit_code = 1


class ValidationError(RankedTreesError):
    """Entrada inválida: estados, matrizes, flags ou arquivos"""
    exit_code = 2


class CapacityError(RankedTreesError):
    """Problema grande demais para os limites configurados"""
    exit_code = 3


class TierMismatchError(ValidationError):
    """Os dois estados não estão em camadas consecutivas"""


class InfeasiblePathError(ValidationError):
    """Caminho com transição impossível"""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class InvalidFMatrixError(ValidationError):
    """F-matriz inválida; `column` aponta a coluna (1-based) que falhou"""

    def __init__(self, message, column=None):
        if column is not None:
            message = f'{message} (coluna {column})'
        super().__init__(message)
        self.column = column


class CorpusFormatError(ValidationError):
    """Linha malformada em um arquivo JSONL"""

    def __init__(self, message, line=None):
        if line is not None:
            message = f'linha {line}: {message}'
        super().__init__(message)
        self.line = line


class SingularChainError(ValidationError):
    """I - T singular: a cadeia não é absorvente"""


class DegenerateRewardError(ValidationError):
    """Recompensa nula com probabilidade um; não há representação DPH"""


class DegenerateBoxingError(ValidationError):
    """Menos de duas caixas para o teste G_E"""


class SingularCovarianceError(ValidationError):
    """Covariância não positiva definida"""

    def __init__(self, message, min_eigenvalue=None):
        if min_eigenvalue is not None:
            message = f'{message} (menor autovalor {min_eigenvalue:.6g})'
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
