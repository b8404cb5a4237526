"""
Modo numérico duplo: racionais exatos (Fraction em arrays de objetos) ou float64.
"""
import math
from fractions import Fraction

import numpy as np
import sympy
from scipy import linalg

from .conf import setting
from .exceptions import SingularChainError, ValidationError

RATIONAL = 'rational'
FLOAT = 'float'
AUTO = 'auto'
MODES = (AUTO, RATIONAL, FLOAT)


def resolve_mode(mode, n):
    """Converte 'auto' no modo efetivo para o tamanho n"""
    if mode in (None, AUTO):
        return RATIONAL if n <= setting('RANKEDTREES_EXACT_MAX_N') else FLOAT
    if mode not in (RATIONAL, FLOAT):
        raise ValidationError(f'modo numérico desconhecido: {mode}')
    return mode


def is_exact(mode):
    return mode == RATIONAL


def ratio(p, q, mode):
    if mode == RATIONAL:
        return Fraction(p, q)
    return p / q


def scalar(value, mode):
    if mode == RATIONAL:
        return value if isinstance(value, Fraction) else Fraction(value)
    return float(value)


def zeros(shape, mode):
    if mode == RATIONAL:
        return np.full(shape, Fraction(0), dtype=object)
    return np.zeros(shape, dtype=float)


def identity(size, mode):
    out = zeros((size, size), mode)
    for k in range(size):
        out[k, k] = scalar(1, mode)
    return out


def asarray(values, mode):
    """Array no modo pedido; racionais são convertidos entrada a entrada"""
    if mode == RATIONAL:
        arr = np.array(values, dtype=object)
        flat = [v if isinstance(v, Fraction) else Fraction(v) for v in arr.ravel()]
        return np.array(flat, dtype=object).reshape(arr.shape)
    return np.asarray(values, dtype=float)


def mode_of(array):
    return RATIONAL if np.asarray(array).dtype == object else FLOAT


def to_float(array):
    return np.asarray(array, dtype=float)


def format_number(value):
    """'p/q' em termos mínimos para racionais, 17 algarismos para floats"""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f'{value.numerator}/{value.denominator}'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), '.17g')


def parse_number(text):
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, float):
        return Fraction(text).limit_denominator()
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f'número inválido: {text!r}') from exc


def is_strictly_upper(matrix):
    """Verdadeiro quando a matriz é estritamente triangular superior (nilpotente)"""
    arr = np.asarray(matrix)
    rows, cols = np.tril_indices(arr.shape[0])
    return all(arr[r, c] == 0 for r, c in zip(rows, cols))


def inverse(matrix):
    """Inversa densa; racionais via sympy, floats via scipy"""
    arr = np.asarray(matrix)
    if arr.dtype == object:
        sym = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in map(Fraction, row)] for row in arr])
        try:
            inv = sym.inv()
        except ValueError as exc:
            raise SingularChainError('matriz singular') from exc
        return np.array([[Fraction(int(e.p), int(e.q)) for e in row] for row in inv.tolist()], dtype=object).reshape(arr.shape)
    try:
        inv = linalg.inv(arr)
    except linalg.LinAlgError as exc:
        raise SingularChainError('matriz singular') from exc
    if not np.all(np.isfinite(inv)):
        raise SingularChainError('matriz singular')
    return inv


def close(a, b, tol=1e-12):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return math.isclose(float(a), float(b), rel_tol=0.0, abs_tol=tol)
