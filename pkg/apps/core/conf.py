from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

# Valores usados quando o Django não está configurado (uso como biblioteca, workers)
DEFAULTS = {
    'RANKEDTREES_MAX_N': 30,
    'RANKEDTREES_EXACT_MAX_N': 12,
    'RANKEDTREES_ENUMERATION_MAX_N': 12,
    'RANKEDTREES_THREADS': 1,
    'RANKEDTREES_TIE_TOLERANCE': 1e-9,
    'RANKEDTREES_MAX_MEAN_PATHS': 1_000_000,
    'RANKEDTREES_EIGEN_FLOOR': 1e-12,
    'RANKEDTREES_MIN_EXPECTED': 5.0,
}


def setting(name):
    """Lê uma configuração do projeto com fallback para o padrão"""
    try:
        return getattr(settings, name, DEFAULTS[name])
    except ImproperlyConfigured:
        return DEFAULTS[name]
