"""
URL configuration for rankedtrees project.
"""
from django.urls import path, include

urlpatterns = [
    path('api/statespace/', include('apps.statespace.urls')),
    path('api/kingman/', include('apps.kingman.urls')),
    path('api/fmatrix/', include('apps.fmatrix.urls')),
    path('api/frechet/', include('apps.frechet.urls')),
    path('api/moments/', include('apps.feedforward.urls')),
    path('api/bcp/', include('apps.bcp.urls')),
]
