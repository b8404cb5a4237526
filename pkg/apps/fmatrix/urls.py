from django.urls import path

from .views import BalanceView

app_name = 'fmatrix'

urlpatterns = [
    path('balance/', BalanceView.as_view(), name='balance'),
]
