from django.urls import path

from .views import MomentTableView

app_name = 'feedforward'

urlpatterns = [
    path('<int:n>/', MomentTableView.as_view(), name='moments'),
]
