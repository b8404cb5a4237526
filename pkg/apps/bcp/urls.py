from django.urls import path

from .views import EDistributionView

app_name = 'bcp'

urlpatterns = [
    path('<int:n>/edist/', EDistributionView.as_view(), name='edist'),
]
