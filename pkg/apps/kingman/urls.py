from django.urls import path

from .views import TierBlockListView

app_name = 'kingman'

urlpatterns = [
    path('<int:n>/blocks/', TierBlockListView.as_view(), name='blocks'),
]
