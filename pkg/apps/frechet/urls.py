from django.urls import path

from .views import FrechetMeanView, FrechetSampleView

app_name = 'frechet'

urlpatterns = [
    path('sample/', FrechetSampleView.as_view(), name='sample'),
    path('<int:n>/', FrechetMeanView.as_view(), name='means'),
]
