from django.urls import path

from .views import StateListView, StateSpaceSizesView

app_name = 'statespace'

urlpatterns = [
    path('<int:n>/sizes/', StateSpaceSizesView.as_view(), name='sizes'),
    path('<int:n>/states/', StateListView.as_view(), name='states'),
]
