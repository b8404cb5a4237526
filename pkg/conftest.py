import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'rankedtrees.settings')
django.setup()
