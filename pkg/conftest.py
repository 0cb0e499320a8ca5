import os

import django


os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'editbench.settings')
django.setup()
