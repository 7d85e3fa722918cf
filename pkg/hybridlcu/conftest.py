# lets plain pytest collect the SimpleTestCase suites without pytest-django
import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'hybridlcu.settings')
django.setup()
