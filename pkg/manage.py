#!/usr/bin/env python
import os
import sys

if __name__ == "__main__":
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings.local")

    try:
        from django.core.management import execute_from_command_line
    except ImportError as err:
        raise ImportError(
            "Couldn't import Django. Install the pipeline with "
            "`pip install -r requirements/local.txt` inside an activated virtual env."
        ) from err

    # ./manage.py simulate | spectrum | fit | select_k | cluster | evaluate
    execute_from_command_line(sys.argv)
