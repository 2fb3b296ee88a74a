# -*- coding: utf-8 -*-
"""__main__.py

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import sys

from .cli import main

sys.exit(main())
