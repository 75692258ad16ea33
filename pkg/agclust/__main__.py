# -*- coding: utf-8 -*-
# Copyright 2026 agclust contributors

import sys

from .cli import main

sys.exit(main())
