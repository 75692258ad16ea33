# -*- coding: utf-8 -*-
#
# agclust documentation build configuration file.

import os
import sys

sys.path.insert(0, os.path.abspath('..'))

import agclust  # noqa: E402

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
    'sphinx.ext.doctest',
    'sphinx.ext.intersphinx',
    'sphinx.ext.viewcode',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'agclust'
copyright = u'2026 agclust contributors'
author = agclust.__author__

# The short X.Y version and the full release string.
version = agclust.__version__
release = version

language = None
exclude_patterns = ['_build']
pygments_style = 'sphinx'

napoleon_use_ivar = True
napoleon_use_param = True
napoleon_use_rtype = True

# -- Options for HTML output ----------------------------------------------

html_theme = 'alabaster'
html_extra_path = []

intersphinx_mapping = {
    'python': ('https://docs.python.org/3/', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
}
