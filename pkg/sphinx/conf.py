#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# LAMP documentation build configuration file

import os
import sys
sys.path.insert(1, os.path.abspath('..'))

import lamp.version

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.autosummary',
    'sphinx.ext.todo',
    'sphinx.ext.coverage',
    'sphinx.ext.githubpages',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'LAMP'
copyright = '2026, The LAMP Developers'
author = 'The LAMP Developers'

version = lamp.version.LAMP_VERSION
release = lamp.version.LAMP_VERSION

language = "en"

exclude_patterns = ['_build', 'docs', 'examples', 'tests-unit',
                    'tests-system', 'Thumbs.db', '.DS_Store']

pygments_style = 'sphinx'

todo_include_todos = True

# -- Options for HTML output ----------------------------------------------

html_theme = 'classic'
html_theme_options = {
    "stickysidebar": True
}
html_sidebars = {
    "**": ["globaltoc.html", "localtoc.html", "searchbox.html"]
}

# -- Autodoc --------------------------------------------------------------

autodoc_default_options = {
    "show-inheritance" : True,
    "members"          : True,
}
