import os
import sys

sys.path.insert(0, os.path.abspath("../.."))

project = "DDoS analysis"
copyright = "2024, DDoS analysis developers"
author = "DDoS analysis developers"


extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.coverage",
    "sphinx.ext.mathjax",
    "sphinx.ext.napoleon",
    "sphinx.ext.viewcode",
]

# docstrings use Args/Returns/Raises sections
napoleon_google_docstring = True
napoleon_numpy_docstring = False
autodoc_member_order = "bysource"
autodoc_mock_imports = ["joblib"]

templates_path = ["_templates"]
exclude_patterns = ["**/test_*"]

html_theme = "sphinx_rtd_theme"
html_static_path = ["_static"]
