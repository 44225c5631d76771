"""Sphinx configuration."""
project = "QZE Purify"
author = "Martin Lanser"
copyright = "2024, Martin Lanser"
extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx_argparse_cli",
    "myst_parser",
]
autodoc_typehints = "description"
html_theme = "furo"
