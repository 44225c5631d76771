"""QZE Purify."""

__version__ = "0.1.0"
__app_name__ = "qze-purify"
