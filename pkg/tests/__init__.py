"""Test suite for the qze_purify package."""
